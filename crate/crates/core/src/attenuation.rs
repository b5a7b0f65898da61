//! Power-law attenuation with causal dispersion.
//!
//! `α(ω) = alpha0·|ω|^y` with `alpha0` stored against angular frequency, and the
//! matching dispersion branch (valid for `y ≠ 1`)
//!
//! ```text
//! 1/c(ω) = 1/c0 + alpha0·tan(πy/2)·(|ω|^(y−1) − ω_ref^(y−1))
//! ```
//!
//! anchored so that `c(ω_ref) = c0`. The operator only ever sees
//! `γ(ω) = K(ω) − ω/c0`, with `K(ω) = ω/c(ω) + iα(ω)`.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nepers per decibel.
pub const NP_PER_DB: f64 = LN_10 / 20.0;

/// Default dispersion anchor: 1 MHz.
pub const DEFAULT_F_REF_HZ: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dispersion {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationLaw {
    alpha0: f64,
    y: f64,
    c0: f64,
    omega_ref: f64,
    dispersion: Dispersion,
}

/// `K(ω)` split into its real (dispersion) and imaginary (attenuation) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWavenumberSample {
    pub omega: f64,
    pub k_real: f64,
    pub k_imag: f64,
}

impl ComplexWavenumberSample {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.k_real, self.k_imag)
    }
}

impl AttenuationLaw {
    /// `alpha0` in Np·m⁻¹·(rad/s)^(−y), `c0` in m/s, `omega_ref` in rad/s.
    pub fn new(alpha0: f64, y: f64, c0: f64, omega_ref: f64, dispersion: Dispersion) -> Result<Self> {
        if !(alpha0 >= 0.0 && alpha0.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha0 must be >= 0, got {alpha0}")));
        }
        if !(y > 0.0 && y <= 2.0) {
            return Err(Error::InvalidInput(format!("exponent y must lie in (0, 2], got {y}")));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidInput(format!("c0 must be > 0, got {c0}")));
        }
        if !(omega_ref > 0.0 && omega_ref.is_finite()) {
            return Err(Error::InvalidInput(format!("omega_ref must be > 0, got {omega_ref}")));
        }
        Ok(AttenuationLaw {
            alpha0,
            y,
            c0,
            omega_ref,
            dispersion,
        })
    }

    /// Builds a law from the usual tissue units, dB·cm⁻¹·MHz^(−y).
    pub fn from_db_cm_mhz_y(
        alpha_db_cm_mhz_y: f64,
        y: f64,
        c0: f64,
        f_ref_hz: f64,
        dispersion: Dispersion,
    ) -> Result<Self> {
        if !(y > 0.0 && y <= 2.0) {
            return Err(Error::InvalidInput(format!("exponent y must lie in (0, 2], got {y}")));
        }
        AttenuationLaw::new(
            db_cm_mhz_y_to_np_m_rad(alpha_db_cm_mhz_y, y),
            y,
            c0,
            2.0 * PI * f_ref_hz,
            dispersion,
        )
    }

    /// A lossless, dispersionless medium.
    pub fn lossless(c0: f64) -> Result<Self> {
        AttenuationLaw::new(0.0, 2.0, c0, 2.0 * PI * DEFAULT_F_REF_HZ, Dispersion::Off)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn exponent(&self) -> f64 {
        self.y
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    pub fn dispersion(&self) -> Dispersion {
        self.dispersion
    }

    pub fn with_dispersion(mut self, dispersion: Dispersion) -> Self {
        self.dispersion = dispersion;
        self
    }

    fn is_dispersive(&self) -> bool {
        self.dispersion == Dispersion::On && self.alpha0 > 0.0
    }

    /// `alpha0·tan(πy/2)`; exactly zero for `y = 2`.
    fn dispersion_slope(&self) -> f64 {
        if self.y == 2.0 {
            0.0
        } else {
            self.alpha0 * (PI * self.y / 2.0).tan()
        }
    }

    /// `1/c(ω) − 1/c0` for the dispersive branch.
    fn slowness_shift(&self, omega: f64) -> Result<f64> {
        if self.y == 1.0 {
            return Err(Error::UnsupportedExponent(self.y));
        }
        let e = self.y - 1.0;
        Ok(self.dispersion_slope() * (omega.abs().powf(e) - self.omega_ref.powf(e)))
    }

    pub fn wavenumber(&self, omega: f64) -> Result<ComplexWavenumberSample> {
        let k_real = if omega == 0.0 {
            0.0
        } else {
            omega / phase_velocity(self, omega)?
        };
        Ok(ComplexWavenumberSample {
            omega,
            k_real,
            k_imag: attenuation_coefficient(self, omega),
        })
    }
}

/// `alpha0·|ω|^y` in Np/m; zero at DC.
pub fn attenuation_coefficient(law: &AttenuationLaw, omega: f64) -> f64 {
    if omega == 0.0 || law.alpha0 == 0.0 {
        0.0
    } else {
        law.alpha0 * omega.abs().powf(law.y)
    }
}

/// Phase velocity `c(ω)` in m/s. Returns `c0` when dispersion is off or the medium is lossless.
pub fn phase_velocity(law: &AttenuationLaw, omega: f64) -> Result<f64> {
    if !law.is_dispersive() {
        return Ok(law.c0);
    }
    if law.y == 1.0 {
        return Err(Error::UnsupportedExponent(law.y));
    }
    if omega == 0.0 {
        return Err(Error::InvalidInput("phase velocity is undefined at ω = 0".into()));
    }
    if omega.abs() == law.omega_ref {
        return Ok(law.c0);
    }
    let slowness = 1.0 / law.c0 + law.slowness_shift(omega)?;
    if !(slowness > 0.0) {
        return Err(Error::InvalidInput(format!(
            "dispersion relation gives non-positive slowness {slowness:e} at ω = {omega:e}"
        )));
    }
    Ok(1.0 / slowness)
}

/// `γ(ω) = K(ω) − ω/c0`: real part odd (relative dispersion), imaginary part even (α).
pub fn gamma(law: &AttenuationLaw, omega: f64) -> Result<Complex64> {
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let re = if law.is_dispersive() {
        // ω·(1/c − 1/c0), written without the cancellation of ω/c − ω/c0.
        omega * law.slowness_shift(omega)?
    } else {
        0.0
    };
    Ok(Complex64::new(re, attenuation_coefficient(law, omega)))
}

/// dB·cm⁻¹·MHz^(−y) → Np·m⁻¹·(rad/s)^(−y).
pub fn db_cm_mhz_y_to_np_m_rad(alpha_db: f64, y: f64) -> f64 {
    alpha_db * NP_PER_DB * 100.0 / (2.0 * PI * 1.0e6).powf(y)
}

/// Np·m⁻¹·(rad/s)^(−y) → dB·cm⁻¹·MHz^(−y).
pub fn np_m_rad_to_db_cm_mhz_y(alpha0: f64, y: f64) -> f64 {
    alpha0 * (2.0 * PI * 1.0e6).powf(y) / (NP_PER_DB * 100.0)
}

/// Human-readable unit conversion, printed by the CLI in verbose mode.
pub fn conversion_formula(alpha_db: f64, y: f64) -> String {
    format!(
        "alpha0 [Np/m/(rad/s)^y] = {alpha_db} dB/cm/MHz^y * (ln(10)/20 Np/dB) * 100 cm/m / (2*pi*1e6 rad/s/MHz)^{y} = {:.10e}",
        db_cm_mhz_y_to_np_m_rad(alpha_db, y)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(n: usize) -> Vec<f64> {
        // deterministic spread over 1e4..1e9 rad/s with both signs
        (0..n)
            .map(|i| {
                let u = ((i as f64 * 0.618_033_988_749_895) % 1.0) * 5.0 + 4.0;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * 10f64.powf(u)
            })
            .collect()
    }

    fn fat() -> AttenuationLaw {
        AttenuationLaw::from_db_cm_mhz_y(0.5, 1.5, 1540.0, 1e6, Dispersion::On).unwrap()
    }

    #[test]
    fn lossless_has_no_attenuation() {
        let law = AttenuationLaw::new(0.0, 1.3, 1500.0, 1e6, Dispersion::On).unwrap();
        for w in sweep(50) {
            assert_eq!(attenuation_coefficient(&law, w), 0.0);
            assert_eq!(phase_velocity(&law, w).unwrap(), 1500.0);
            assert_eq!(gamma(&law, w).unwrap(), Complex64::new(0.0, 0.0));
            let k = law.wavenumber(w).unwrap();
            assert_eq!(k.k_real, w / 1500.0);
        }
    }

    #[test]
    fn quadratic_attenuation_value() {
        let law = AttenuationLaw::new(1e-15, 2.0, 1500.0, 1e6, Dispersion::Off).unwrap();
        let w = 2.0 * PI * 1e7;
        let expected = 1e-15 * w * w;
        assert!((attenuation_coefficient(&law, w) - expected).abs() < 1e-15 * expected);
        assert!((expected - 3.948).abs() < 1e-3);
    }

    #[test]
    fn attenuation_is_even_and_monotone() {
        let law = fat();
        for w in sweep(100) {
            assert_eq!(attenuation_coefficient(&law, w), attenuation_coefficient(&law, -w));
            assert!(attenuation_coefficient(&law, 2.0 * w) >= attenuation_coefficient(&law, w));
        }
        assert_eq!(attenuation_coefficient(&law, 0.0), 0.0);
    }

    #[test]
    fn velocity_anchor() {
        let law = fat();
        assert_eq!(phase_velocity(&law, law.omega_ref()).unwrap(), 1540.0);
        assert_eq!(phase_velocity(&law, -law.omega_ref()).unwrap(), 1540.0);
    }

    #[test]
    fn velocity_increases_with_frequency_for_y_between_one_and_two() {
        let law = fat();
        let lo = phase_velocity(&law, 2.0 * PI * 2e6).unwrap();
        let hi = phase_velocity(&law, 2.0 * PI * 50e6).unwrap();
        assert!(hi > lo && lo > 1540.0);
    }

    #[test]
    fn quadratic_law_is_dispersionless() {
        let law = AttenuationLaw::new(2.5e-14, 2.0, 1500.0, 2.0 * PI * 1e6, Dispersion::On).unwrap();
        assert_eq!(phase_velocity(&law, 2.0 * PI * 2e7).unwrap(), 1500.0);
    }

    #[test]
    fn unit_exponent_is_unsupported() {
        let law = AttenuationLaw::new(1e-8, 1.0, 1500.0, 1e6, Dispersion::On).unwrap();
        assert!(matches!(phase_velocity(&law, 1e7), Err(Error::UnsupportedExponent(_))));
        assert!(gamma(&law, 1e7).is_err());
        let off = law.with_dispersion(Dispersion::Off);
        assert_eq!(phase_velocity(&off, 1e7).unwrap(), 1500.0);
    }

    #[test]
    fn gamma_imag_is_attenuation_and_symmetric() {
        let law = fat();
        assert_eq!(gamma(&law, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        for w in sweep(100) {
            let g = gamma(&law, w).unwrap();
            let gm = gamma(&law, -w).unwrap();
            assert_eq!(g.im, attenuation_coefficient(&law, w));
            assert_eq!(gm.re, -g.re);
            assert_eq!(gm.im, g.im);
        }
    }

    #[test]
    fn gamma_matches_wavenumber_difference() {
        let law = fat();
        for w in sweep(40) {
            let k = law.wavenumber(w).unwrap();
            let direct = k.as_complex() - Complex64::new(w / law.c0(), 0.0);
            let g = gamma(&law, w).unwrap();
            assert!((g - direct).norm() <= 1e-9 * k.as_complex().norm());
        }
    }

    #[test]
    fn invalid_laws_rejected() {
        assert!(AttenuationLaw::new(-1.0, 1.5, 1500.0, 1e6, Dispersion::On).is_err());
        assert!(AttenuationLaw::new(1.0, 0.0, 1500.0, 1e6, Dispersion::On).is_err());
        assert!(AttenuationLaw::new(1.0, 2.5, 1500.0, 1e6, Dispersion::On).is_err());
        assert!(AttenuationLaw::new(1.0, 1.5, 0.0, 1e6, Dispersion::On).is_err());
        assert!(AttenuationLaw::new(1.0, 1.5, 1500.0, 0.0, Dispersion::On).is_err());
    }

    #[test]
    fn db_conversion_round_trip() {
        let a = db_cm_mhz_y_to_np_m_rad(0.6, 1.4);
        assert!((np_m_rad_to_db_cm_mhz_y(a, 1.4) - 0.6).abs() < 1e-14);
        // 1 dB/cm at 1 MHz, y = 1 → 11.5129 Np/m at ω = 2π·1e6
        let law = AttenuationLaw::from_db_cm_mhz_y(1.0, 1.0, 1500.0, 1e6, Dispersion::Off).unwrap();
        let alpha = attenuation_coefficient(&law, 2.0 * PI * 1e6);
        assert!((alpha - 100.0 * LN_10 / 20.0).abs() < 1e-9);
    }
}
