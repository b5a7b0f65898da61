//! The attenuation operator `M_r = F* diag(m) F`, diagonal in the DFT basis.
//!
//! Per bin, `m(ω) = ω/(c0·K(ω)) · exp(iγ(ω)·r)`, optionally multiplied by the
//! spectrum of a transducer impulse response. Bins are computed for
//! `0 ≤ ω ≤ ω_Nyquist` and mirrored as complex conjugates, so real signals map to
//! real signals. The Nyquist bin keeps only its real part and the DC bin is 1.
//! A zero propagation distance gives the identity.

use std::fs;
use std::io::Write as _;
use std::ops::Range;
use std::path::Path;

use num_complex::Complex64;

use crate::attenuation::AttenuationLaw;
use crate::error::{Error, Result};
use crate::signal::{fmt17, DftPlan, Grid, Signal};

/// Imaginary residual allowed after synthesis, relative to the real peak.
pub const REAL_OUTPUT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ForwardOperator {
    grid: Grid,
    r: f64,
    law: AttenuationLaw,
    attenuation: Vec<Complex64>,
    ir_spectrum: Option<Vec<Complex64>>,
    multipliers: Vec<Complex64>,
    plan: DftPlan,
}

/// Fills the upper half of a length-`n` spectrum from bins `0..=n/2`.
fn mirror_hermitian(half: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    full[..half.len()].copy_from_slice(half);
    full[0].im = 0.0;
    if n % 2 == 0 {
        full[n / 2].im = 0.0;
    }
    for j in 1..n.div_ceil(2) {
        full[n - j] = full[j].conj();
    }
    full
}

/// Attenuation multiplier `ω/(c0·K(ω))·exp(iγ(ω)r)` at one frequency.
pub fn attenuation_multiplier(law: &AttenuationLaw, omega: f64, r: f64) -> Result<Complex64> {
    if omega == 0.0 || r == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let k = law.wavenumber(omega)?.as_complex();
    let factor = Complex64::new(omega / law.c0(), 0.0) / k;
    let g = crate::attenuation::gamma(law, omega)?;
    Ok(factor * (Complex64::i() * g * r).exp())
}

/// `ω/(c0·K(ω))`, the near-unity amplitude factor.
pub fn unity_factor(law: &AttenuationLaw, omega: f64) -> Result<Complex64> {
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let k = law.wavenumber(omega)?.as_complex();
    Ok(Complex64::new(omega / law.c0(), 0.0) / k)
}

impl ForwardOperator {
    /// Builds `M_r` for propagation distance `r` (metres) on `grid`.
    ///
    /// The impulse response, when given, must share `N` and `dt`; its first sample is lag zero.
    pub fn build(law: &AttenuationLaw, r: f64, grid: Grid, ir: Option<&Signal>) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "propagation distance must be >= 0, got {r}"
            )));
        }
        let grid = Grid::new(grid.n, grid.dt)?;
        let n = grid.n;
        let plan = DftPlan::new(n);

        let half = (0..=n / 2)
            .map(|j| attenuation_multiplier(law, grid.omega(j), r))
            .collect::<Result<Vec<_>>>()?;
        let mut half = half;
        if n % 2 == 0 {
            // Nyquist bin of a real circulant must be real.
            half[n / 2] = Complex64::new(half[n / 2].re, 0.0);
        }
        let attenuation = mirror_hermitian(&half, n);

        let ir_spectrum = match ir {
            None => None,
            Some(ir) => {
                if ir.len() != n || ir.dt() != grid.dt {
                    return Err(Error::GridMismatch(format!(
                        "impulse response on (N={}, dt={:e}), operator on (N={}, dt={:e})",
                        ir.len(),
                        ir.dt(),
                        n,
                        grid.dt
                    )));
                }
                let full = plan.analyze(ir.samples());
                Some(mirror_hermitian(&full[..=n / 2], n))
            }
        };

        let multipliers = match &ir_spectrum {
            None => attenuation.clone(),
            Some(h) => attenuation.iter().zip(h).map(|(a, b)| a * b).collect(),
        };

        Ok(ForwardOperator {
            grid,
            r,
            law: *law,
            attenuation,
            ir_spectrum,
            multipliers,
            plan,
        })
    }

    pub fn identity(grid: Grid) -> Result<Self> {
        ForwardOperator::build(&AttenuationLaw::lossless(1500.0)?, 0.0, grid, None)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn distance(&self) -> f64 {
        self.r
    }

    pub fn law(&self) -> &AttenuationLaw {
        &self.law
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    pub fn attenuation_multipliers(&self) -> &[Complex64] {
        &self.attenuation
    }

    pub fn ir_spectrum(&self) -> Option<&[Complex64]> {
        self.ir_spectrum.as_deref()
    }

    pub(crate) fn plan(&self) -> &DftPlan {
        &self.plan
    }

    pub fn check_grid(&self, s: &Signal) -> Result<()> {
        if s.len() != self.grid.n || s.dt() != self.grid.dt {
            return Err(Error::GridMismatch(format!(
                "signal on (N={}, dt={:e}), operator on (N={}, dt={:e})",
                s.len(),
                s.dt(),
                self.grid.n,
                self.grid.dt
            )));
        }
        Ok(())
    }

    fn apply_with(&self, s: &Signal, conjugate: bool) -> Result<Signal> {
        self.check_grid(s)?;
        let mut spec = self.plan.analyze(s.samples());
        for (c, m) in spec.iter_mut().zip(&self.multipliers) {
            *c *= if conjugate { m.conj() } else { *m };
        }
        let out = self.plan.synthesize_real(spec, REAL_OUTPUT_TOL)?;
        s.with_samples(out)
    }

    /// `M_r·s`.
    pub fn apply(&self, s: &Signal) -> Result<Signal> {
        self.apply_with(s, false)
    }

    /// `M_rᵀ·s` (conjugated multipliers).
    pub fn apply_adjoint(&self, s: &Signal) -> Result<Signal> {
        self.apply_with(s, true)
    }

    /// `(ω_j, |m_j|)` sorted by `|ω_j|` ascending.
    pub fn singular_values(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .multipliers
            .iter()
            .enumerate()
            .map(|(j, m)| (self.grid.omega(j), m.norm()))
            .collect();
        out.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(b.0.total_cmp(&a.0)));
        out
    }

    pub fn max_singular_value(&self) -> f64 {
        self.multipliers.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Time-domain kernel `M(r, t)`; index `k` is circular lag `k·dt`.
    pub fn kernel(&self) -> Result<Signal> {
        let h = self.plan.synthesize_real(self.multipliers.clone(), REAL_OUTPUT_TOL)?;
        Signal::new(h, self.grid.dt, 0.0)
    }

    /// Fraction of kernel energy at lags that would wrap around the grid for a
    /// source occupying sample indices `support`.
    pub fn wraparound_energy_fraction(&self, support: Range<usize>) -> Result<f64> {
        let n = self.grid.n as isize;
        if support.is_empty() || support.end as isize > n {
            return Err(Error::InvalidInput(format!("support {support:?} outside 0..{n}")));
        }
        let kernel = self.kernel()?;
        let lo = -(support.start as isize);
        let hi = n - support.end as isize;
        let mut total = 0.0;
        let mut wrapped = 0.0;
        for (k, h) in kernel.samples().iter().enumerate() {
            let k = k as isize;
            let lag = if k <= n / 2 { k } else { k - n };
            let e = h * h;
            total += e;
            if lag < lo || lag > hi {
                wrapped += e;
            }
        }
        Ok(if total > 0.0 { wrapped / total } else { 0.0 })
    }

    /// Largest `|ω/(c0K(ω)) − 1|` over bins with `f_lo ≤ |f| ≤ f_hi` (Hz).
    pub fn unity_factor_deviation(&self, f_lo: f64, f_hi: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..=self.grid.n / 2 {
            let w = self.grid.omega(j);
            let f = w / (2.0 * std::f64::consts::PI);
            if f >= f_lo && f <= f_hi {
                worst = worst.max((unity_factor(&self.law, w)? - 1.0).norm());
            }
        }
        Ok(worst)
    }

    /// Debug export: `omega,sigma,phase` per DFT bin in bin order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("omega,sigma,phase\n");
        for (j, m) in self.multipliers.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt17(self.grid.omega(j)),
                fmt17(m.norm()),
                fmt17(m.arg())
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}
