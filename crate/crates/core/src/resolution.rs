//! Noise-limited cut-off frequency, the Nyquist resolution limit, and the
//! two-source separability test used to score reconstructions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::attenuation::{attenuation_coefficient, phase_velocity, AttenuationLaw};
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Default peak-detection threshold, as a fraction of the normalized maximum.
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.2;
/// Default valley/peak ratio below which two peaks count as resolved.
pub const DEFAULT_VALLEY_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    /// rad/s
    pub omega_cut: f64,
    /// Hz
    pub f_cut: f64,
    pub snr_used: f64,
    /// m
    pub r: f64,
    /// Half wavelength at the cut-off, m.
    pub delta_space: f64,
    /// Half period at the cut-off, s.
    pub delta_time: f64,
    /// Phase velocity at the cut-off, m/s.
    pub c_at_cut: f64,
}

impl ResolutionReport {
    pub fn from_cutoff(omega_cut: f64, snr: f64, r: f64, c_at_cut: f64) -> Self {
        ResolutionReport {
            omega_cut,
            f_cut: omega_cut / (2.0 * PI),
            snr_used: snr,
            r,
            delta_space: nyquist_resolution(omega_cut, c_at_cut),
            delta_time: PI / omega_cut,
            c_at_cut,
        }
    }

    /// `key=value` lines in a fixed order.
    pub fn to_key_values(&self) -> String {
        format!(
            "omega_cut={:e}\nf_cut={:e}\nsnr_used={:e}\nr={:e}\ndelta_space={:e}\ndelta_time={:e}\nc_at_cut={:e}\n",
            self.omega_cut,
            self.f_cut,
            self.snr_used,
            self.r,
            self.delta_space,
            self.delta_time,
            self.c_at_cut
        )
    }
}

fn check_cutoff_inputs(r: f64, snr: f64) -> Result<()> {
    if !(snr > 1.0) {
        return Err(Error::NoCutoff(snr));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("distance must be > 0, got {r}")));
    }
    Ok(())
}

/// Solves `snr·exp(−α(ω_cut)·r) = 1` in closed form for the power law.
pub fn cutoff_frequency(law: &AttenuationLaw, r: f64, snr: f64) -> Result<ResolutionReport> {
    check_cutoff_inputs(r, snr)?;
    if law.alpha0() == 0.0 {
        return Err(Error::InfiniteCutoff);
    }
    let omega_cut = (snr.ln() / (law.alpha0() * r)).powf(1.0 / law.exponent());
    let c = phase_velocity(law, omega_cut)?;
    Ok(ResolutionReport::from_cutoff(omega_cut, snr, r, c))
}

/// Same equation, solved by bisection on the law's attenuation coefficient.
pub fn cutoff_frequency_bisection(law: &AttenuationLaw, r: f64, snr: f64) -> Result<ResolutionReport> {
    check_cutoff_inputs(r, snr)?;
    if law.alpha0() == 0.0 {
        return Err(Error::InfiniteCutoff);
    }
    let omega_cut = solve_cutoff(|w| attenuation_coefficient(law, w), r, snr)?;
    let c = phase_velocity(law, omega_cut)?;
    Ok(ResolutionReport::from_cutoff(omega_cut, snr, r, c))
}

/// Bisection for `α(ω)·r = ln(snr)` with any non-decreasing attenuation `α`.
pub fn solve_cutoff(alpha: impl Fn(f64) -> f64, r: f64, snr: f64) -> Result<f64> {
    check_cutoff_inputs(r, snr)?;
    let target = snr.ln();
    let f = |w: f64| alpha(w) * r - target;
    let mut hi = 1.0;
    let mut steps = 0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 2100 || !hi.is_finite() {
            return Err(Error::InfiniteCutoff);
        }
    }
    // α(0) = 0, so f(0) = −ln(snr) < 0 always brackets from below.
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `π·c/ω_cut`: half the wavelength at the cut-off.
pub fn nyquist_resolution(omega_cut: f64, c: f64) -> f64 {
    PI * c / omega_cut
}

/// Resolution limit using the law's own phase velocity at `omega_cut`.
pub fn resolution_limit(omega_cut: f64, law: &AttenuationLaw) -> Result<f64> {
    Ok(nyquist_resolution(omega_cut, phase_velocity(law, omega_cut)?))
}

/// Power-law exponent implied by two cut-offs measured at two distances with the
/// same SNR: `(f1/f2)^y = r2/r1`.
pub fn implied_exponent(f1: f64, r1: f64, f2: f64, r2: f64) -> f64 {
    (r2 / r1).ln() / (f1 / f2).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub resolved: bool,
    /// Times (s) of the detected peaks above threshold.
    pub peak_positions: Vec<f64>,
    /// Valley height ÷ lower peak height; present when exactly two peaks were found.
    pub valley_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityCriteria {
    pub detection_threshold: f64,
    pub valley_threshold: f64,
}

impl Default for SeparabilityCriteria {
    fn default() -> Self {
        SeparabilityCriteria {
            detection_threshold: DEFAULT_DETECTION_THRESHOLD,
            valley_threshold: DEFAULT_VALLEY_THRESHOLD,
        }
    }
}

/// Local maxima at or above `threshold`.
///
/// Three-point test with plateaus collapsed: a run of equal samples is a peak
/// when both neighbouring runs are strictly lower; its position is the run centre.
/// The first and last runs are never peaks.
pub fn find_peaks(x: &[f64], threshold: f64) -> Vec<usize> {
    let mut runs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, v) in x.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.2 == *v => run.1 = i,
            _ => runs.push((i, i, *v)),
        }
    }
    runs.windows(3)
        .filter(|w| w[1].2 > w[0].2 && w[1].2 > w[2].2 && w[1].2 >= threshold)
        .map(|w| (w[1].0 + w[1].1) / 2)
        .collect()
}

/// Two-source separability of `s` after normalizing it to a maximum of one.
pub fn separability(s: &Signal, criteria: SeparabilityCriteria) -> Result<SeparabilityVerdict> {
    let SeparabilityCriteria {
        detection_threshold,
        valley_threshold,
    } = criteria;
    if !(detection_threshold > 0.0 && detection_threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "detection threshold must lie in (0, 1), got {detection_threshold}"
        )));
    }
    if !(valley_threshold > 0.0 && valley_threshold <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "valley threshold must lie in (0, 1], got {valley_threshold}"
        )));
    }
    if !(s.max() > 0.0) {
        return Ok(SeparabilityVerdict {
            resolved: false,
            peak_positions: Vec::new(),
            valley_ratio: None,
        });
    }
    let s = s.normalized()?;
    let x = s.samples();
    let peaks = find_peaks(x, detection_threshold);
    let peak_positions = peaks.iter().map(|&i| s.time(i)).collect();
    if peaks.len() != 2 {
        return Ok(SeparabilityVerdict {
            resolved: false,
            peak_positions,
            valley_ratio: None,
        });
    }
    let (a, b) = (peaks[0], peaks[1]);
    let valley = x[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = valley / x[a].min(x[b]);
    Ok(SeparabilityVerdict {
        resolved: ratio < valley_threshold,
        peak_positions,
        valley_ratio: Some(ratio),
    })
}

/// Full width at half maximum of the global maximum, with linear interpolation
/// between samples. Returns seconds.
pub fn fwhm(s: &Signal) -> Result<f64> {
    let x = s.samples();
    let i = s.argmax();
    let peak = x[i];
    if !(peak > 0.0) {
        return Err(Error::ZeroSignal("pulse".into()));
    }
    let half = peak / 2.0;
    let left = (0..i).rev().find(|&k| x[k] < half).ok_or_else(|| {
        Error::InvalidInput("pulse does not fall below half maximum on the left".into())
    })?;
    let right = (i + 1..x.len()).find(|&k| x[k] < half).ok_or_else(|| {
        Error::InvalidInput("pulse does not fall below half maximum on the right".into())
    })?;
    let tl = left as f64 + (half - x[left]) / (x[left + 1] - x[left]);
    let tr = (right - 1) as f64 + (x[right - 1] - half) / (x[right - 1] - x[right]);
    Ok((tr - tl) * s.dt())
}

/// Width between the first sign changes on either side of the global maximum
/// (zero-to-zero main-lobe width), in seconds.
pub fn main_lobe_width(s: &Signal) -> Result<f64> {
    let x = s.samples();
    let i = s.argmax();
    if !(x[i] > 0.0) {
        return Err(Error::ZeroSignal("pulse".into()));
    }
    let left = (0..i)
        .rev()
        .find(|&k| x[k] <= 0.0)
        .ok_or_else(|| Error::InvalidInput("no zero crossing left of the peak".into()))?;
    let right = (i + 1..x.len())
        .find(|&k| x[k] <= 0.0)
        .ok_or_else(|| Error::InvalidInput("no zero crossing right of the peak".into()))?;
    let tl = left as f64 + x[left] / (x[left] - x[left + 1]);
    let tr = (right - 1) as f64 + x[right - 1] / (x[right - 1] - x[right]);
    Ok((tr - tl) * s.dt())
}
