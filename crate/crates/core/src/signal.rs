//! Sampled signals, the shared DFT convention, noise injection and SNR estimation.
//!
//! # Fourier convention
//!
//! Every module uses the same transform pair, chosen so that synthesis carries the
//! `exp(-iωt)` kernel of the continuous propagation model:
//!
//! ```text
//! analysis   X_j = Σ_n x_n · exp(+2πi·j·n/N)            (unnormalized)
//! synthesis  x_n = (1/N) · Σ_j X_j · exp(-2πi·j·n/N)
//! ```
//!
//! Bin `j` sits at angular frequency `ω_j = 2πj/(N·dt)` for `j ≤ N/2` and at
//! `2π(j−N)/(N·dt)` above that. The Nyquist bin of an even-length grid is taken
//! as positive.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::ops::Range;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Relative tolerance for the conjugate-symmetry check in [`inverse_dft`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Uniformly sampled real-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    dt: f64,
    t0: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidInput(format!("t0 must be finite, got {t0}")));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample {} at index {i}",
                samples[i]
            )));
        }
        Ok(Signal { samples, dt, t0 })
    }

    pub fn zeros(n: usize, dt: f64, t0: f64) -> Result<Self> {
        Signal::new(vec![0.0; n], dt, t0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn grid(&self) -> Grid {
        Grid { n: self.len(), dt: self.dt }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    /// Replaces the samples, keeping the time grid.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                self.len(),
                samples.len()
            )));
        }
        Signal::new(samples, self.dt, self.t0)
    }

    /// Exact equality of sample count, `dt` and `t0`.
    pub fn same_grid(&self, other: &Signal) -> bool {
        self.len() == other.len() && self.dt == other.dt && self.t0 == other.t0
    }

    pub fn check_same_grid(&self, other: &Signal) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(N={}, dt={:e}, t0={:e}) vs (N={}, dt={:e}, t0={:e})",
                self.len(),
                self.dt,
                self.t0,
                other.len(),
                other.dt,
                other.t0
            )))
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.check_same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Signal::new(samples, self.dt, self.t0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Signal> {
        Signal::new(self.samples.iter().map(|v| v * factor).collect(), self.dt, self.t0)
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Signal, b: f64) -> Result<Signal> {
        self.check_same_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Signal::new(samples, self.dt, self.t0)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.samples.iter().enumerate() {
            if *v > self.samples[best] {
                best = i;
            }
        }
        best
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    /// Scales so that the maximum sample is exactly one.
    pub fn normalized(&self) -> Result<Signal> {
        let max = self.max();
        if !(max > 0.0) {
            return Err(Error::ZeroSignal("signal".into()));
        }
        let samples = self
            .samples
            .iter()
            .map(|v| if *v == max { 1.0 } else { v / max })
            .collect();
        Signal::new(samples, self.dt, self.t0)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Signal> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_signal_csv(&text).map_err(|(line, message)| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// `t,p` CSV with 17 significant digits per value.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(48 * self.len() + 4);
        out.push_str("t,p\n");
        for (t, p) in self.times().zip(&self.samples) {
            out.push_str(&format!("{},{}\n", fmt17(t), fmt17(*p)));
        }
        out
    }
}

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses `t,p` CSV text. Errors carry a 1-based line number.
pub fn parse_signal_csv(text: &str) -> std::result::Result<Signal, (usize, String)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "t,p" => {}
        Some((i, header)) => return Err((i + 1, format!("expected header `t,p`, found `{header}`"))),
        None => return Err((1, "empty file".into())),
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let mut fields = line.split(',');
        let (Some(t), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err((i + 1, format!("expected two fields, found `{line}`")));
        };
        let t: f64 = t.trim().parse().map_err(|e| (i + 1, format!("bad time `{t}`: {e}")))?;
        let p: f64 = p.trim().parse().map_err(|e| (i + 1, format!("bad value `{p}`: {e}")))?;
        times.push(t);
        values.push(p);
    }
    if times.len() < 2 {
        return Err((1, "a signal needs at least 2 samples".into()));
    }
    let dt = recover_dt(&times).ok_or((1, "time column is not uniformly sampled".to_string()))?;
    Signal::new(values, dt, times[0]).map_err(|e| (1, e.to_string()))
}

/// Finds the `dt` that regenerates the time column exactly as `t0 + n·dt`,
/// falling back to the mean step when the column is uniform only to 1e-9.
fn recover_dt(times: &[f64]) -> Option<f64> {
    let n = times.len();
    let t0 = times[0];
    let estimate = (times[n - 1] - t0) / (n - 1) as f64;
    if !(estimate > 0.0) {
        return None;
    }
    let regenerates = |dt: f64| times.iter().enumerate().all(|(i, t)| t0 + i as f64 * dt == *t);
    let mut down = estimate;
    let mut up = estimate;
    for _ in 0..64 {
        if regenerates(up) {
            return Some(up);
        }
        if regenerates(down) {
            return Some(down);
        }
        up = up.next_up();
        down = down.next_down();
    }
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - estimate).abs() <= 1e-9 * estimate);
    uniform.then_some(estimate)
}

/// Sample count and interval of a uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub dt: f64,
}

impl Grid {
    pub fn new(n: usize, dt: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("grid needs N >= 2, got {n}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("grid needs dt > 0, got {dt}")));
        }
        Ok(Grid { n, dt })
    }

    /// Angular frequency of DFT bin `j`.
    pub fn omega(&self, j: usize) -> f64 {
        let n = self.n as isize;
        let j = j as isize;
        let signed = if j <= n / 2 { j } else { j - n };
        2.0 * std::f64::consts::PI * signed as f64 / (self.n as f64 * self.dt)
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.omega(j)).collect()
    }

    /// Spacing between neighbouring angular-frequency bins.
    pub fn d_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.dt)
    }
}

/// DFT coefficients of a signal, in the convention documented at module level.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coefficients: Vec<Complex64>,
    pub dt: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn grid(&self) -> Grid {
        Grid { n: self.len(), dt: self.dt }
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.grid().omega(j)
    }

    /// Largest deviation from `X[N-j] = conj(X[j])`, relative to the largest
    /// coefficient magnitude. The DC and Nyquist bins must be real.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.len();
        let scale = self.coefficients.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = self.coefficients[0].im.abs();
        for j in 1..n {
            let d = (self.coefficients[n - j] - self.coefficients[j].conj()).norm();
            worst = worst.max(d);
        }
        worst / scale
    }
}

/// Cached FFT plans for one transform length.
#[derive(Clone)]
pub struct DftPlan {
    n: usize,
    analysis: Arc<dyn Fft<f64>>,
    synthesis: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan").field("n", &self.n).finish()
    }
}

impl DftPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        DftPlan {
            n,
            // rustfft's "inverse" direction is the exp(+i) kernel.
            analysis: planner.plan_fft(n, FftDirection::Inverse),
            synthesis: planner.plan_fft(n, FftDirection::Forward),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn analyze(&self, x: &[f64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.analysis.process(&mut buf);
        buf
    }

    /// Synthesis including the `1/N` factor; returns complex samples.
    pub fn synthesize(&self, mut coefficients: Vec<Complex64>) -> Vec<Complex64> {
        assert_eq!(coefficients.len(), self.n);
        self.synthesis.process(&mut coefficients);
        let scale = 1.0 / self.n as f64;
        coefficients.iter_mut().for_each(|c| *c *= scale);
        coefficients
    }

    /// Synthesis of a spectrum that should be Hermitian: returns the real part and
    /// fails if the imaginary residual exceeds `rel_tol` of the output scale.
    ///
    /// The scale is the larger of the real peak and `Σ|X_j|/N`, the bound on any
    /// output sample; a near-cancelling output would otherwise flag round-off.
    pub fn synthesize_real(&self, coefficients: Vec<Complex64>, rel_tol: f64) -> Result<Vec<f64>> {
        let bound = coefficients.iter().map(|c| c.norm()).sum::<f64>() / self.n as f64;
        self.synthesize_real_scaled(coefficients, rel_tol, bound)
    }

    /// As [`synthesize_real`](Self::synthesize_real) with a caller-supplied scale, for
    /// spectra formed by cancellation where round-off follows the terms, not the sum.
    pub fn synthesize_real_scaled(&self, coefficients: Vec<Complex64>, rel_tol: f64, bound: f64) -> Result<Vec<f64>> {
        let out = self.synthesize(coefficients);
        let max_re = out.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
        let max_im = out.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        if max_im > rel_tol * max_re.max(bound) && max_im > f64::MIN_POSITIVE {
            return Err(Error::NotHermitian {
                max_imag_residual: max_im,
            });
        }
        Ok(out.into_iter().map(|c| c.re).collect())
    }
}

pub fn forward_dft(s: &Signal) -> Spectrum {
    let plan = DftPlan::new(s.len());
    Spectrum {
        coefficients: plan.analyze(s.samples()),
        dt: s.dt(),
    }
}

/// Inverse transform of a conjugate-symmetric spectrum; the result starts at `t0`.
pub fn inverse_dft(sp: &Spectrum, t0: f64) -> Result<Signal> {
    let plan = DftPlan::new(sp.len());
    let out = plan.synthesize(sp.coefficients.clone());
    if sp.hermitian_defect() > HERMITIAN_TOL {
        let max_imag_residual = out.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        return Err(Error::NotHermitian { max_imag_residual });
    }
    Signal::new(out.into_iter().map(|c| c.re).collect(), sp.dt, t0)
}

/// Additive white Gaussian noise parameters.
///
/// The noise level is the standard deviation `reference_peak / snr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    snr: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(snr: f64, seed: u64) -> Result<Self> {
        if !(snr > 1.0) || snr.is_nan() {
            return Err(Error::InvalidInput(format!("snr must exceed 1, got {snr}")));
        }
        Ok(NoiseModel { snr, seed })
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Adds white Gaussian noise of standard deviation `reference_peak / snr`.
///
/// Uses ChaCha20 seeded from `nm.seed`, so equal inputs give bit-identical output.
pub fn add_noise(s: &Signal, nm: &NoiseModel, reference_peak: f64) -> Result<Signal> {
    if !(reference_peak > 0.0 && reference_peak.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "reference_peak must be positive, got {reference_peak}"
        )));
    }
    let sigma = reference_peak / nm.snr;
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Internal(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(nm.seed);
    let samples = s.samples().iter().map(|v| v + normal.sample(&mut rng)).collect();
    s.with_samples(samples)
}

const MIN_WINDOW: usize = 16;

/// Peak magnitude in `signal_window` divided by the standard deviation in `noise_window`.
pub fn estimate_snr(s: &Signal, noise_window: Range<usize>, signal_window: Range<usize>) -> Result<f64> {
    for (name, w) in [("noise", &noise_window), ("signal", &signal_window)] {
        if w.end > s.len() || w.start > w.end {
            return Err(Error::InvalidInput(format!(
                "{name} window {w:?} outside 0..{}",
                s.len()
            )));
        }
        if w.len() < MIN_WINDOW {
            return Err(Error::InvalidInput(format!(
                "{name} window has {} samples, need at least {MIN_WINDOW}",
                w.len()
            )));
        }
    }
    if noise_window.start < signal_window.end && signal_window.start < noise_window.end {
        return Err(Error::InvalidInput(format!(
            "windows overlap: noise {noise_window:?}, signal {signal_window:?}"
        )));
    }
    let noise = &s.samples()[noise_window];
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    let var = noise.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (noise.len() - 1) as f64;
    let std = var.sqrt();
    let peak = s.samples()[signal_window].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(std > f64::EPSILON * peak) || std == 0.0 {
        return Err(Error::ZeroNoiseFloor);
    }
    Ok(peak / std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let phase = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                        Complex64::from_polar(*v, phase)
                    })
                    .sum()
            })
            .collect()
    }

    fn lcg_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn constant_signal_is_dc_only() {
        let s = Signal::new(vec![1.0; 4], 1.0, 0.0).unwrap();
        let sp = forward_dft(&s);
        let expected = [4.0, 0.0, 0.0, 0.0];
        for (c, e) in sp.coefficients.iter().zip(expected) {
            assert!((c - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let s = Signal::new(vec![1.0, 0.0, 0.0, 0.0], 1.0, 0.0).unwrap();
        for c in forward_dft(&s).coefficients {
            assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn fft_matches_naive_sum() {
        let x = lcg_signal(64, 7);
        let s = Signal::new(x.clone(), 1e-9, 0.0).unwrap();
        let fast = forward_dft(&s).coefficients;
        let slow = naive_dft(&x);
        let scale = slow.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn analysis_kernel_is_positive_exponent() {
        // x_n = cos shifted by a quarter period puts the energy in the sign of Im.
        let n = 8;
        let x: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).sin()).collect();
        let sp = forward_dft(&Signal::new(x, 1.0, 0.0).unwrap());
        // Σ sin(θk) e^{+iθk} = i N/2
        assert!((sp.coefficients[1] - Complex64::new(0.0, 4.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_of_dc_spectrum() {
        let sp = Spectrum {
            coefficients: vec![Complex64::new(4.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()],
            dt: 1.0,
        };
        let s = inverse_dft(&sp, 0.0).unwrap();
        for v in s.samples() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip_identity() {
        let x = lcg_signal(128, 3);
        let s = Signal::new(x, 2e-9, 1e-6).unwrap();
        let back = inverse_dft(&forward_dft(&s), s.t0()).unwrap();
        let scale = s.peak_abs();
        for (a, b) in s.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); 8];
        coefficients[1] = Complex64::new(1.0, 0.0);
        let err = inverse_dft(&Spectrum { coefficients, dt: 1.0 }, 0.0).unwrap_err();
        match err {
            Error::NotHermitian { max_imag_residual } => assert!(max_imag_residual > 0.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn non_finite_samples_rejected() {
        assert!(Signal::new(vec![0.0, f64::NAN], 1.0, 0.0).is_err());
        assert!(Signal::new(vec![0.0, f64::INFINITY], 1.0, 0.0).is_err());
        assert!(Signal::new(vec![0.0], 1.0, 0.0).is_err());
        assert!(Signal::new(vec![0.0, 1.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn omega_layout() {
        let g = Grid::new(8, 0.5).unwrap();
        let w = 2.0 * PI / 4.0;
        assert_eq!(g.omega(0), 0.0);
        assert!((g.omega(1) - w).abs() < 1e-15);
        assert!((g.omega(4) - 4.0 * w).abs() < 1e-15);
        assert!((g.omega(5) + 3.0 * w).abs() < 1e-15);
        assert!((g.omega(7) + w).abs() < 1e-15);
    }

    #[test]
    fn huge_snr_leaves_signal_unchanged() {
        let s = Signal::new(lcg_signal(256, 9), 1.0, 0.0).unwrap();
        let out = add_noise(&s, &NoiseModel::new(1e12, 1).unwrap(), 1.0).unwrap();
        for (a, b) in s.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_standard_deviation() {
        let n = 100_000;
        let s = Signal::zeros(n, 1.0, 0.0).unwrap();
        let out = add_noise(&s, &NoiseModel::new(100.0, 42).unwrap(), 1.0).unwrap();
        let mean = out.samples().iter().sum::<f64>() / n as f64;
        let var = out.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!((0.0095..=0.0105).contains(&std), "std = {std}");
        assert!(mean.abs() < 4.0 * 0.01 / (n as f64).sqrt(), "mean = {mean}");
    }

    #[test]
    fn noise_is_deterministic() {
        let s = Signal::zeros(1000, 1.0, 0.0).unwrap();
        let nm = NoiseModel::new(30.0, 1234).unwrap();
        let a = add_noise(&s, &nm, 2.0).unwrap();
        let b = add_noise(&s, &nm, 2.0).unwrap();
        assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = add_noise(&s, &NoiseModel::new(30.0, 1235).unwrap(), 2.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn snr_must_exceed_one() {
        assert!(NoiseModel::new(1.0, 0).is_err());
        assert!(NoiseModel::new(0.5, 0).is_err());
        assert!(NoiseModel::new(f64::NAN, 0).is_err());
    }

    #[test]
    fn snr_estimate_zero_noise_window() {
        let mut x = vec![0.0; 128];
        x[100] = 1.0;
        let s = Signal::new(x, 1.0, 0.0).unwrap();
        let err = estimate_snr(&s, 0..64, 64..128).unwrap_err();
        assert!(matches!(err, Error::ZeroNoiseFloor));
        assert_eq!(err.to_string(), "noise floor below machine epsilon");
    }

    #[test]
    fn snr_estimate_recovers_injected_level() {
        let n = 4096;
        let mut x = vec![0.0; n];
        x[3000] = 1.0;
        let clean = Signal::new(x, 1.0, 0.0).unwrap();
        let noisy = add_noise(&clean, &NoiseModel::new(100.0, 5).unwrap(), 1.0).unwrap();
        let est = estimate_snr(&noisy, 0..2048, 2900..3100).unwrap();
        assert!((80.0..=125.0).contains(&est), "estimate {est}");
        let scaled = noisy.scaled(7.0).unwrap();
        let est7 = estimate_snr(&scaled, 0..2048, 2900..3100).unwrap();
        assert!(((est7 - est) / est).abs() < 1e-12);
    }

    #[test]
    fn snr_window_validation() {
        let s = Signal::new(lcg_signal(256, 1), 1.0, 0.0).unwrap();
        assert!(estimate_snr(&s, 0..64, 32..128).is_err());
        assert!(estimate_snr(&s, 0..8, 64..128).is_err());
        assert!(estimate_snr(&s, 0..64, 200..300).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        for (dt, t0) in [(1.0e-9, 0.0), (1.0e-9 / 3.0, 2.5e-7), (0.1, -3.0)] {
            let s = Signal::new(lcg_signal(50, 11), dt, t0).unwrap();
            let text = s.to_csv_string();
            let back = parse_signal_csv(&text).unwrap();
            assert_eq!(back.to_csv_string(), text);
            assert_eq!(back.t0().to_bits(), s.t0().to_bits());
            assert!(((back.dt() - dt) / dt).abs() < 1e-12);
            assert!(back.samples().iter().zip(s.samples()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        let s = Signal::new(lcg_signal(50, 12), 1.0e-9, 0.0).unwrap();
        assert_eq!(parse_signal_csv(&s.to_csv_string()).unwrap(), s);
    }

    #[test]
    fn csv_rejects_bad_header_and_rows() {
        assert!(parse_signal_csv("time,p\n0,1\n1,2\n").is_err());
        assert!(parse_signal_csv("t,p\n0,1\n1\n").is_err());
        assert!(parse_signal_csv("t,p\n0,1\n1,2\n5,3\n").is_err());
    }

    #[test]
    fn normalized_has_unit_max() {
        let s = Signal::new(vec![0.5, 5.0, -2.0], 1.0, 0.0).unwrap();
        assert_eq!(s.normalized().unwrap().max(), 1.0);
        assert!(Signal::zeros(4, 1.0, 0.0).unwrap().normalized().is_err());
    }
}
