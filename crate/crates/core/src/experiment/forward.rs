use crate::error::Result;
use crate::signal::{add_noise, forward_dft, NoiseModel, Signal};

use super::config::ExperimentConfig;

#[derive(Debug, Clone)]
pub struct Measurement {
    pub r: f64,
    pub signal: Signal,
}

/// Noise reference for a phantom: its peak spectral magnitude in unitary DFT
/// scaling, `max_j |X_j| / √N`.
///
/// White noise of standard deviation `s` has expected per-bin magnitude
/// `s·√N` in the unnormalized DFT, so with this reference the per-bin SNR of
/// the attenuated signal is `snr·σ_j·|X_j|/max|X|`. For a flat-spectrum source
/// it falls to one exactly where `σ_j = 1/snr`, which is the cut-off frequency.
pub fn noise_reference(phantom: &Signal) -> f64 {
    let spec = forward_dft(phantom);
    let peak = spec.coefficients.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    peak / (phantom.len() as f64).sqrt()
}

/// Seed of the noise stream for distance index `r_index` and realization `repeat`.
/// `seed_from_u64` scrambles it further, so distinct inputs give unrelated streams.
pub fn noise_seed(base: u64, r_index: usize, repeat: usize) -> u64 {
    base.wrapping_add((r_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((repeat as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// One noisy measurement per entry of `cfg.r_list`.
pub fn run_forward(cfg: &ExperimentConfig, phantom: &Signal) -> Result<Vec<Measurement>> {
    run_forward_at(cfg, phantom, &cfg.r_list, 0)
}

/// [`run_forward`] at explicit distances; `r = 0` is allowed and gives the identity operator.
pub fn run_forward_at(cfg: &ExperimentConfig, phantom: &Signal, rs: &[f64], repeat: usize) -> Result<Vec<Measurement>> {
    let reference = noise_reference(phantom);
    rs.iter()
        .enumerate()
        .map(|(k, &r)| {
            let clean = cfg.operator(r)?.apply(phantom)?;
            let noise = NoiseModel::new(cfg.snr, noise_seed(cfg.seed, k, repeat))?;
            Ok(Measurement {
                r,
                signal: add_noise(&clean, &noise, reference)?,
            })
        })
        .collect()
}
