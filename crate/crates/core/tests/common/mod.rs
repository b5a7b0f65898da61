#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use pa_superres::attenuation::{AttenuationLaw, Dispersion};
use pa_superres::signal::Signal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn default_config_path() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml"))
}

pub fn fat(dispersion: Dispersion) -> AttenuationLaw {
    AttenuationLaw::from_db_cm_mhz_y(0.4942081816217317, 1.543241168958696, 1540.0, 1.0e6, dispersion).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_signal(rng: &mut ChaCha8Rng, n: usize, dt: f64) -> Signal {
    Signal::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), dt, 0.0).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
