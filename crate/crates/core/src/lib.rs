//! Attenuation compensation and resolution analysis for 1D photoacoustic signals.
//!
//! The crate models power-law acoustic attenuation as a diagonal operator in the
//! Fourier basis, derives the noise-limited cut-off frequency and the matching
//! linear resolution limit, and inverts the attenuation with two reconstructions:
//! truncated SVD (linear) and Douglas-Rachford splitting with non-negativity and
//! an L1 sparsity penalty (nonlinear).
//!
//! ```
//! use pa_superres::attenuation::{AttenuationLaw, Dispersion};
//! use pa_superres::resolution::cutoff_frequency;
//!
//! let law = AttenuationLaw::from_db_cm_mhz_y(0.5, 1.5, 1540.0, 1.0e6, Dispersion::On).unwrap();
//! let report = cutoff_frequency(&law, 0.02, 100.0).unwrap();
//! assert!(report.f_cut > 1.0e6);
//! ```

pub mod attenuation;
pub mod error;
pub mod experiment;
pub mod operator;
pub mod resolution;
pub mod signal;
pub mod solvers;

pub use attenuation::{AttenuationLaw, Dispersion};
pub use error::{Error, Result};
pub use operator::ForwardOperator;
pub use resolution::{cutoff_frequency, ResolutionReport, SeparabilityVerdict};
pub use signal::{NoiseModel, Signal, Spectrum};
pub use solvers::{dr_reconstruct, tsvd_reconstruct, DrConfig, SolverResult, TsvdConfig};
