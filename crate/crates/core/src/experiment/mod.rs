//! Experiment harness: config, phantoms, forward simulation, the two-source
//! resolution benchmark and plot data.

pub mod benchmark;
pub mod config;
pub mod forward;
pub mod phantom;
pub mod plot;

pub use benchmark::{benchmark_separations, run_benchmark, run_benchmark_at, BenchmarkResult, BenchmarkRow};
pub use config::{ExperimentConfig, LambdaChoice};
pub use forward::{noise_reference, run_forward, run_forward_at, Measurement};
pub use phantom::{generate_phantom, PhantomKind, PhantomSpec};
pub use plot::{emit_plot_data, PlotFiles};
