use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::attenuation::{AttenuationLaw, Dispersion, DEFAULT_F_REF_HZ};
use crate::error::{Error, Result};
use crate::operator::ForwardOperator;
use crate::resolution::{SeparabilityCriteria, DEFAULT_DETECTION_THRESHOLD, DEFAULT_VALLEY_THRESHOLD};
use crate::signal::{Grid, Signal};
use crate::solvers::{default_lambda, default_tau, DrConfig, DEFAULT_LAMBDA_FACTOR};

use super::phantom::{PhantomKind, PhantomSpec};

/// Largest tolerated fraction of kernel energy that wraps around the grid.
pub const MAX_WRAPAROUND: f64 = 1e-8;

/// How the DR L1 weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    /// `factor·‖Mᵀp‖_∞`, evaluated per measurement.
    Factor(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsvdSettings {
    /// Truncation level; the experiment SNR when absent.
    pub snr: Option<f64>,
    pub explicit_cut_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrSettings {
    pub lambda: LambdaChoice,
    /// `1/σ_max²` when absent.
    pub tau: Option<f64>,
    pub relaxation: f64,
    pub tol: f64,
    /// Iteration counts compared by the benchmark; the last is the headline run.
    pub iterations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSettings {
    /// Separations as multiples of the linear resolution limit at the largest `r`.
    pub separation_factors: Vec<f64>,
    /// Midpoint of the source pair, s. Grid centre when absent.
    pub center: Option<f64>,
    pub criteria: SeparabilityCriteria,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: Grid,
    pub law: AttenuationLaw,
    pub r_list: Vec<f64>,
    pub snr: f64,
    pub seed: u64,
    /// Transducer impulse response on the experiment grid.
    pub ir: Option<Signal>,
    pub phantom: PhantomSpec,
    pub tsvd: TsvdSettings,
    pub dr: DrSettings,
    pub benchmark: BenchmarkSettings,
    pub output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    law: RawLaw,
    experiment: RawExperiment,
    phantom: RawPhantom,
    #[serde(default)]
    tsvd: RawTsvd,
    #[serde(default)]
    dr: RawDr,
    #[serde(default)]
    benchmark: RawBenchmark,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
    dt: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaw {
    alpha0_db_cm_mhz_y: f64,
    exponent_y: f64,
    c0_m_s: f64,
    #[serde(default = "default_f_ref")]
    f_ref_hz: f64,
    #[serde(default = "default_dispersion")]
    dispersion: Dispersion,
}

fn default_f_ref() -> f64 {
    DEFAULT_F_REF_HZ
}

fn default_dispersion() -> Dispersion {
    Dispersion::On
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    r_list: Vec<f64>,
    snr: f64,
    #[serde(default)]
    seed: u64,
    ir_file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhantom {
    kind: PhantomKind,
    #[serde(default)]
    positions: Vec<f64>,
    #[serde(default)]
    amplitudes: Vec<f64>,
    smoothing_width: Option<f64>,
    file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTsvd {
    snr: Option<f64>,
    explicit_cut_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDr {
    lambda: Option<f64>,
    lambda_factor: Option<f64>,
    tau: Option<f64>,
    #[serde(default = "one")]
    relaxation: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_iterations")]
    iterations: Vec<usize>,
}

fn one() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    crate::solvers::DEFAULT_TOL
}

fn default_iterations() -> Vec<usize> {
    vec![20, 200]
}

impl Default for RawDr {
    fn default() -> Self {
        RawDr {
            lambda: None,
            lambda_factor: None,
            tau: None,
            relaxation: 1.0,
            tol: default_tol(),
            iterations: default_iterations(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBenchmark {
    #[serde(default = "default_factors")]
    separation_factors: Vec<f64>,
    center: Option<f64>,
    #[serde(default = "default_detection")]
    detection_threshold: f64,
    #[serde(default = "default_valley")]
    valley_threshold: f64,
}

fn default_factors() -> Vec<f64> {
    vec![0.4, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0]
}

fn default_detection() -> f64 {
    DEFAULT_DETECTION_THRESHOLD
}

fn default_valley() -> f64 {
    DEFAULT_VALLEY_THRESHOLD
}

impl Default for RawBenchmark {
    fn default() -> Self {
        RawBenchmark {
            separation_factors: default_factors(),
            center: None,
            detection_threshold: default_detection(),
            valley_threshold: default_valley(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads and validates a config file. Relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, path, &base)
    }

    /// Parses config text; `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let grid = Grid::new(raw.grid.n, raw.grid.dt).map_err(config_err)?;
        let law = AttenuationLaw::from_db_cm_mhz_y(
            raw.law.alpha0_db_cm_mhz_y,
            raw.law.exponent_y,
            raw.law.c0_m_s,
            raw.law.f_ref_hz,
            raw.law.dispersion,
        )
        .map_err(config_err)?;

        let ir = match raw.experiment.ir_file {
            None => None,
            Some(p) => Some(Signal::read_csv(resolve(p))?),
        };

        let phantom = PhantomSpec {
            kind: raw.phantom.kind,
            positions: raw.phantom.positions,
            amplitudes: raw.phantom.amplitudes,
            smoothing_width: raw.phantom.smoothing_width,
            file: raw.phantom.file.map(resolve),
        };

        let lambda = match (raw.dr.lambda, raw.dr.lambda_factor) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("[dr] takes either lambda or lambda_factor, not both".into()))
            }
            (Some(l), None) => LambdaChoice::Fixed(l),
            (None, f) => LambdaChoice::Factor(f.unwrap_or(DEFAULT_LAMBDA_FACTOR)),
        };

        let cfg = ExperimentConfig {
            grid,
            law,
            r_list: raw.experiment.r_list,
            snr: raw.experiment.snr,
            seed: raw.experiment.seed,
            ir,
            phantom,
            tsvd: TsvdSettings {
                snr: raw.tsvd.snr,
                explicit_cut_hz: raw.tsvd.explicit_cut_hz,
            },
            dr: DrSettings {
                lambda,
                tau: raw.dr.tau,
                relaxation: raw.dr.relaxation,
                tol: raw.dr.tol,
                iterations: raw.dr.iterations,
            },
            benchmark: BenchmarkSettings {
                separation_factors: raw.benchmark.separation_factors,
                center: raw.benchmark.center,
                criteria: SeparabilityCriteria {
                    detection_threshold: raw.benchmark.detection_threshold,
                    valley_threshold: raw.benchmark.valley_threshold,
                },
            },
            output_dir: raw.output.dir.map(resolve).unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant, including the circular wrap-around bound.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.r_list.is_empty() {
            return bad("r_list must not be empty".into());
        }
        if let Some(r) = self.r_list.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return bad(format!("every r must be > 0, got {r}"));
        }
        if !(self.snr > 1.0 && self.snr.is_finite()) {
            return bad(format!("snr must exceed 1, got {}", self.snr));
        }
        if let Some(ir) = &self.ir {
            if ir.len() != self.grid.n || ir.dt() != self.grid.dt {
                return bad(format!(
                    "impulse response has N={}, dt={:e}; grid has N={}, dt={:e}",
                    ir.len(),
                    ir.dt(),
                    self.grid.n,
                    self.grid.dt
                ));
            }
        }
        self.phantom.validate().map_err(config_err)?;
        self.tsvd_config().map_err(config_err)?.validate().map_err(config_err)?;
        match self.dr.lambda {
            LambdaChoice::Fixed(l) | LambdaChoice::Factor(l) if !(l >= 0.0 && l.is_finite()) => {
                return bad(format!("lambda must be >= 0, got {l}"))
            }
            _ => {}
        }
        if let Some(t) = self.dr.tau {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tau must be > 0, got {t}"));
            }
        }
        if !(self.dr.relaxation > 0.0 && self.dr.relaxation < 2.0) {
            return bad(format!("relaxation must lie in (0, 2), got {}", self.dr.relaxation));
        }
        if !(self.dr.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.dr.tol));
        }
        if self.dr.iterations.is_empty() || self.dr.iterations.contains(&0) {
            return bad("dr iterations must be a nonempty list of positive counts".into());
        }
        let factors = &self.benchmark.separation_factors;
        if factors.len() < 3 {
            return bad("benchmark needs at least 3 separation factors".into());
        }
        if factors.iter().any(|f| !(*f > 0.0 && f.is_finite())) || factors.windows(2).any(|w| w[1] <= w[0]) {
            return bad("separation factors must be positive and strictly increasing".into());
        }
        if !(factors[0] < 1.0 && factors[factors.len() - 1] > 1.0) {
            return bad("separation factors must span below and above 1".into());
        }
        let c = &self.benchmark.criteria;
        if !(c.detection_threshold > 0.0 && c.detection_threshold < 1.0) {
            return bad(format!("detection_threshold must lie in (0, 1), got {}", c.detection_threshold));
        }
        if !(c.valley_threshold > 0.0 && c.valley_threshold <= 1.0) {
            return bad(format!("valley_threshold must lie in (0, 1], got {}", c.valley_threshold));
        }
        self.check_wraparound()
    }

    pub fn tsvd_config(&self) -> Result<crate::solvers::TsvdConfig> {
        match self.tsvd.explicit_cut_hz {
            Some(f) => crate::solvers::TsvdConfig::with_cut(2.0 * PI * f),
            None => crate::solvers::TsvdConfig::new(self.tsvd.snr.unwrap_or(self.snr)),
        }
    }

    /// DR settings for one measurement; resolves the λ heuristic and the default step.
    pub fn dr_config(&self, op: &ForwardOperator, p: &Signal, max_iters: usize) -> Result<DrConfig> {
        let lambda = match self.dr.lambda {
            LambdaChoice::Fixed(l) => l,
            LambdaChoice::Factor(f) => default_lambda(op, p, f)?,
        };
        let tau = match self.dr.tau {
            Some(t) => t,
            None => default_tau(op)?,
        };
        let cfg = DrConfig {
            lambda,
            tau,
            relaxation: self.dr.relaxation,
            max_iters,
            tol: self.dr.tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn largest_r(&self) -> f64 {
        self.r_list.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn operator(&self, r: f64) -> Result<ForwardOperator> {
        ForwardOperator::build(&self.law, r, self.grid, self.ir.as_ref())
    }

    pub fn benchmark_center(&self) -> f64 {
        self.benchmark
            .center
            .unwrap_or(0.5 * self.grid.n as f64 * self.grid.dt)
    }

    /// Sample indices touched by the phantom and by every benchmark source pair.
    pub fn support(&self) -> Result<std::ops::Range<usize>> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some((a, b)) = self.phantom.time_extent(self.grid)? {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        if let Ok(report) = crate::resolution::cutoff_frequency(&self.law, self.largest_r(), self.snr) {
            let widest = self.benchmark.separation_factors.iter().copied().fold(0.0, f64::max) * report.delta_time;
            let c = self.benchmark_center();
            lo = lo.min(c - 0.5 * widest);
            hi = hi.max(c + 0.5 * widest);
        }
        if !(lo <= hi) {
            return Err(Error::Config("phantom has an empty support".into()));
        }
        let dt = self.grid.dt;
        let last = self.grid.n as f64 - 1.0;
        let a = (lo / dt).floor() - 1.0;
        let b = (hi / dt).ceil() + 1.0;
        if a < 0.0 || b > last {
            return Err(Error::Config(format!(
                "sources span [{lo:e}, {hi:e}] s, outside the grid [0, {:e}] s",
                last * dt
            )));
        }
        Ok(a as usize..b as usize + 1)
    }

    fn check_wraparound(&self) -> Result<()> {
        let support = self.support()?;
        for &r in &self.r_list {
            let frac = self.operator(r)?.wraparound_energy_fraction(support.clone())?;
            if !(frac < MAX_WRAPAROUND) {
                return Err(Error::Config(format!(
                    "wrap-around energy fraction {frac:.3e} at r = {r} m exceeds {MAX_WRAPAROUND:e}; \
                     increase n or dt, or move the sources"
                )));
            }
        }
        Ok(())
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::Parse { .. } => e,
        other => Error::Config(other.to_string()),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
