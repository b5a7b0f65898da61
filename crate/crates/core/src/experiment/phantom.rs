use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Grid, Signal};

/// Gaussian tails are kept out to this many standard deviations.
const GAUSS_REACH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKind {
    SingleDelta,
    TwoDelta,
    FromFile,
}

/// Ideal initial-pressure profile `p_ideal`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    /// Source times, s.
    pub positions: Vec<f64>,
    /// Source areas, non-negative.
    pub amplitudes: Vec<f64>,
    /// Gaussian standard deviation, s; sources are unit-area impulses without it.
    pub smoothing_width: Option<f64>,
    pub file: Option<PathBuf>,
}

impl PhantomSpec {
    pub fn single(position: f64, amplitude: f64) -> Self {
        PhantomSpec {
            kind: PhantomKind::SingleDelta,
            positions: vec![position],
            amplitudes: vec![amplitude],
            smoothing_width: None,
            file: None,
        }
    }

    pub fn pair(a: f64, b: f64, amplitude: f64) -> Self {
        PhantomSpec {
            kind: PhantomKind::TwoDelta,
            positions: vec![a, b],
            amplitudes: vec![amplitude, amplitude],
            smoothing_width: None,
            file: None,
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Self {
        PhantomSpec {
            kind: PhantomKind::FromFile,
            positions: Vec::new(),
            amplitudes: Vec::new(),
            smoothing_width: None,
            file: Some(path.into()),
        }
    }

    pub fn with_smoothing(mut self, width: f64) -> Self {
        self.smoothing_width = Some(width);
        self
    }

    /// Shape checks that do not need the grid.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        let expected = match self.kind {
            PhantomKind::SingleDelta => 1,
            PhantomKind::TwoDelta => 2,
            PhantomKind::FromFile => {
                if self.file.is_none() {
                    return bad("from-file phantom needs a file".into());
                }
                return Ok(());
            }
        };
        if self.positions.len() != expected || self.amplitudes.len() != expected {
            return bad(format!(
                "{:?} phantom needs {expected} positions and amplitudes, got {} and {}",
                self.kind,
                self.positions.len(),
                self.amplitudes.len()
            ));
        }
        if let Some(a) = self.amplitudes.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return bad(format!("amplitudes must be >= 0, got {a}"));
        }
        if let Some(p) = self.positions.iter().find(|p| !p.is_finite()) {
            return bad(format!("position {p} is not finite"));
        }
        if let Some(w) = self.smoothing_width {
            if !(w > 0.0 && w.is_finite()) {
                return bad(format!("smoothing width must be > 0, got {w}"));
            }
        }
        Ok(())
    }

    /// Time span occupied by the sources, or `None` for an all-zero file.
    pub fn time_extent(&self, grid: Grid) -> Result<Option<(f64, f64)>> {
        if self.kind == PhantomKind::FromFile {
            let s = generate_phantom(self, grid)?;
            let nz: Vec<usize> = (0..s.len()).filter(|&i| s.samples()[i] != 0.0).collect();
            return Ok(nz.first().map(|&a| (s.time(a), s.time(*nz.last().unwrap()))));
        }
        let reach = self.smoothing_width.map_or(0.0, |w| GAUSS_REACH * w);
        let lo = self.positions.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Some((lo - reach, hi + reach)))
    }
}

/// Samples the phantom on `grid` (starting at t = 0).
///
/// Impulses land on the nearest grid point with value `amplitude/dt`, so each has
/// unit area per unit amplitude. With a smoothing width the impulse becomes a
/// normalized Gaussian centred at the exact position.
pub fn generate_phantom(spec: &PhantomSpec, grid: Grid) -> Result<Signal> {
    spec.validate()?;
    let Grid { n, dt } = grid;
    if spec.kind == PhantomKind::FromFile {
        let path = spec.file.as_ref().expect("validated");
        let s = Signal::read_csv(path)?;
        if s.len() != n || s.dt() != dt {
            return Err(Error::GridMismatch(format!(
                "{}: N={}, dt={:e}; grid N={n}, dt={dt:e}",
                path.display(),
                s.len(),
                s.dt()
            )));
        }
        if let Some(v) = s.samples().iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidInput(format!("{}: negative sample {v}", path.display())));
        }
        return Signal::new(s.into_samples(), dt, 0.0);
    }

    let t_last = (n - 1) as f64 * dt;
    for p in &spec.positions {
        if !(*p >= 0.0 && *p <= t_last) {
            return Err(Error::InvalidInput(format!(
                "source at {p:e} s lies outside the grid [0, {t_last:e}] s"
            )));
        }
    }

    let mut x = vec![0.0; n];
    match spec.smoothing_width {
        None => {
            let mut taken: Vec<(usize, f64)> = Vec::new();
            for (p, a) in spec.positions.iter().zip(&spec.amplitudes) {
                // slack so that a spacing of exactly one sample survives round-off in p, q
                if let Some((_, q)) = taken.iter().find(|(_, q)| (p - q).abs() < dt * (1.0 - 1e-9)) {
                    return Err(Error::InvalidInput(format!(
                        "sources at {q:e} s and {p:e} s are closer than one sample ({dt:e} s)"
                    )));
                }
                let i = (p / dt).round() as usize;
                if let Some((j, q)) = taken.iter().find(|(j, _)| *j == i) {
                    return Err(Error::InvalidInput(format!(
                        "sources at {q:e} s and {p:e} s both round to sample {j}"
                    )));
                }
                taken.push((i, *p));
                x[i] += a / dt;
            }
        }
        Some(w) => {
            if w < dt {
                return Err(Error::InvalidInput(format!(
                    "smoothing width {w:e} s is below the sample spacing {dt:e} s"
                )));
            }
            for p in &spec.positions {
                if p - GAUSS_REACH * w < 0.0 || p + GAUSS_REACH * w > t_last {
                    return Err(Error::InvalidInput(format!(
                        "Gaussian source at {p:e} s (width {w:e} s) is cut off by the grid edge"
                    )));
                }
            }
            let norm = 1.0 / (w * (2.0 * PI).sqrt());
            for (i, xi) in x.iter_mut().enumerate() {
                let t = i as f64 * dt;
                for (p, a) in spec.positions.iter().zip(&spec.amplitudes) {
                    let u = (t - p) / w;
                    *xi += a * norm * (-0.5 * u * u).exp();
                }
            }
        }
    }
    Signal::new(x, dt, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(1000, 2e-9).unwrap()
    }

    #[test]
    fn single_delta_has_unit_area() {
        let s = generate_phantom(&PhantomSpec::single(1e-6, 1.0), grid()).unwrap();
        let nz: Vec<_> = s.samples().iter().filter(|v| **v != 0.0).collect();
        assert_eq!(nz, vec![&(1.0 / 2e-9)]);
        assert_eq!(s.argmax(), 500);
    }

    #[test]
    fn collision_rejected() {
        let err = generate_phantom(&PhantomSpec::pair(1e-6, 1e-6 + 1e-9, 1.0), grid()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(generate_phantom(&PhantomSpec::pair(1e-6, 1e-6 + 2e-9, 1.0), grid()).is_ok());
    }

    #[test]
    fn gaussian_integrates_to_amplitude() {
        let spec = PhantomSpec::single(1e-6, 0.7).with_smoothing(5e-9);
        let s = generate_phantom(&spec, grid()).unwrap();
        let x = s.samples();
        let trap = s.dt() * (x.iter().sum::<f64>() - 0.5 * (x[0] + x[x.len() - 1]));
        assert!((trap - 0.7).abs() < 1e-6, "{trap}");
        assert!(x.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_phantom(&PhantomSpec::single(-1e-9, 1.0), grid()).is_err());
        assert!(generate_phantom(&PhantomSpec::single(2e-6, 1.0), grid()).is_err());
        assert!(generate_phantom(&PhantomSpec::single(1e-6, -1.0), grid()).is_err());
        assert!(generate_phantom(&PhantomSpec::single(1e-6, 1.0).with_smoothing(1e-9), grid()).is_err());
        assert!(generate_phantom(&PhantomSpec::single(1e-8, 1.0).with_smoothing(5e-9), grid()).is_err());
        let mut wrong = PhantomSpec::pair(1e-6, 1.2e-6, 1.0);
        wrong.kind = PhantomKind::SingleDelta;
        assert!(generate_phantom(&wrong, grid()).is_err());
    }

    #[test]
    fn from_file_checks_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let mut x = vec![0.0; 1000];
        x[10] = 3.0;
        Signal::new(x, 2e-9, 0.0).unwrap().write_csv(&path).unwrap();
        let s = generate_phantom(&PhantomSpec::from_file(&path), grid()).unwrap();
        assert_eq!(s.samples()[10], 3.0);
        assert!(generate_phantom(&PhantomSpec::from_file(&path), Grid::new(999, 2e-9).unwrap()).is_err());
    }
}
