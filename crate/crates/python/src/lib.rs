//! Python bindings. Signals cross the boundary as lists of floats plus a sample interval.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pa_superres::attenuation::{self, Dispersion};
use pa_superres::resolution::{self, SeparabilityCriteria};
use pa_superres::signal::{self, Grid, NoiseModel, Signal, Spectrum};
use pa_superres::solvers;
use pa_superres::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(format!("[{}] {}", other.kind(), other)),
    }
}

fn signal(samples: Vec<f64>, dt: f64) -> PyResult<Signal> {
    Signal::new(samples, dt, 0.0).map_err(to_py)
}

/// Power-law attenuation `alpha(w) = alpha0 |w|^y` with optional causal dispersion.
#[pyclass(name = "AttenuationLaw", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLaw {
    inner: attenuation::AttenuationLaw,
}

#[pymethods]
impl PyLaw {
    #[new]
    #[pyo3(signature = (alpha_db_cm_mhz_y, y, c0, f_ref_hz = attenuation::DEFAULT_F_REF_HZ, dispersion = true))]
    fn new(alpha_db_cm_mhz_y: f64, y: f64, c0: f64, f_ref_hz: f64, dispersion: bool) -> PyResult<Self> {
        let d = if dispersion { Dispersion::On } else { Dispersion::Off };
        attenuation::AttenuationLaw::from_db_cm_mhz_y(alpha_db_cm_mhz_y, y, c0, f_ref_hz, d)
            .map(|inner| PyLaw { inner })
            .map_err(to_py)
    }

    /// Prefactor in Np/m/(rad/s)^y.
    #[getter]
    fn alpha0(&self) -> f64 {
        self.inner.alpha0()
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.exponent()
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0()
    }

    fn attenuation(&self, omega: f64) -> f64 {
        attenuation::attenuation_coefficient(&self.inner, omega)
    }

    fn phase_velocity(&self, omega: f64) -> PyResult<f64> {
        attenuation::phase_velocity(&self.inner, omega).map_err(to_py)
    }

    fn gamma(&self, omega: f64) -> PyResult<Complex64> {
        attenuation::gamma(&self.inner, omega).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "AttenuationLaw(alpha0={:e}, y={}, c0={}, dispersion={:?})",
            self.inner.alpha0(),
            self.inner.exponent(),
            self.inner.c0(),
            self.inner.dispersion()
        )
    }
}

/// Attenuation operator `M_r` on an `n`-sample grid with interval `dt`.
#[pyclass(name = "ForwardOperator", frozen, skip_from_py_object)]
struct PyOperator {
    inner: pa_superres::ForwardOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (law, r, n, dt, ir = None))]
    fn new(law: &PyLaw, r: f64, n: usize, dt: f64, ir: Option<Vec<f64>>) -> PyResult<Self> {
        let grid = Grid::new(n, dt).map_err(to_py)?;
        let ir = ir.map(|v| signal(v, dt)).transpose()?;
        pa_superres::ForwardOperator::build(&law.inner, r, grid, ir.as_ref())
            .map(|inner| PyOperator { inner })
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.grid().n
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.grid().dt
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let s = signal(x, self.dt())?;
        Ok(self.inner.apply(&s).map_err(to_py)?.into_samples())
    }

    fn apply_adjoint(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let s = signal(x, self.dt())?;
        Ok(self.inner.apply_adjoint(&s).map_err(to_py)?.into_samples())
    }

    /// `(omega, sigma)` pairs sorted by `|omega|`.
    fn singular_values(&self) -> Vec<(f64, f64)> {
        self.inner.singular_values()
    }

    fn multipliers(&self) -> Vec<Complex64> {
        self.inner.multipliers().to_vec()
    }
}

#[pyfunction]
fn cutoff_frequency<'py>(py: Python<'py>, law: &PyLaw, r: f64, snr: f64) -> PyResult<Bound<'py, PyDict>> {
    let rep = resolution::cutoff_frequency(&law.inner, r, snr).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("omega_cut", rep.omega_cut)?;
    d.set_item("f_cut", rep.f_cut)?;
    d.set_item("snr_used", rep.snr_used)?;
    d.set_item("r", rep.r)?;
    d.set_item("delta_space", rep.delta_space)?;
    d.set_item("delta_time", rep.delta_time)?;
    d.set_item("c_at_cut", rep.c_at_cut)?;
    Ok(d)
}

fn result_dict<'py>(py: Python<'py>, r: solvers::SolverResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("iterations_run", r.iterations_run)?;
    d.set_item("residual_norm_history", r.residual_norm_history)?;
    d.set_item("objective_history", r.objective_history)?;
    d.set_item("fixed_point_residual_history", r.fixed_point_residual_history)?;
    d.set_item("effective_cutoff", r.effective_cutoff)?;
    d.set_item("converged", r.converged)?;
    d.set_item("reconstruction", r.reconstruction.into_samples())?;
    Ok(d)
}

/// Truncated-SVD inverse; either `snr` or `cut_hz` selects the retained bins.
#[pyfunction]
#[pyo3(signature = (op, p, snr = None, cut_hz = None))]
fn tsvd_reconstruct<'py>(
    py: Python<'py>,
    op: &PyOperator,
    p: Vec<f64>,
    snr: Option<f64>,
    cut_hz: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = match (snr, cut_hz) {
        (_, Some(f)) => solvers::TsvdConfig::with_cut(2.0 * std::f64::consts::PI * f),
        (Some(s), None) => solvers::TsvdConfig::new(s),
        (None, None) => return Err(PyValueError::new_err("give snr or cut_hz")),
    }
    .map_err(to_py)?;
    let p = signal(p, op.dt())?;
    result_dict(py, solvers::tsvd_reconstruct(&op.inner, &p, &cfg).map_err(to_py)?)
}

/// Douglas-Rachford reconstruction; `lam` and `tau` default to the built-in heuristics.
#[pyfunction]
#[pyo3(signature = (op, p, iters = 200, lam = None, tau = None, relaxation = 1.0, tol = solvers::DEFAULT_TOL))]
fn dr_reconstruct<'py>(
    py: Python<'py>,
    op: &PyOperator,
    p: Vec<f64>,
    iters: usize,
    lam: Option<f64>,
    tau: Option<f64>,
    relaxation: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let p = signal(p, op.dt())?;
    let base = solvers::DrConfig::defaults_for(&op.inner, &p, iters).map_err(to_py)?;
    let cfg = solvers::DrConfig {
        lambda: lam.unwrap_or(base.lambda),
        tau: tau.unwrap_or(base.tau),
        relaxation,
        tol,
        ..base
    };
    result_dict(py, solvers::dr_reconstruct(&op.inner, &p, &cfg).map_err(to_py)?)
}

/// Two-source verdict: `(resolved, peak_times, valley_ratio)`.
#[pyfunction]
#[pyo3(signature = (x, dt, detection_threshold = 0.2, valley_threshold = 0.8))]
fn separability(
    x: Vec<f64>,
    dt: f64,
    detection_threshold: f64,
    valley_threshold: f64,
) -> PyResult<(bool, Vec<f64>, Option<f64>)> {
    let criteria = SeparabilityCriteria {
        detection_threshold,
        valley_threshold,
    };
    let v = resolution::separability(&signal(x, dt)?, criteria).map_err(to_py)?;
    Ok((v.resolved, v.peak_positions, v.valley_ratio))
}

#[pyfunction]
fn forward_dft(x: Vec<f64>, dt: f64) -> PyResult<Vec<Complex64>> {
    Ok(signal::forward_dft(&signal(x, dt)?).coefficients)
}

#[pyfunction]
fn inverse_dft(coefficients: Vec<Complex64>, dt: f64) -> PyResult<Vec<f64>> {
    let sp = Spectrum { coefficients, dt };
    Ok(signal::inverse_dft(&sp, 0.0).map_err(to_py)?.into_samples())
}

#[pyfunction]
fn add_noise(x: Vec<f64>, dt: f64, snr: f64, seed: u64, reference_peak: f64) -> PyResult<Vec<f64>> {
    let nm = NoiseModel::new(snr, seed).map_err(to_py)?;
    Ok(signal::add_noise(&signal(x, dt)?, &nm, reference_peak)
        .map_err(to_py)?
        .into_samples())
}

#[pymodule]
fn pa_superres_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLaw>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(cutoff_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(tsvd_reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(dr_reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(separability, m)?)?;
    m.add_function(wrap_pyfunction!(forward_dft, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_dft, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    Ok(())
}
