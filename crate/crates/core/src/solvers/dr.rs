use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::ForwardOperator;
use crate::signal::Signal;

use super::prox::{is_nonneg, prox_sparse_nonneg, FidelityProx};
use super::{l2, objective, SolverResult};

/// `λ = factor·‖Mᵀp‖_∞` when no explicit weight is given.
pub const DEFAULT_LAMBDA_FACTOR: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrConfig {
    /// L1 weight, in signal units.
    pub lambda: f64,
    /// Prox step.
    pub tau: f64,
    /// In (0, 2); 1 is plain Douglas-Rachford.
    pub relaxation: f64,
    pub max_iters: usize,
    /// Relative fixed-point residual at which to stop.
    pub tol: f64,
}

impl DrConfig {
    /// Defaults: `τ = 1/σ_max²`, relaxation 1, tol 1e-8, `λ = 0.05·‖Mᵀp‖_∞`.
    pub fn defaults_for(op: &ForwardOperator, p: &Signal, max_iters: usize) -> Result<Self> {
        let cfg = DrConfig {
            lambda: default_lambda(op, p, DEFAULT_LAMBDA_FACTOR)?,
            tau: default_tau(op)?,
            relaxation: 1.0,
            max_iters,
            tol: DEFAULT_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return bad(format!("relaxation must lie in (0, 2), got {}", self.relaxation));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.tol));
        }
        Ok(())
    }
}

pub fn default_tau(op: &ForwardOperator) -> Result<f64> {
    let s = op.max_singular_value();
    if !(s > 0.0) {
        return Err(Error::InvalidInput("operator has no nonzero singular value".into()));
    }
    Ok(1.0 / (s * s))
}

pub fn default_lambda(op: &ForwardOperator, p: &Signal, factor: f64) -> Result<f64> {
    Ok(factor * op.apply_adjoint(p)?.peak_abs())
}

/// Douglas-Rachford iteration from `z₀ = 0`:
///
/// ```text
/// x_k     = prox_{τ·½‖M·−p‖²}(z_k)
/// y_k     = max(2x_k − z_k − τλ, 0)
/// z_{k+1} = z_k + ρ·(y_k − x_k)
/// ```
///
/// Histories are evaluated at the feasible iterate `y_k`. Stops after
/// `max_iters` or once `‖z_{k+1} − z_k‖ / ‖z_k‖ < tol`; the returned
/// reconstruction is the feasible point of the final `z`.
pub fn dr_reconstruct(op: &ForwardOperator, p: &Signal, cfg: &DrConfig) -> Result<SolverResult> {
    cfg.validate()?;
    op.check_grid(p)?;
    let n = op.grid().n;
    let fidelity = FidelityProx::new(op, p, cfg.tau)?;
    let theta = cfg.tau * cfg.lambda;

    let reflect = |x: &[f64], z: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = x.iter().zip(z).map(|(a, b)| 2.0 * a - b).collect();
        prox_sparse_nonneg(&v, theta)
    };

    let mut z = vec![0.0; n];
    let mut residuals = Vec::with_capacity(cfg.max_iters);
    let mut objectives = Vec::with_capacity(cfg.max_iters);
    let mut fp_residuals = Vec::with_capacity(cfg.max_iters);
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        let x = fidelity.apply(&z)?;
        let y = reflect(&x, &z);

        let mut step_sq = 0.0;
        let z_norm = l2(&z);
        for ((zi, xi), yi) in z.iter_mut().zip(&x).zip(&y) {
            let d = cfg.relaxation * (yi - xi);
            *zi += d;
            step_sq += d * d;
        }
        let step = step_sq.sqrt();

        let (obj, res) = objective(op, p, &p.with_samples(y)?, cfg.lambda)?;
        residuals.push(res);
        objectives.push(obj);
        fp_residuals.push(step);

        if step / z_norm.max(f64::MIN_POSITIVE) < cfg.tol {
            converged = true;
            break;
        }
    }

    let x = fidelity.apply(&z)?;
    let out = reflect(&x, &z);
    debug_assert!(is_nonneg(&out));
    Ok(SolverResult {
        reconstruction: p.with_samples(out)?,
        iterations_run: residuals.len(),
        residual_norm_history: residuals,
        objective_history: objectives,
        fixed_point_residual_history: fp_residuals,
        effective_cutoff: None,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Grid;

    fn identity(n: usize) -> ForwardOperator {
        ForwardOperator::identity(Grid::new(n, 1.0).unwrap()).unwrap()
    }

    fn rand_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        (0..n)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    fn cfg(lambda: f64, max_iters: usize) -> DrConfig {
        DrConfig {
            lambda,
            tau: 1.0,
            relaxation: 1.0,
            max_iters,
            tol: 1e-8,
        }
    }

    #[test]
    fn consistent_nonneg_data_is_a_fixed_point() {
        let p = Signal::new(rand_vec(64, 1).iter().map(|v| v + 0.5).collect(), 1.0, 0.0).unwrap();
        let out = dr_reconstruct(&identity(64), &p, &cfg(0.0, 5)).unwrap();
        assert!(out.iterations_run <= 5);
        for (a, b) in out.reconstruction.samples().iter().zip(p.samples()) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn identity_operator_soft_thresholds() {
        let p = Signal::new(rand_vec(64, 2).iter().map(|v| 3.0 * v).collect(), 1.0, 0.0).unwrap();
        let lambda = 0.4;
        let out = dr_reconstruct(&identity(64), &p, &DrConfig { tol: 1e-14, ..cfg(lambda, 500) }).unwrap();
        for (a, b) in out.reconstruction.samples().iter().zip(p.samples()) {
            assert!((a - (b - lambda).max(0.0)).abs() < 1e-8);
        }
        assert!(out.converged);
    }

    #[test]
    fn histories_have_run_length_and_output_is_nonneg() {
        let p = Signal::new(rand_vec(32, 3), 1.0, 0.0).unwrap();
        let out = dr_reconstruct(&identity(32), &p, &cfg(0.1, 17)).unwrap();
        assert_eq!(out.residual_norm_history.len(), out.iterations_run);
        assert_eq!(out.objective_history.len(), out.iterations_run);
        assert_eq!(out.fixed_point_residual_history.len(), out.iterations_run);
        assert!(out.reconstruction.samples().iter().all(|v| *v >= 0.0));
        assert!(out.objective_history.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = cfg(0.1, 10);
        for bad in [
            DrConfig { lambda: -1.0, ..base },
            DrConfig { tau: 0.0, ..base },
            DrConfig { relaxation: 2.0, ..base },
            DrConfig { relaxation: 0.0, ..base },
            DrConfig { max_iters: 0, ..base },
            DrConfig { tol: -1.0, ..base },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn defaults_follow_operator() {
        let op = identity(16);
        let p = Signal::new(rand_vec(16, 4), 1.0, 0.0).unwrap();
        let c = DrConfig::defaults_for(&op, &p, 20).unwrap();
        assert_eq!(c.tau, 1.0);
        assert!((c.lambda - 0.05 * p.peak_abs()).abs() < 1e-15);
        assert_eq!(c.relaxation, 1.0);
        assert_eq!(c.tol, 1e-8);
    }
}
