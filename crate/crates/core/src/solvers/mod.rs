//! Attenuation-compensating reconstructions of `p = M·p_ideal`.
//!
//! * [`tsvd_reconstruct`]: truncated SVD in the Fourier basis, a linear method.
//! * [`dr_reconstruct`]: Douglas-Rachford splitting for
//!   `½‖Mx − p‖² + λ‖x‖₁ + ι{x ≥ 0}`, a nonlinear method.

mod dr;
mod prox;
mod tsvd;

pub use dr::{default_lambda, default_tau, dr_reconstruct, DrConfig, DEFAULT_LAMBDA_FACTOR, DEFAULT_TOL};
pub use prox::{prox_fidelity, prox_sparse_nonneg, FidelityProx};
pub use tsvd::{tsvd_reconstruct, TsvdConfig};

use serde::Serialize;

use crate::error::Result;
use crate::operator::ForwardOperator;
use crate::signal::Signal;

/// Entries below this count as violating the non-negativity constraint.
pub const NONNEG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub reconstruction: Signal,
    pub iterations_run: usize,
    /// `‖M x_k − p‖₂` per iteration.
    pub residual_norm_history: Vec<f64>,
    /// `½‖M x_k − p‖² + λ‖x_k‖₁`, or `+∞` when `x_k` is infeasible.
    pub objective_history: Vec<f64>,
    /// `‖z_{k+1} − z_k‖₂` per iteration (zero for direct methods).
    pub fixed_point_residual_history: Vec<f64>,
    /// Largest retained `|ω|` for truncated reconstructions, rad/s.
    pub effective_cutoff: Option<f64>,
    /// Whether an iterative method stopped on its tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRow {
    pub iter: usize,
    pub residual: f64,
    pub objective: f64,
    pub fp_residual: f64,
}

impl SolverResult {
    pub fn diagnostics(&self) -> Vec<DiagnosticRow> {
        (0..self.iterations_run)
            .map(|k| DiagnosticRow {
                iter: k + 1,
                residual: self.residual_norm_history[k],
                objective: self.objective_history[k],
                fp_residual: self.fixed_point_residual_history[k],
            })
            .collect()
    }

    /// `iter,residual,objective,fp_residual` CSV.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("iter,residual,objective,fp_residual\n");
        for row in self.diagnostics() {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                row.iter, row.residual, row.objective, row.fp_residual
            ));
        }
        out
    }
}

pub(crate) fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `½‖Mx − p‖² + λ‖x‖₁ + ι{x ≥ 0}` and the residual norm `‖Mx − p‖`.
pub fn objective(op: &ForwardOperator, p: &Signal, x: &Signal, lambda: f64) -> Result<(f64, f64)> {
    let mx = op.apply(x)?;
    let residual: Vec<f64> = mx.samples().iter().zip(p.samples()).map(|(a, b)| a - b).collect();
    let rn = l2(&residual);
    let obj = if x.samples().iter().any(|v| *v < -NONNEG_SLACK) {
        f64::INFINITY
    } else {
        0.5 * rn * rn + lambda * x.samples().iter().map(|v| v.abs()).sum::<f64>()
    };
    Ok((obj, rn))
}
