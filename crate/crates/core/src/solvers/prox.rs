use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::ForwardOperator;
use crate::signal::{DftPlan, Signal};

use super::NONNEG_SLACK;

/// Prox of `θ‖·‖₁ + ι{· ≥ 0}`: `max(x_i − θ, 0)` elementwise.
pub fn prox_sparse_nonneg(x: &[f64], theta: f64) -> Vec<f64> {
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Exact prox of `½‖M·x − p‖²` with step `τ`, solved per DFT bin:
///
/// `x̂_j = (ẑ_j + τ·conj(m_j)·p̂_j) / (1 + τ·|m_j|²)`.
///
/// The data-dependent numerator and the denominators are cached so each call
/// costs one forward and one inverse FFT.
#[derive(Debug, Clone)]
pub struct FidelityProx {
    plan: DftPlan,
    tau: f64,
    weighted_data: Vec<Complex64>,
    inv_denominator: Vec<f64>,
}

impl FidelityProx {
    pub fn new(op: &ForwardOperator, p: &Signal, tau: f64) -> Result<Self> {
        op.check_grid(p)?;
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("tau must be >= 0, got {tau}")));
        }
        let plan = op.plan().clone();
        let p_hat = plan.analyze(p.samples());
        let weighted_data = op
            .multipliers()
            .iter()
            .zip(&p_hat)
            .map(|(m, ph)| m.conj() * ph * tau)
            .collect();
        let inv_denominator = op
            .multipliers()
            .iter()
            .map(|m| 1.0 / (1.0 + tau * m.norm_sqr()))
            .collect();
        Ok(FidelityProx {
            plan,
            tau,
            weighted_data,
            inv_denominator,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.plan.len() {
            return Err(Error::GridMismatch(format!(
                "prox input has {} samples, operator {}",
                z.len(),
                self.plan.len()
            )));
        }
        let mut spec = self.plan.analyze(z);
        let mut scale = 0.0;
        for ((c, w), d) in spec.iter_mut().zip(&self.weighted_data).zip(&self.inv_denominator) {
            scale += (c.norm() + w.norm()) * d;
            *c = (*c + w) * d;
        }
        scale /= spec.len() as f64;
        self.plan
            .synthesize_real_scaled(spec, crate::operator::REAL_OUTPUT_TOL, scale)
    }
}

/// One-shot form of [`FidelityProx::apply`].
pub fn prox_fidelity(op: &ForwardOperator, p: &Signal, z: &[f64], tau: f64) -> Result<Vec<f64>> {
    FidelityProx::new(op, p, tau)?.apply(z)
}

pub(crate) fn is_nonneg(x: &[f64]) -> bool {
    x.iter().all(|v| *v >= -NONNEG_SLACK)
}
