//! Reference implementations that share no code path with the crate's FFT-diagonal routines.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Kernel `h[k] = (1/N) Σ_j m_j e^{-2πijk/N}` by direct summation; returns (real part, max |imag|).
pub fn naive_kernel(multipliers: &[Complex64]) -> (Vec<f64>, f64) {
    let n = multipliers.len();
    let mut re = vec![0.0; n];
    let mut worst_im: f64 = 0.0;
    for (k, out) in re.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, m) in multipliers.iter().enumerate() {
            let phase = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
            acc += m * Complex64::from_polar(1.0, phase);
        }
        acc /= n as f64;
        *out = acc.re;
        worst_im = worst_im.max(acc.im.abs());
    }
    (re, worst_im)
}

/// Circulant matrix `M[i][k] = h[(i − k) mod N]`.
pub fn circulant(h: &[f64]) -> DMatrix<f64> {
    let n = h.len();
    DMatrix::from_fn(n, n, |i, k| h[(i + n - k) % n])
}

pub fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).as_slice().to_vec()
}

/// `x = Σ_{σ_i ≥ 1/snr} v_i (u_iᵀ p) / σ_i` from a dense SVD.
pub fn textbook_tsvd(m: &DMatrix<f64>, p: &[f64], snr: f64) -> Vec<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let p = DVector::from_column_slice(p);
    let mut x = DVector::zeros(m.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s >= 1.0 / snr {
            let coef = u.column(i).dot(&p) / s;
            x += vt.row(i).transpose() * coef;
        }
    }
    x.as_slice().to_vec()
}

pub fn dense_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(f64::total_cmp);
    s
}

/// Projected (proximal) gradient for `½‖Mx − p‖² + λ‖x‖₁ + ι{x ≥ 0}` with step `1/‖M‖²`.
pub fn projected_gradient(m: &DMatrix<f64>, p: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
    let norm = m.singular_values().max();
    let step = 1.0 / (norm * norm);
    let mt = m.transpose();
    let p = DVector::from_column_slice(p);
    let mut x = DVector::zeros(m.ncols());
    for _ in 0..iters {
        let grad = &mt * (m * &x - &p);
        x = (&x - grad * step).map(|v| (v - step * lambda).max(0.0));
    }
    x.as_slice().to_vec()
}

pub fn dense_objective(m: &DMatrix<f64>, p: &[f64], x: &[f64], lambda: f64) -> f64 {
    let r = m * DVector::from_column_slice(x) - DVector::from_column_slice(p);
    0.5 * r.norm_squared() + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}
