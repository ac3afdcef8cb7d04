//! Small dense helpers on top of nalgebra.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};

const SCHUR_MAX_ITER: usize = 10_000;

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `sigma_min / sigma_max`; zero for an all-zero matrix.
pub fn reciprocal_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Largest eigenvalue modulus of a square matrix.
///
/// The real Schur iteration can stall on companion matrices with long
/// nilpotent shift chains; the transpose (same spectrum) usually converges
/// when the original does not. As a last resort the radius is estimated by
/// Gelfand's formula with repeated squaring.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    for candidate in [m.clone(), m.transpose()] {
        if let Some(schur) = Schur::try_new(candidate, f64::EPSILON, SCHUR_MAX_ITER) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        }
    }
    gelfand_radius(m)
}

/// `lim ||M^(2^j)||^(1/2^j)`, renormalizing each square to stay finite.
fn gelfand_radius(m: &DMatrix<f64>) -> f64 {
    let mut p = m.clone();
    let mut log_scale = 0.0;
    let mut estimate = m.norm();
    for j in 0..60 {
        let norm = p.norm();
        if norm == 0.0 {
            return 0.0;
        }
        // ||M^(2^j)|| = norm * exp(log_scale)
        estimate = ((norm.ln() + log_scale) / 2f64.powi(j)).exp();
        p /= norm;
        log_scale = 2.0 * (log_scale + norm.ln());
        p = &p * &p;
    }
    estimate
}

/// `(lambda_min, lambda_max)` of the symmetric part of `m`.
pub fn sym_eig_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    (ev.min(), ev.max())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}
