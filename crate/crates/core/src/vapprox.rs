//! Finite-window (v-)approximation of the fractional recursion.
//!
//! The augmented state is
//!
//! ```text
//! x̃(k) = [x(k); x(k-1); ...; x(k-v+1); u(k-1); ...; u(k-v)]   (dimension v(n+m))
//! ```
//!
//! and the model is rewritten exactly as `x̃(k+1) = Ã x̃(k) + B̃ u(k) + G̃ r(k)`,
//! where `r(k)` collects every term that falls outside the window together with
//! all disturbance terms. Dropping `r` gives the v-approximation.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{FosModel, ReformCoeffs};

/// Block positions inside the augmented state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub v: usize,
    pub n: usize,
    pub m: usize,
}

impl Layout {
    pub fn dim(&self) -> usize {
        self.v * (self.n + self.m)
    }

    /// Rows of `x(k - lag)`, `lag in 0..v`.
    pub fn state_block(&self, lag: usize) -> Range<usize> {
        assert!(lag < self.v);
        lag * self.n..(lag + 1) * self.n
    }

    /// Rows of `u(k - 1 - lag)`, `lag in 0..v`.
    pub fn input_block(&self, lag: usize) -> Range<usize> {
        assert!(lag < self.v);
        let base = self.v * self.n;
        base + lag * self.m..base + (lag + 1) * self.m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VApprox {
    layout: Layout,
    tilde_a: DMatrix<f64>,
    tilde_b: DMatrix<f64>,
    tilde_g: DMatrix<f64>,
}

impl VApprox {
    pub fn v(&self) -> usize {
        self.layout.v
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn tilde_a(&self) -> &DMatrix<f64> {
        &self.tilde_a
    }

    pub fn tilde_b(&self) -> &DMatrix<f64> {
        &self.tilde_b
    }

    /// `[I_n; 0; ...; 0]`: the residual enters the newest state block only.
    pub fn tilde_g(&self) -> &DMatrix<f64> {
        &self.tilde_g
    }

    /// `C = [I_n, 0, ..., 0]`, reads `x(k)` out of the augmented state.
    pub fn output_matrix(&self) -> DMatrix<f64> {
        self.tilde_g.transpose()
    }

    /// One step of the approximation, `Ã x̃ + B̃ u`.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let mut next = &self.tilde_a * x;
        next.gemv(1.0, &self.tilde_b, u, 1.0);
        next
    }

    /// `x̃(0) = [x0; 0; ...; 0]`.
    pub fn initial_state(&self, x0: &DVector<f64>) -> DVector<f64> {
        let mut s = DVector::zeros(self.dim());
        s.rows_mut(0, self.layout.n).copy_from(x0);
        s
    }

    /// Builds `x̃(k)` from a history with zero padding before time 0.
    ///
    /// `states` must hold `x(0..=k)` and `inputs` at least `u(0..k)`.
    pub fn assemble(&self, states: &[DVector<f64>], inputs: &[DVector<f64>], k: usize) -> DVector<f64> {
        let l = self.layout;
        let mut s = DVector::zeros(l.dim());
        for lag in 0..l.v.min(k + 1) {
            s.rows_mut(l.state_block(lag).start, l.n)
                .copy_from(&states[k - lag]);
        }
        for lag in 0..l.v.min(k) {
            s.rows_mut(l.input_block(lag).start, l.m)
                .copy_from(&inputs[k - 1 - lag]);
        }
        s
    }
}

/// Companion-form matrices for window length `v >= 1`.
pub fn build_v_approx(model: &FosModel, v: usize) -> Result<VApprox> {
    if v == 0 {
        return Err(Error::InvalidParameter("window length v must be at least 1".into()));
    }
    let coeffs = model.reform_coeffs(v);
    Ok(build_from_coeffs(model, &coeffs, v))
}

pub(crate) fn build_from_coeffs(model: &FosModel, coeffs: &ReformCoeffs, v: usize) -> VApprox {
    let (n, m) = (model.state_dim(), model.input_dim());
    let layout = Layout { v, n, m };
    let dim = layout.dim();
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DMatrix::zeros(dim, m);

    for lag in 0..v {
        let cols = layout.state_block(lag);
        a.view_mut((0, cols.start), (n, n))
            .copy_from(coeffs.check_a(lag + 1));
        let cols = layout.input_block(lag);
        a.view_mut((0, cols.start), (n, m))
            .copy_from(coeffs.check_b(lag + 1));
    }
    b.view_mut((0, 0), (n, m)).copy_from(coeffs.check_b(0));

    for lag in 1..v {
        let (to, from) = (layout.state_block(lag), layout.state_block(lag - 1));
        a.view_mut((to.start, from.start), (n, n))
            .fill_with_identity();
        let (to, from) = (layout.input_block(lag), layout.input_block(lag - 1));
        a.view_mut((to.start, from.start), (m, m))
            .fill_with_identity();
    }
    b.view_mut((layout.input_block(0).start, 0), (m, m))
        .fill_with_identity();

    let mut g = DMatrix::zeros(dim, n);
    g.view_mut((0, 0), (n, n)).fill_with_identity();

    VApprox {
        layout,
        tilde_a: a,
        tilde_b: b,
        tilde_g: g,
    }
}

/// Exact residual `r(k)` for window `v`:
///
/// ```text
/// r(k) = sum_{j>v} Ǎ_j x(k-j+1) + sum_{j>v} B̌_j u(k-j) + sum_{j>=0} Ǧ_j w(k-j)
/// ```
///
/// truncated at the zero history before time 0. Needs `x(0..=k)`, `u(0..k)`,
/// `w(0..=k)` and coefficients up to lag `k + 1`.
pub fn residual(
    coeffs: &ReformCoeffs,
    v: usize,
    states: &[DVector<f64>],
    inputs: &[DVector<f64>],
    disturbances: &[DVector<f64>],
    k: usize,
) -> DVector<f64> {
    assert!(coeffs.horizon() > k, "reform coefficients must reach lag k + 1");
    let n = states[0].len();
    let mut r = DVector::zeros(n);
    for j in v + 1..=k + 1 {
        r.gemv(1.0, coeffs.check_a(j), &states[k + 1 - j], 1.0);
    }
    for j in v + 1..=k {
        r.gemv(1.0, coeffs.check_b(j), &inputs[k - j], 1.0);
    }
    if coeffs.check_g(0).ncols() > 0 {
        for j in 0..=k {
            r.gemv(1.0, coeffs.check_g(j), &disturbances[k - j], 1.0);
        }
    }
    r
}
