//! Fractional-order system with additive disturbance,
//!
//! ```text
//! sum_i A_i D^{a_i} x(k+1) = sum_i B_i D^{b_i} u(k) + sum_i G_i D^{g_i} w(k),
//! ```
//!
//! its explicit recursion, and the exact (full-memory) simulator.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::frac::{CoeffTable, FracOrder};
use crate::linalg::reciprocal_condition;
use crate::trajectory::Trajectory;

/// Minimum reciprocal condition number accepted for `sum_i A_i`.
pub const MIN_RCOND: f64 = 1e-12;

/// One matrix/order pair of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub matrix: DMatrix<f64>,
    pub order: FracOrder,
}

impl Term {
    pub fn new(matrix: DMatrix<f64>, order: FracOrder) -> Self {
        Self { matrix, order }
    }
}

/// Problems found by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    DimensionMismatch(String),
    SingularAggregate { rcond: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub state_dim: usize,
    pub input_dim: usize,
    pub dist_dim: usize,
    /// Reciprocal condition number of `sum_i A_i` (NaN if dimensions are broken).
    pub rcond: f64,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn into_result(self) -> Result<Self> {
        match self.issues.first() {
            None => Ok(self),
            Some(Issue::DimensionMismatch(msg)) => Err(Error::DimensionMismatch(msg.clone())),
            Some(Issue::SingularAggregate { rcond }) => {
                Err(Error::SingularAggregateMatrix { rcond: *rcond })
            }
        }
    }
}

/// Checks dimensions and invertibility of `sum_i A_i`.
///
/// Orders are non-negative by construction of [`FracOrder`].
pub fn validate_model(state: &[Term], input: &[Term], dist: &[Term]) -> ValidationReport {
    let mut issues = Vec::new();
    let n = state.first().map_or(0, |t| t.matrix.nrows());
    let m = input.first().map_or(0, |t| t.matrix.ncols());
    let p = dist.first().map_or(0, |t| t.matrix.ncols());

    if state.is_empty() {
        issues.push(Issue::DimensionMismatch("at least one state term is required".into()));
    }
    if input.is_empty() {
        issues.push(Issue::DimensionMismatch("at least one input term is required".into()));
    }
    if n == 0 && !state.is_empty() {
        issues.push(Issue::DimensionMismatch("state dimension must be positive".into()));
    }
    for (i, t) in state.iter().enumerate() {
        if t.matrix.shape() != (n, n) {
            issues.push(Issue::DimensionMismatch(format!(
                "state term {} is {}x{}, expected {n}x{n}",
                i + 1,
                t.matrix.nrows(),
                t.matrix.ncols()
            )));
        }
    }
    for (i, t) in input.iter().enumerate() {
        if t.matrix.shape() != (n, m) {
            issues.push(Issue::DimensionMismatch(format!(
                "input term {} is {}x{}, expected {n}x{m}",
                i + 1,
                t.matrix.nrows(),
                t.matrix.ncols()
            )));
        }
    }
    for (i, t) in dist.iter().enumerate() {
        if t.matrix.shape() != (n, p) {
            issues.push(Issue::DimensionMismatch(format!(
                "disturbance term {} is {}x{}, expected {n}x{p}",
                i + 1,
                t.matrix.nrows(),
                t.matrix.ncols()
            )));
        }
    }

    let mut rcond = f64::NAN;
    if issues.is_empty() {
        let sum = state
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, t| acc + &t.matrix);
        rcond = reciprocal_condition(&sum);
        if !(rcond > MIN_RCOND) {
            issues.push(Issue::SingularAggregate { rcond });
        }
    }

    ValidationReport {
        state_dim: n,
        input_dim: m,
        dist_dim: p,
        rcond,
        issues,
    }
}

/// A validated fractional-order model.
#[derive(Debug, Clone)]
pub struct FosModel {
    n: usize,
    m: usize,
    p: usize,
    state_terms: Vec<Term>,
    input_terms: Vec<Term>,
    dist_terms: Vec<Term>,
    b_w: f64,
    a0_lu: LU<f64, Dyn, Dyn>,
    rcond: f64,
}

impl FosModel {
    pub fn new(
        state_terms: Vec<Term>,
        input_terms: Vec<Term>,
        dist_terms: Vec<Term>,
        b_w: f64,
    ) -> Result<Self> {
        if !(b_w >= 0.0 && b_w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "disturbance bound b_w must be finite and non-negative, got {b_w}"
            )));
        }
        let report = validate_model(&state_terms, &input_terms, &dist_terms).into_result()?;
        let (n, m, p) = (report.state_dim, report.input_dim, report.dist_dim);
        let a0 = state_terms
            .iter()
            .fold(DMatrix::zeros(n, n), |acc, t| acc + &t.matrix);
        Ok(Self {
            n,
            m,
            p,
            state_terms,
            input_terms,
            dist_terms,
            b_w,
            a0_lu: a0.lu(),
            rcond: report.rcond,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn dist_dim(&self) -> usize {
        self.p
    }

    pub fn state_terms(&self) -> &[Term] {
        &self.state_terms
    }

    pub fn input_terms(&self) -> &[Term] {
        &self.input_terms
    }

    pub fn dist_terms(&self) -> &[Term] {
        &self.dist_terms
    }

    pub fn b_w(&self) -> f64 {
        self.b_w
    }

    /// Same model with a different disturbance bound.
    pub fn with_b_w(mut self, b_w: f64) -> Result<Self> {
        if !(b_w >= 0.0 && b_w.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid b_w {b_w}")));
        }
        self.b_w = b_w;
        Ok(self)
    }

    /// Reciprocal condition number of `sum_i A_i`.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Applies `(sum_i A_i)^{-1}` to `rhs` through the stored factorization.
    pub fn solve_a0(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.a0_lu
            .solve(rhs)
            .expect("aggregate matrix was checked to be invertible")
    }

    pub fn reform_coeffs(&self, horizon: usize) -> ReformCoeffs {
        ReformCoeffs::new(self, horizon)
    }

    /// Zero vector of the state dimension.
    pub fn zero_state(&self) -> DVector<f64> {
        DVector::zeros(self.n)
    }
}

/// Coefficients of the explicit recursion
///
/// ```text
/// x(k+1) = sum_{j>=1} Ǎ_j x(k-j+1) + sum_{j>=0} B̌_j u(k-j) + sum_{j>=0} Ǧ_j w(k-j)
/// ```
///
/// with `Ǎ_j = -Â_0^{-1} Â_j`, `B̌_j = Â_0^{-1} B̂_j`, `Ǧ_j = Â_0^{-1} Ĝ_j`.
#[derive(Debug, Clone)]
pub struct ReformCoeffs {
    state_tables: Vec<CoeffTable>,
    input_tables: Vec<CoeffTable>,
    dist_tables: Vec<CoeffTable>,
    hat_a: Vec<DMatrix<f64>>,
    check_a: Vec<DMatrix<f64>>,
    check_b: Vec<DMatrix<f64>>,
    check_g: Vec<DMatrix<f64>>,
}

impl ReformCoeffs {
    pub fn new(model: &FosModel, horizon: usize) -> Self {
        let tables = |terms: &[Term]| {
            terms
                .iter()
                .map(|t| CoeffTable::new(t.order, horizon))
                .collect::<Vec<_>>()
        };
        let mut rc = Self {
            state_tables: tables(&model.state_terms),
            input_tables: tables(&model.input_terms),
            dist_tables: tables(&model.dist_terms),
            hat_a: Vec::new(),
            check_a: Vec::new(),
            check_b: Vec::new(),
            check_g: Vec::new(),
        };
        rc.extend_to(model, horizon);
        rc
    }

    pub fn horizon(&self) -> usize {
        self.hat_a.len() - 1
    }

    /// Grows every sequence so that lags `0..=horizon` are available.
    pub fn extend_to(&mut self, model: &FosModel, horizon: usize) {
        let start = self.hat_a.len();
        if start > horizon {
            return;
        }
        for t in self
            .state_tables
            .iter_mut()
            .chain(self.input_tables.iter_mut())
            .chain(self.dist_tables.iter_mut())
        {
            t.extend_to(horizon);
        }
        let (n, m, p) = (model.n, model.m, model.p);
        for j in start..=horizon {
            let combine = |terms: &[Term], tables: &[CoeffTable], cols: usize| {
                terms
                    .iter()
                    .zip(tables)
                    .fold(DMatrix::zeros(n, cols), |acc, (t, c)| {
                        acc + &t.matrix * c.coeffs()[j]
                    })
            };
            let hat_a = combine(&model.state_terms, &self.state_tables, n);
            let hat_b = combine(&model.input_terms, &self.input_tables, m);
            let hat_g = combine(&model.dist_terms, &self.dist_tables, p);
            let check_a = if j == 0 {
                DMatrix::zeros(n, n)
            } else {
                -model.solve_a0(&hat_a)
            };
            self.check_a.push(check_a);
            self.check_b.push(model.solve_a0(&hat_b));
            self.check_g.push(model.solve_a0(&hat_g));
            self.hat_a.push(hat_a);
        }
    }

    /// `Â_j = sum_i A_i c_j^{a_i}`.
    pub fn hat_a(&self, j: usize) -> &DMatrix<f64> {
        &self.hat_a[j]
    }

    /// `Ǎ_j` for `j >= 1`; index 0 holds a zero block.
    pub fn check_a(&self, j: usize) -> &DMatrix<f64> {
        &self.check_a[j]
    }

    pub fn check_b(&self, j: usize) -> &DMatrix<f64> {
        &self.check_b[j]
    }

    pub fn check_g(&self, j: usize) -> &DMatrix<f64> {
        &self.check_g[j]
    }
}

/// Exact rollout of the explicit recursion with zero pre-initial history.
///
/// Keeps the whole past; step `k` costs `O(k)` matrix-vector products.
#[derive(Debug, Clone)]
pub struct ExactSimulator<'a> {
    model: &'a FosModel,
    coeffs: ReformCoeffs,
    states: Vec<DVector<f64>>,
    inputs: Vec<DVector<f64>>,
    disturbances: Vec<DVector<f64>>,
}

impl<'a> ExactSimulator<'a> {
    pub fn new(model: &'a FosModel, x0: DVector<f64>) -> Result<Self> {
        if x0.len() != model.n {
            return Err(Error::DimensionMismatch(format!(
                "initial state has length {}, expected {}",
                x0.len(),
                model.n
            )));
        }
        Ok(Self {
            model,
            coeffs: model.reform_coeffs(16),
            states: vec![x0],
            inputs: Vec::new(),
            disturbances: Vec::new(),
        })
    }

    pub fn model(&self) -> &FosModel {
        self.model
    }

    /// Current time index `k` (the latest available state is `x(k)`).
    pub fn time(&self) -> usize {
        self.states.len() - 1
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn inputs(&self) -> &[DVector<f64>] {
        &self.inputs
    }

    pub fn disturbances(&self) -> &[DVector<f64>] {
        &self.disturbances
    }

    pub fn coeffs(&self) -> &ReformCoeffs {
        &self.coeffs
    }

    /// Applies `u(k)`, `w(k)` and returns `x(k+1)`.
    pub fn step(&mut self, u: DVector<f64>, w: DVector<f64>) -> Result<&DVector<f64>> {
        let model = self.model;
        if u.len() != model.m || w.len() != model.p {
            return Err(Error::DimensionMismatch(format!(
                "step got input of length {} and disturbance of length {}, expected {} and {}",
                u.len(),
                w.len(),
                model.m,
                model.p
            )));
        }
        let k = self.time();
        if self.coeffs.horizon() < k + 1 {
            let grow = (2 * self.coeffs.horizon()).max(k + 1);
            self.coeffs.extend_to(model, grow);
        }
        self.inputs.push(u);
        self.disturbances.push(w);

        let mut next = DVector::zeros(model.n);
        for j in 1..=k + 1 {
            next.gemv(1.0, self.coeffs.check_a(j), &self.states[k + 1 - j], 1.0);
        }
        for j in 0..=k {
            next.gemv(1.0, self.coeffs.check_b(j), &self.inputs[k - j], 1.0);
            if model.p > 0 {
                next.gemv(1.0, self.coeffs.check_g(j), &self.disturbances[k - j], 1.0);
            }
        }
        self.states.push(next);
        Ok(self.states.last().expect("just pushed"))
    }
}

/// Runs `steps` steps of the exact recursion.
///
/// `input` may close the loop: it sees the simulator with states up to `x(k)`
/// and inputs up to `u(k-1)`. The returned trajectory also stores the input
/// and disturbance evaluated at the final time so that every sequence has
/// `steps + 1` entries.
pub fn simulate_exact<U, W>(
    model: &FosModel,
    x0: DVector<f64>,
    steps: usize,
    mut input: U,
    mut disturbance: W,
) -> Result<Trajectory>
where
    U: FnMut(usize, &ExactSimulator<'_>) -> DVector<f64>,
    W: FnMut(usize) -> DVector<f64>,
{
    let mut sim = ExactSimulator::new(model, x0)?;
    for k in 0..steps {
        let u = input(k, &sim);
        let w = disturbance(k);
        sim.step(u, w)?;
    }
    let u_last = input(steps, &sim);
    let w_last = disturbance(steps);
    let mut inputs = sim.inputs.clone();
    let mut dists = sim.disturbances.clone();
    inputs.push(u_last);
    dists.push(w_last);
    Ok(Trajectory::new(sim.states.clone(), inputs, dists))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::benchmark_model;
    use crate::linalg::spectral_norm;

    fn ord(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn zero_input(model: &FosModel) -> impl FnMut(usize, &ExactSimulator<'_>) -> DVector<f64> {
        let m = model.input_dim();
        move |_, _| DVector::zeros(m)
    }

    #[test]
    fn benchmark_model_is_valid() {
        let model = benchmark_model(false, 0.0);
        assert!((model.rcond() - 1.0).abs() < 1e-12);
        let rc = model.reform_coeffs(5);
        assert_eq!(rc.hat_a(0), &DMatrix::identity(2, 2));
    }

    #[test]
    fn singular_aggregate_rejected() {
        let z = Term::new(DMatrix::zeros(2, 2), ord(0.5));
        let b = Term::new(DMatrix::from_element(2, 1, 1.0), ord(0.0));
        let err = FosModel::new(vec![z], vec![b.clone()], vec![], 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularAggregateMatrix { .. }));

        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let err = FosModel::new(
            vec![Term::new(a.clone(), ord(0.3)), Term::new(-a, ord(1.2))],
            vec![b],
            vec![],
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularAggregateMatrix { .. }));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = Term::new(DMatrix::identity(2, 2), ord(1.0));
        let b = Term::new(DMatrix::from_element(3, 1, 1.0), ord(0.0));
        let err = FosModel::new(vec![a], vec![b], vec![], 0.0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
        let report = validate_model(&[], &[], &[]);
        assert!(!report.is_valid());
    }

    #[test]
    fn benchmark_check_coefficients() {
        let model = benchmark_model(false, 0.0);
        let rc = model.reform_coeffs(30);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((rc.check_a(1) - &a * 1.7).norm() < 1e-15);
        for j in 1..=30 {
            let c = crate::frac::gl_coefficient(ord(1.7), j);
            assert!((rc.check_a(j) + &a * c).norm() < 1e-14);
            assert!((spectral_norm(rc.check_a(j)) - spectral_norm(&a) * c.abs()).abs() < 1e-13);
        }
    }

    #[test]
    fn static_model_has_no_memory() {
        let a = Term::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]), ord(0.0));
        let b = Term::new(DMatrix::from_row_slice(2, 1, &[1.0, 0.0]), ord(0.0));
        let model = FosModel::new(vec![a], vec![b], vec![], 0.0).unwrap();
        let rc = model.reform_coeffs(6);
        for j in 1..=6 {
            assert_eq!(rc.check_a(j).norm(), 0.0);
            assert_eq!(rc.check_b(j).norm(), 0.0);
        }
        let traj = simulate_exact(
            &model,
            DVector::from_vec(vec![3.0, -1.0]),
            4,
            |k, _| DVector::from_element(1, k as f64 + 1.0),
            |_| DVector::zeros(0),
        )
        .unwrap();
        // x(k+1) = B̌_0 u(k) with B̌_0 = [0.5, -0.5]
        for k in 0..4 {
            let u = k as f64 + 1.0;
            let x = &traj.states[k + 1];
            assert!((x[0] - 0.5 * u).abs() < 1e-15 && (x[1] + 0.5 * u).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_solution() {
        let model = benchmark_model(true, 0.0);
        let traj = simulate_exact(
            &model,
            DVector::zeros(2),
            50,
            zero_input(&model),
            |_| DVector::zeros(2),
        )
        .unwrap();
        assert!(traj.states.iter().all(|x| x.norm() == 0.0));
        assert_eq!(traj.len(), 51);
    }

    #[test]
    fn first_step_of_benchmark_model() {
        let model = benchmark_model(false, 0.0);
        let traj = simulate_exact(
            &model,
            DVector::from_vec(vec![1.0, 0.0]),
            1,
            zero_input(&model),
            |_| DVector::zeros(2),
        )
        .unwrap();
        assert!((traj.states[1][0] - 1.7).abs() < 1e-15);
        assert_eq!(traj.states[1][1], 0.0);
    }

    #[test]
    fn integer_order_matches_linear_recursion() {
        // (I - F) x(k+1) + F (x(k+1) - x(k)) = B u(k)  <=>  x(k+1) = F x(k) + B u(k)
        let f = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, -0.1, 0.7]);
        let bm = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let model = FosModel::new(
            vec![
                Term::new(DMatrix::identity(2, 2) - &f, ord(0.0)),
                Term::new(f.clone(), ord(1.0)),
            ],
            vec![Term::new(bm.clone(), ord(0.0))],
            vec![],
            0.0,
        )
        .unwrap();
        let rc = model.reform_coeffs(3);
        assert!((rc.check_a(1) - &f).norm() < 1e-14);
        let u = |k: usize| DVector::from_element(1, (0.3 * k as f64).sin());
        let traj = simulate_exact(
            &model,
            DVector::from_vec(vec![1.0, -2.0]),
            60,
            |k, _| u(k),
            |_| DVector::zeros(0),
        )
        .unwrap();
        let mut x = DVector::from_vec(vec![1.0, -2.0]);
        for k in 0..60 {
            x = &f * &x + &bm * u(k);
            assert!((&traj.states[k + 1] - &x).norm() <= 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn causality() {
        let model = benchmark_model(true, 0.5);
        let base = simulate_exact(
            &model,
            DVector::from_vec(vec![0.2, 0.1]),
            30,
            |k, _| DVector::from_element(1, (k as f64).cos()),
            |k| DVector::from_element(2, 0.1 * k as f64),
        )
        .unwrap();
        let changed = simulate_exact(
            &model,
            DVector::from_vec(vec![0.2, 0.1]),
            30,
            |k, _| DVector::from_element(1, if k >= 12 { 5.0 } else { (k as f64).cos() }),
            |k| DVector::from_element(2, if k >= 12 { -3.0 } else { 0.1 * k as f64 }),
        )
        .unwrap();
        for k in 0..=12 {
            assert_eq!(base.states[k], changed.states[k]);
        }
        assert_ne!(base.states[13], changed.states[13]);
    }
}
