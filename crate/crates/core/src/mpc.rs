//! Receding-horizon reference generator on the v-approximation.
//!
//! At time `k` the open-loop problem is
//!
//! ```text
//! min_u  sum_{i=0}^{N-1} l(k+i, x̄(i), ū(i)) + c_s x̄(N)' P x̄(N)
//! s.t.   x̄(i+1) = Ã x̄(i) + B̃ ū(i),   x̄(0) = x_e(k)
//!
//! l(t, x, u)  = c_le atan(l_e / c_le) + c_s x' Q x
//! l_e(t, x, u) = w_x (x_1 - p_d(t))^2 + w_u ||u||^2
//! ```
//!
//! The objective is smooth, the dynamics linear, so the gradient comes from
//! one adjoint sweep. It is minimized by BFGS with an Armijo backtracking
//! line search, starting from the previous solution shifted by one step and
//! closed with the linear gain `K_v`. The initial inverse Hessian is the
//! exact inverse Hessian of the unsaturated objective, which makes the first
//! step a Newton step whenever the saturation is inactive.
//!
//! Close to the optimum, stiff directions of the problem move the cost by less
//! than its rounding error, so the line search also accepts steps that leave
//! the cost flat while shrinking the gradient. The returned cost never exceeds
//! the cost of the warm start.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig_extremes, symmetrize};
use crate::synthesis::Design;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;
const NOISE_ULPS: f64 = 8.0;

/// `p_d(t) = offset + sum_i amplitude_i sin(frequency_i t + phase_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub offset: f64,
    pub sines: Vec<Sine>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sine {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl Target {
    pub fn zero() -> Self {
        Self {
            offset: 0.0,
            sines: Vec::new(),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            offset: value,
            sines: Vec::new(),
        }
    }

    /// `-10 sin(0.2 t) + 3 sin(0.5 t)`.
    pub fn two_tone() -> Self {
        let s = |amplitude, frequency| Sine {
            amplitude,
            frequency,
            phase: 0.0,
        };
        Self {
            offset: 0.0,
            sines: vec![s(-10.0, 0.2), s(3.0, 0.5)],
        }
    }

    pub fn eval(&self, t: usize) -> f64 {
        let t = t as f64;
        self.sines
            .iter()
            .fold(self.offset, |acc, s| acc + s.amplitude * (s.frequency * t + s.phase).sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    /// Prediction horizon `N`.
    pub horizon: usize,
    /// Saturation scale of the tracking cost.
    pub c_le: f64,
    /// Weight of the stabilizing terms `c_s x'Qx` and `c_s x'Px`.
    pub c_s: f64,
    pub tracking_weight: f64,
    pub input_weight: f64,
    pub target: Target,
    pub max_iter: usize,
    /// Convergence threshold on the gradient infinity norm.
    pub grad_tol: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            c_le: 1e5,
            c_s: 1e-5,
            tracking_weight: 10.0,
            input_weight: 1.0,
            target: Target::two_tone(),
            max_iter: 500,
            grad_tol: 1e-8,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
        };
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("MPC horizon must be at least 1".into()));
        }
        positive("c_le", self.c_le)?;
        positive("c_s", self.c_s)?;
        positive("input_weight", self.input_weight)?;
        positive("grad_tol", self.grad_tol)?;
        if !(self.tracking_weight >= 0.0) {
            return Err(Error::InvalidParameter("tracking_weight must be non-negative".into()));
        }
        Ok(())
    }
}

/// Optimal (or best found) open-loop plan.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenLoopSolution {
    /// `ū(0..N)`.
    pub inputs: Vec<DVector<f64>>,
    /// `x̄(0..=N)`, obtained by rolling the inputs through the dynamics.
    pub states: Vec<DVector<f64>>,
    pub cost: f64,
    /// Cost of the warm start the optimizer began from.
    pub warm_cost: f64,
    pub iterations: usize,
    pub grad_inf_norm: f64,
    /// `false` when the gradient tolerance was not met (stalled line search or
    /// iteration cap); the plan is still the best iterate found.
    pub converged: bool,
}

/// Fixed data of the open-loop problem.
#[derive(Debug, Clone)]
pub struct MpcProblem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    q: DMatrix<f64>,
    p: DMatrix<f64>,
    gain: DMatrix<f64>,
    /// Index of the tracked component inside the state.
    output: usize,
    config: MpcConfig,
    h0: DMatrix<f64>,
}

impl MpcProblem {
    /// Problem on a synthesized design: `Ã`, `B̃`, `Q`, `P`, `K_v`; tracks `x_1`.
    pub fn new(design: &Design, config: MpcConfig) -> Result<Self> {
        Self::from_parts(
            design.vapprox.tilde_a().clone(),
            design.vapprox.tilde_b().clone(),
            design.q.clone(),
            design.p.clone(),
            design.gain.clone(),
            0,
            config,
        )
    }

    pub fn from_parts(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        p: DMatrix<f64>,
        gain: DMatrix<f64>,
        output: usize,
        config: MpcConfig,
    ) -> Result<Self> {
        config.validate()?;
        let d = a.nrows();
        let m = b.ncols();
        if a.ncols() != d
            || b.nrows() != d
            || q.shape() != (d, d)
            || p.shape() != (d, d)
            || gain.shape() != (m, d)
            || output >= d
        {
            return Err(Error::DimensionMismatch(format!(
                "MPC data: A {:?}, B {:?}, Q {:?}, P {:?}, K {:?}, output {output}",
                a.shape(),
                b.shape(),
                q.shape(),
                p.shape(),
                gain.shape()
            )));
        }
        let mut problem = Self {
            a,
            b,
            q,
            p,
            gain,
            output,
            config,
            h0: DMatrix::zeros(0, 0),
        };
        problem.h0 = problem.quadratic_inverse_hessian()?;
        Ok(problem)
    }

    pub fn config(&self) -> &MpcConfig {
        &self.config
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// Number of decision variables `N m`.
    pub fn num_vars(&self) -> usize {
        self.config.horizon * self.input_dim()
    }

    /// Inverse Hessian of the objective with `atan` replaced by identity.
    fn quadratic_inverse_hessian(&self) -> Result<DMatrix<f64>> {
        let (d, m, n) = (self.state_dim(), self.input_dim(), self.config.horizon);
        let c = &self.config;
        let mut stage = c.c_s * &self.q;
        stage[(self.output, self.output)] += c.tracking_weight;
        let terminal = c.c_s * &self.p;

        // gamma[i] = d x̄(i) / d u, built one row block at a time
        let mut h = DMatrix::identity(n * m, n * m) * c.input_weight;
        let mut gamma = DMatrix::zeros(d, n * m);
        for i in 1..=n {
            let mut next = &self.a * &gamma;
            next.view_mut((0, (i - 1) * m), (d, m)).copy_from(&self.b);
            gamma = next;
            let weight = if i == n { &terminal } else { &stage };
            h += gamma.transpose() * weight * &gamma;
        }
        let h = symmetrize(&(2.0 * h));
        let chol = h.cholesky().ok_or_else(|| {
            Error::InvalidParameter("MPC quadratic Hessian is not positive definite".into())
        })?;
        Ok(chol.inverse())
    }

    /// `x̄(0..=N)` under the flat input vector `u`.
    pub fn rollout(&self, x0: &DVector<f64>, u: &DVector<f64>) -> Vec<DVector<f64>> {
        let m = self.input_dim();
        let mut xs = Vec::with_capacity(self.config.horizon + 1);
        xs.push(x0.clone());
        for i in 0..self.config.horizon {
            let mut next = &self.a * &xs[i];
            next.gemv(1.0, &self.b, &u.rows(i * m, m), 1.0);
            xs.push(next);
        }
        xs
    }

    fn tracking_error(&self, t: usize, x: &DVector<f64>) -> f64 {
        x[self.output] - self.config.target.eval(t)
    }

    /// `l_e(t, x, u)`.
    pub fn tracking_cost(&self, t: usize, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let e = self.tracking_error(t, x);
        self.config.tracking_weight * e * e + self.config.input_weight * u.norm_squared()
    }

    /// `l(t, x, u) = c_le atan(l_e / c_le) + c_s x'Qx`.
    pub fn stage_cost(&self, t: usize, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let c = &self.config;
        c.c_le * (self.tracking_cost(t, x, u) / c.c_le).atan() + self.stabilizer_cost(x)
    }

    /// `l_s(x) = c_s x'Qx`.
    pub fn stabilizer_cost(&self, x: &DVector<f64>) -> f64 {
        self.config.c_s * x.dot(&(&self.q * x))
    }

    /// `m_s(x) = c_s x'Px`.
    pub fn terminal_cost(&self, x: &DVector<f64>) -> f64 {
        self.config.c_s * x.dot(&(&self.p * x))
    }

    /// `J(k, x0, u)`.
    pub fn cost(&self, k: usize, x0: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let m = self.input_dim();
        let xs = self.rollout(x0, u);
        let n = self.config.horizon;
        let stages: f64 = (0..n)
            .map(|i| self.stage_cost(k + i, &xs[i], &u.rows(i * m, m).into_owned()))
            .sum();
        stages + self.terminal_cost(&xs[n])
    }

    /// Cost and adjoint gradient with respect to the flat inputs.
    pub fn cost_and_gradient(&self, k: usize, x0: &DVector<f64>, u: &DVector<f64>) -> (f64, DVector<f64>) {
        let c = &self.config;
        let (m, n) = (self.input_dim(), c.horizon);
        let xs = self.rollout(x0, u);
        let mut cost = 0.0;
        // derivative of c_le atan(z / c_le) at z = l_e
        let mut slopes = Vec::with_capacity(n);
        for i in 0..n {
            let ui = u.rows(i * m, m);
            let e = self.tracking_error(k + i, &xs[i]);
            let le = c.tracking_weight * e * e + c.input_weight * ui.norm_squared();
            let z = le / c.c_le;
            cost += c.c_le * z.atan() + self.stabilizer_cost(&xs[i]);
            slopes.push(1.0 / (1.0 + z * z));
        }
        cost += self.terminal_cost(&xs[n]);

        let mut grad = DVector::zeros(n * m);
        let mut lambda = 2.0 * c.c_s * (&self.p * &xs[n]);
        for i in (0..n).rev() {
            // lambda holds dJ/dx̄(i+1)
            let mut gi = self.b.tr_mul(&lambda);
            gi += 2.0 * slopes[i] * c.input_weight * u.rows(i * m, m);
            grad.rows_mut(i * m, m).copy_from(&gi);
            if i > 0 {
                let mut local = 2.0 * c.c_s * (&self.q * &xs[i]);
                local[self.output] += 2.0 * slopes[i] * c.tracking_weight * self.tracking_error(k + i, &xs[i]);
                lambda = self.a.tr_mul(&lambda) + local;
            }
        }
        (cost, grad)
    }

    /// Inputs of the closed loop `ū(i) = K_v x̄(i)` from `x0`.
    pub fn gain_rollout(&self, x0: &DVector<f64>) -> DVector<f64> {
        let m = self.input_dim();
        let mut u = DVector::zeros(self.num_vars());
        let mut x = x0.clone();
        for i in 0..self.config.horizon {
            let ui = &self.gain * &x;
            x = &self.a * &x + &self.b * &ui;
            u.rows_mut(i * m, m).copy_from(&ui);
        }
        u
    }

    /// Previous plan shifted by one step and closed with `K_v x̄(N)`.
    pub fn extend(&self, previous: &OpenLoopSolution) -> DVector<f64> {
        let m = self.input_dim();
        let n = self.config.horizon;
        let mut u = DVector::zeros(self.num_vars());
        for i in 1..n {
            u.rows_mut((i - 1) * m, m).copy_from(&previous.inputs[i]);
        }
        u.rows_mut((n - 1) * m, m)
            .copy_from(&(&self.gain * &previous.states[n]));
        u
    }

    /// Minimizes `J(k, x0, .)` starting from `warm`.
    pub fn solve(&self, k: usize, x0: &DVector<f64>, warm: DVector<f64>) -> OpenLoopSolution {
        let c = &self.config;
        let mut u = warm.clone();
        let (mut f, mut g) = self.cost_and_gradient(k, x0, &u);
        let (warm_cost, warm_grad) = (f, g.clone());
        let mut h = self.h0.clone();
        let mut iterations = 0;
        let mut converged = g.amax() < c.grad_tol;

        while !converged && iterations < c.max_iter {
            let mut dir = -(&h * &g);
            let mut slope = g.dot(&dir);
            if !(slope < 0.0) {
                h.copy_from(&self.h0);
                dir = -(&h * &g);
                slope = g.dot(&dir);
            }
            let mut t = 1.0;
            let accepted = loop {
                let trial = &u + t * &dir;
                let (ft, gt) = self.cost_and_gradient(k, x0, &trial);
                // Near the optimum the predicted decrease falls below the
                // rounding level of the cost; a step that keeps the cost flat
                // and shrinks the gradient is then accepted.
                let flat = ft <= f + NOISE_ULPS * f64::EPSILON * f.abs() && gt.amax() < g.amax();
                if ft <= f + ARMIJO_C * t * slope || flat {
                    break Some((trial, ft, gt));
                }
                t *= 0.5;
                if t < MIN_STEP {
                    break None;
                }
            };
            let Some((u_new, f_new, g_new)) = accepted else {
                break;
            };
            iterations += 1;
            let s = &u_new - &u;
            let y = &g_new - &g;
            let sy = s.dot(&y);
            if sy > 1e-12 * s.norm() * y.norm() {
                let rho = 1.0 / sy;
                let hy = &h * &y;
                let yhy = y.dot(&hy);
                // H+ = H - rho (s y'H + H y s') + (rho^2 y'Hy + rho) s s'
                h -= rho * (&s * hy.transpose() + &hy * s.transpose());
                h += (rho * rho * yhy + rho) * (&s * s.transpose());
            }
            u = u_new;
            f = f_new;
            g = g_new;
            converged = g.amax() < c.grad_tol;
        }

        if f > warm_cost {
            // flat steps can drift by a few ulps; never return worse than the start
            u = warm;
            f = warm_cost;
            g = warm_grad;
            converged = g.amax() < c.grad_tol;
        }
        let m = self.input_dim();
        let states = self.rollout(x0, &u);
        OpenLoopSolution {
            inputs: (0..c.horizon).map(|i| u.rows(i * m, m).into_owned()).collect(),
            states,
            cost: f,
            warm_cost,
            iterations,
            grad_inf_norm: g.amax(),
            converged,
        }
    }
}

/// Per-step record of the receding-horizon loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcRecord {
    pub k: usize,
    /// `V(k) = J*` at the returned plan.
    pub value: f64,
    /// Cost of the shifted-and-extended warm start at this step.
    pub extended_cost: f64,
    pub iterations: usize,
    pub grad_inf_norm: f64,
    pub converged: bool,
    pub state_norm: f64,
}

/// Stateful receding-horizon controller for the exogenous system.
#[derive(Debug, Clone)]
pub struct MpcController {
    problem: MpcProblem,
    previous: Option<OpenLoopSolution>,
    records: Vec<MpcRecord>,
}

impl MpcController {
    pub fn new(problem: MpcProblem) -> Self {
        Self {
            problem,
            previous: None,
            records: Vec::new(),
        }
    }

    pub fn problem(&self) -> &MpcProblem {
        &self.problem
    }

    pub fn records(&self) -> &[MpcRecord] {
        &self.records
    }

    pub fn last_solution(&self) -> Option<&OpenLoopSolution> {
        self.previous.as_ref()
    }

    /// Solves the problem at `(k, x_e)` and returns the first planned input.
    ///
    /// The warm start is the previous plan extended by `K_v`; at the first
    /// call it is the pure `K_v` rollout.
    pub fn step(&mut self, k: usize, x_e: &DVector<f64>) -> DVector<f64> {
        let warm = match &self.previous {
            Some(prev) => self.problem.extend(prev),
            None => self.problem.gain_rollout(x_e),
        };
        let sol = self.problem.solve(k, x_e, warm);
        self.records.push(MpcRecord {
            k,
            value: sol.cost,
            extended_cost: sol.warm_cost,
            iterations: sol.iterations,
            grad_inf_norm: sol.grad_inf_norm,
            converged: sol.converged,
            state_norm: x_e.norm(),
        });
        let u = sol.inputs[0].clone();
        self.previous = Some(sol);
        u
    }

    /// `c_le pi / 2`, the bound on one saturated stage.
    pub fn saturation_level(&self) -> f64 {
        self.problem.config.c_le * FRAC_PI_2
    }

    /// Margins of the value-decrease inequality
    ///
    /// ```text
    /// W(k+1) - W(k) + alpha ||x_e(k)||^2 <= 2 c_le pi/2,   W = V - N c_le pi/2
    /// ```
    ///
    /// one per consecutive pair of records; a non-negative margin means the
    /// inequality holds. `alpha` is the quadratic lower-bound coefficient.
    pub fn decrease_margins(&self, alpha: f64) -> Vec<f64> {
        let sat = self.saturation_level();
        let shift = self.problem.config.horizon as f64 * sat;
        self.records
            .windows(2)
            .map(|w| {
                let (w0, w1) = (w[0].value - shift, w[1].value - shift);
                2.0 * sat - (w1 - w0 + alpha * w[0].state_norm * w[0].state_norm)
            })
            .collect()
    }

    /// `c_s lambda_min(Q)`: the coefficient that lower-bounds the stabilizing stage term.
    pub fn alpha_coefficient(&self) -> f64 {
        self.problem.config.c_s * sym_eig_extremes(&self.problem.q).0
    }
}

/// Closed loop of the exogenous system under the receding-horizon law.
#[derive(Debug, Clone)]
pub struct MpcRun {
    /// `x_e(0..=steps)`.
    pub states: Vec<DVector<f64>>,
    /// `u_r(0..=steps)`.
    pub inputs: Vec<DVector<f64>>,
    pub controller: MpcController,
}

/// Runs `x_e(k+1) = Ã x_e(k) + B̃ u_r(k)` with `u_r` from the controller.
pub fn run_mpc_reference(problem: MpcProblem, xe0: DVector<f64>, steps: usize) -> MpcRun {
    let mut ctl = MpcController::new(problem);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut x = xe0;
    for k in 0..=steps {
        let u = ctl.step(k, &x);
        if k < steps {
            let p = &ctl.problem;
            let next = &p.a * &x + &p.b * &u;
            states.push(std::mem::replace(&mut x, next));
        } else {
            states.push(x.clone());
        }
        inputs.push(u);
    }
    MpcRun {
        states,
        inputs,
        controller: ctl,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, b: f64, q: f64, p: f64, k: f64, config: MpcConfig) -> MpcProblem {
        let s = |x| DMatrix::from_element(1, 1, x);
        MpcProblem::from_parts(s(a), s(b), s(q), s(p), s(k), 0, config).unwrap()
    }

    #[test]
    fn target_values() {
        let t = Target::two_tone();
        assert_eq!(t.eval(0), 0.0);
        let expect = -10.0 * 0.2f64.sin() + 3.0 * 0.5f64.sin();
        assert!((t.eval(1) - expect).abs() < 1e-15);
    }

    #[test]
    fn stage_cost_properties() {
        let cfg = MpcConfig {
            target: Target::zero(),
            ..Default::default()
        };
        let pr = scalar(0.5, 1.0, 1.0, 4.0 / 3.0, 0.0, cfg);
        let z = DVector::zeros(1);
        assert_eq!(pr.stage_cost(3, &z, &z), 0.0);
        // saturation inactive: within 1% once l_e <= 0.1 c_le
        let x = DVector::from_element(1, 30.0);
        let u = DVector::from_element(1, 20.0);
        let le = pr.tracking_cost(0, &x, &u);
        assert!(le <= 0.1 * 1e5);
        let l = pr.stage_cost(0, &x, &u);
        let plain = le + pr.stabilizer_cost(&x);
        assert!((l - plain).abs() <= 0.01 * plain);
        // and never above c_le pi/2 + l_s
        let huge = DVector::from_element(1, 1e8);
        assert!(pr.stage_cost(0, &huge, &huge) <= 1e5 * FRAC_PI_2 + pr.stabilizer_cost(&huge) + 1e-6);
    }

    #[test]
    fn zero_problem_has_zero_solution() {
        let cfg = MpcConfig {
            target: Target::zero(),
            horizon: 5,
            ..Default::default()
        };
        let pr = scalar(1.2, 1.0, 1.0, 3.0, -0.9, cfg);
        let sol = pr.solve(0, &DVector::zeros(1), DVector::zeros(5));
        assert!(sol.converged);
        assert_eq!(sol.cost, 0.0);
        assert!(sol.inputs.iter().all(|u| u[0] == 0.0));
    }

    #[test]
    fn one_step_quadratic_minimizer() {
        // c_le so large that atan is the identity to machine precision
        let cfg = MpcConfig {
            horizon: 1,
            c_le: 1e15,
            c_s: 1.0,
            target: Target::constant(0.7),
            ..Default::default()
        };
        let (a, b, p, x0) = (1.3, 0.8, 2.5, 1.1);
        let pr = scalar(a, b, 1.0, p, 0.0, cfg);
        let sol = pr.solve(0, &DVector::from_element(1, x0), DVector::zeros(1));
        let expect = -p * b * a * x0 / (1.0 + p * b * b);
        assert!((sol.inputs[0][0] - expect).abs() < 1e-6, "{} vs {expect}", sol.inputs[0][0]);
        assert!(sol.converged);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let cfg = MpcConfig {
            horizon: 4,
            c_le: 50.0,
            c_s: 0.3,
            target: Target::two_tone(),
            ..Default::default()
        };
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.4, -0.3, 1.1]);
        let b = DMatrix::from_row_slice(2, 1, &[0.2, 1.0]);
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let p = DMatrix::from_row_slice(2, 2, &[5.0, 1.0, 1.0, 4.0]);
        let k = DMatrix::from_row_slice(1, 2, &[-0.5, -0.8]);
        let pr = MpcProblem::from_parts(a, b, q, p, k, 1, cfg).unwrap();
        let x0 = DVector::from_vec(vec![1.5, -2.0]);
        let u = DVector::from_vec(vec![0.3, -1.2, 2.0, 0.7]);
        let (_, g) = pr.cost_and_gradient(7, &x0, &u);
        for i in 0..4 {
            let h = 1e-6;
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (pr.cost(7, &x0, &up) - pr.cost(7, &x0, &dn)) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * fd.abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn cost_matches_rollout_of_returned_plan() {
        let cfg = MpcConfig {
            horizon: 6,
            ..Default::default()
        };
        let pr = scalar(1.1, 1.0, 1.0, 2.0, -0.6, cfg);
        let x0 = DVector::from_element(1, 2.0);
        let sol = pr.solve(3, &x0, pr.gain_rollout(&x0));
        let flat = DVector::from_iterator(6, sol.inputs.iter().map(|u| u[0]));
        assert!((pr.cost(3, &x0, &flat) - sol.cost).abs() <= 1e-9 * sol.cost.max(1.0));
        assert_eq!(pr.rollout(&x0, &flat), sol.states);
        assert!(sol.cost <= sol.warm_cost);
    }
}
