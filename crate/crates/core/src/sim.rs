//! Closed-loop scenarios on the exact full-memory plant.
//!
//! The v-approximation only ever lives inside the controller (and, for
//! reference tracking, inside the exogenous system). The plant is always the
//! exact fractional recursion, so the residual the controller ignores is
//! actually present in every run.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{ExactSimulator, FosModel, ReformCoeffs};
use crate::rng::{make_disturbance, Disturbance};
use crate::synthesis::SynthesisResult;
use crate::trajectory::Trajectory;
use crate::vapprox::residual;

/// A run is cut short once `||x(k)||` exceeds this.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Fraction of the run used to estimate the ultimate bound.
pub const ULTIMATE_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Regulate,
    TrackFos,
    TrackVApprox,
}

/// Horizon, initial condition and disturbance shared by every scenario kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Number of plant steps `K`; the trajectory holds `x(0..=K)`.
    pub horizon: usize,
    pub x0: DVector<f64>,
    pub disturbance: Disturbance,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, horizon: usize, x0: DVector<f64>) -> Self {
        Self {
            kind,
            horizon,
            x0,
            disturbance: Disturbance::None,
        }
    }

    pub fn with_disturbance(mut self, disturbance: Disturbance) -> Self {
        self.disturbance = disturbance;
        self
    }

    /// `sup_k ||w(k)||_inf` of the disturbance this scenario applies. The
    /// predicted bounds use this rather than the model's nominal `b_w`, so a
    /// noise-free run is compared against `gamma(0) = 0`.
    pub fn noise_bound(&self) -> f64 {
        match &self.disturbance {
            Disturbance::None => 0.0,
            Disturbance::Uniform { b_w, .. } => *b_w,
            Disturbance::Sequence(ws) => ws.iter().map(|w| w.amax()).fold(0.0, f64::max),
        }
    }
}

/// Exact plant plus the diagnostics every scenario records.
struct Plant<'a> {
    sim: ExactSimulator<'a>,
    coeffs: ReformCoeffs,
    v: usize,
    w: Vec<DVector<f64>>,
    residual_norms: Vec<f64>,
    diverged: bool,
}

impl<'a> Plant<'a> {
    fn new(model: &'a FosModel, synthesis: &SynthesisResult, scenario: &Scenario) -> Result<Self> {
        check_design(model, synthesis)?;
        let w = make_disturbance(&scenario.disturbance, model.dist_dim(), scenario.horizon);
        Ok(Self {
            sim: ExactSimulator::new(model, scenario.x0.clone())?,
            coeffs: model.reform_coeffs(scenario.horizon + 1),
            v: synthesis.v(),
            w,
            residual_norms: Vec::with_capacity(scenario.horizon + 1),
            diverged: false,
        })
    }

    /// Applies `u(k)` and records `||r(k)||`; flags divergence.
    fn advance(&mut self, u: DVector<f64>) -> Result<()> {
        let k = self.sim.time();
        let x_next = self.sim.step(u, self.w[k].clone())?;
        let blown = !(x_next.norm() <= DIVERGENCE_THRESHOLD);
        let r = residual(
            &self.coeffs,
            self.v,
            self.sim.states(),
            self.sim.inputs(),
            self.sim.disturbances(),
            k,
        );
        self.residual_norms.push(r.norm());
        self.diverged |= blown;
        Ok(())
    }

    /// Closes the record: appends the input evaluated at the last state so
    /// all channels share one length.
    fn finish(self, u_last: DVector<f64>) -> Trajectory {
        let k = self.sim.time();
        let mut inputs = self.sim.inputs().to_vec();
        inputs.push(u_last);
        let mut dists = self.sim.disturbances().to_vec();
        dists.push(self.w[k].clone());
        let mut residual_norms = self.residual_norms;
        // r(K) would need u(K) and w(K) applied; it is only defined once they are
        residual_norms.push(f64::NAN);
        let mut traj = Trajectory::new(self.sim.states().to_vec(), inputs, dists);
        traj.residual_norms = Some(residual_norms);
        traj.diverged = self.diverged;
        traj
    }
}

fn check_design(model: &FosModel, synthesis: &SynthesisResult) -> Result<()> {
    let l = synthesis.design.vapprox.layout();
    if l.n != model.state_dim() || l.m != model.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "design was built for n = {}, m = {} but the model has n = {}, m = {}",
            l.n,
            l.m,
            model.state_dim(),
            model.input_dim()
        )));
    }
    Ok(())
}

/// Regulation to the origin with `u(k) = K_v x̃(k)`.
///
/// Feasibility of the design is not required; an infeasible window is how the
/// unstable case is reproduced. The bound channel is `c_gamma * b_w` when the
/// design is certified.
pub fn run_regulation(
    model: &FosModel,
    synthesis: &SynthesisResult,
    scenario: &Scenario,
) -> Result<Trajectory> {
    let mut plant = Plant::new(model, synthesis, scenario)?;
    let va = &synthesis.design.vapprox;
    let gain = &synthesis.design.gain;
    let control = |sim: &ExactSimulator<'_>| {
        let k = sim.time();
        gain * va.assemble(sim.states(), sim.inputs(), k)
    };
    for _ in 0..scenario.horizon {
        let u = control(&plant.sim);
        plant.advance(u)?;
        if plant.diverged {
            break;
        }
    }
    let u_last = control(&plant.sim);
    let mut traj = plant.finish(u_last);
    traj.bound = synthesis.gamma(scenario.noise_bound());
    Ok(traj)
}

/// A noise-free solution `(x_r, u_r)` of the fractional model.
#[derive(Debug, Clone, PartialEq)]
pub struct FosReference {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
}

impl FosReference {
    /// Rolls the exact model from `x_r(0)` with `w = 0`. The input may be a
    /// feedback on the reference's own history, which keeps references of
    /// unstable models bounded.
    pub fn generate<U>(model: &FosModel, xr0: DVector<f64>, steps: usize, u_r: U) -> Result<Self>
    where
        U: FnMut(usize, &ExactSimulator<'_>) -> DVector<f64>,
    {
        let p = model.dist_dim();
        let traj = crate::model::simulate_exact(model, xr0, steps, u_r, |_| DVector::zeros(p))?;
        Ok(Self {
            states: traj.states,
            inputs: traj.inputs,
        })
    }

    pub fn zero(model: &FosModel, steps: usize) -> Self {
        Self {
            states: vec![model.zero_state(); steps + 1],
            inputs: vec![DVector::zeros(model.input_dim()); steps + 1],
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Tracking of a fractional-model solution with `u = u_r + K_v (x̃ - x̃_r)`.
///
/// The reference must cover `0..=horizon`. Logged errors are `e = x - x_r`.
pub fn run_track_fos(
    model: &FosModel,
    synthesis: &SynthesisResult,
    scenario: &Scenario,
    reference: &FosReference,
) -> Result<Trajectory> {
    if reference.len() < scenario.horizon + 1 || reference.inputs.len() < scenario.horizon + 1 {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} samples, the horizon needs {}",
            reference.len(),
            scenario.horizon + 1
        )));
    }
    let mut plant = Plant::new(model, synthesis, scenario)?;
    let va = &synthesis.design.vapprox;
    let gain = &synthesis.design.gain;
    let control = |sim: &ExactSimulator<'_>| {
        let k = sim.time();
        let x_tilde = va.assemble(sim.states(), sim.inputs(), k);
        let xr_tilde = va.assemble(&reference.states, &reference.inputs, k);
        &reference.inputs[k] + gain * (x_tilde - xr_tilde)
    };
    for _ in 0..scenario.horizon {
        let u = control(&plant.sim);
        plant.advance(u)?;
        if plant.diverged {
            break;
        }
    }
    let u_last = control(&plant.sim);
    let mut traj = plant.finish(u_last);
    let len = traj.len();
    let xr = reference.states[..len].to_vec();
    let ur = reference.inputs[..len].to_vec();
    traj.errors = Some(traj.states.iter().zip(&xr).map(|(x, r)| x - r).collect());
    traj.ref_states = Some(xr);
    traj.ref_inputs = Some(ur);
    traj.bound = synthesis.gamma(scenario.noise_bound());
    Ok(traj)
}

/// Supplies the exogenous input `u_r(k)` given the exogenous state `x_e(k)`.
pub trait ExoInput {
    fn input(&mut self, k: usize, x_e: &DVector<f64>) -> Result<DVector<f64>>;
}

impl<F> ExoInput for F
where
    F: FnMut(usize, &DVector<f64>) -> Result<DVector<f64>>,
{
    fn input(&mut self, k: usize, x_e: &DVector<f64>) -> Result<DVector<f64>> {
        self(k, x_e)
    }
}

/// Result of tracking a v-approximation solution.
#[derive(Debug, Clone)]
pub struct VApproxTracking {
    pub trajectory: Trajectory,
    /// Exogenous states `x_e(0..=K)`.
    pub exo_states: Vec<DVector<f64>>,
    /// `sup ||x_r(k)||` and `sup ||u_r(k)||` realized over the run.
    pub b_xr: f64,
    pub b_ur: f64,
    /// `d` for the realized reference bounds, when the design is certified.
    pub d: Option<f64>,
    /// `gamma(b_w)`, when the design is certified.
    pub gamma: Option<f64>,
    /// `sup ||e(k)||` over the trailing half of the run.
    pub ultimate_error: f64,
}

/// Tracking of the v-approximation's own solution.
///
/// The exogenous system is `x_e(k+1) = Ã x_e(k) + B̃ u_r(k)` with
/// `x_r = C x_e`; the plant input is `u = u_r + K_v (x̃ - x_e)`. The bound
/// channel is `gamma(b_w) + d`.
pub fn run_track_vapprox<E: ExoInput>(
    model: &FosModel,
    synthesis: &SynthesisResult,
    scenario: &Scenario,
    xe0: DVector<f64>,
    mut exo: E,
) -> Result<VApproxTracking> {
    let va = &synthesis.design.vapprox;
    if xe0.len() != va.dim() {
        return Err(Error::DimensionMismatch(format!(
            "exogenous state has length {}, expected {}",
            xe0.len(),
            va.dim()
        )));
    }
    let n = model.state_dim();
    let mut plant = Plant::new(model, synthesis, scenario)?;
    let gain = &synthesis.design.gain;
    let mut x_e = xe0;
    let mut exo_states = Vec::with_capacity(scenario.horizon + 1);
    let mut ur = Vec::with_capacity(scenario.horizon + 1);

    let control = |sim: &ExactSimulator<'_>, x_e: &DVector<f64>, u_r: &DVector<f64>| {
        let k = sim.time();
        u_r + gain * (va.assemble(sim.states(), sim.inputs(), k) - x_e)
    };
    let mut k = 0;
    let u_last = loop {
        let u_r = exo.input(k, &x_e)?;
        let u = control(&plant.sim, &x_e, &u_r);
        exo_states.push(x_e.clone());
        ur.push(u_r);
        if k == scenario.horizon || plant.diverged {
            break u;
        }
        plant.advance(u)?;
        x_e = va.step(&x_e, &ur[k]);
        k += 1;
    };
    let mut traj = plant.finish(u_last);
    let xr: Vec<DVector<f64>> = exo_states.iter().map(|s| s.rows(0, n).into_owned()).collect();
    traj.errors = Some(traj.states.iter().zip(&xr).map(|(x, r)| x - r).collect());
    traj.ref_states = Some(xr);
    traj.ref_inputs = Some(ur);
    Ok(finish_vapprox(model, synthesis, scenario, traj, exo_states))
}

fn finish_vapprox(
    model: &FosModel,
    synthesis: &SynthesisResult,
    scenario: &Scenario,
    mut traj: Trajectory,
    exo_states: Vec<DVector<f64>>,
) -> VApproxTracking {
    let sup = |v: &Option<Vec<DVector<f64>>>| {
        v.as_ref()
            .map_or(0.0, |v| v.iter().map(|x| x.norm()).fold(0.0, f64::max))
    };
    let b_xr = sup(&traj.ref_states);
    let b_ur = sup(&traj.ref_inputs);
    let d = synthesis.tracking_bound_d(model, b_xr, b_ur);
    let gamma = synthesis.gamma(scenario.noise_bound());
    traj.bound = match (gamma, d) {
        (Some(g), Some(d)) => Some(g + d),
        _ => None,
    };
    let ultimate_error = Trajectory::trailing_sup(&traj.error_norms(), ULTIMATE_WINDOW);
    VApproxTracking {
        trajectory: traj,
        exo_states,
        b_xr,
        b_ur,
        d,
        gamma,
        ultimate_error,
    }
}

/// Summary numbers for a finished run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub diverged: bool,
    pub sup_norm: f64,
    /// Supremum over the trailing half of the run.
    pub ultimate_norm: f64,
    pub final_norm: f64,
    pub bound: Option<f64>,
}

impl RunSummary {
    /// Uses `||e||` when the run has an error channel, otherwise `||x||`.
    pub fn of(traj: &Trajectory) -> Self {
        let norms = traj.error_norms();
        Self {
            steps: traj.len().saturating_sub(1),
            diverged: traj.diverged,
            sup_norm: norms.iter().copied().fold(0.0, f64::max),
            ultimate_norm: Trajectory::trailing_sup(&norms, ULTIMATE_WINDOW),
            final_norm: norms.last().copied().unwrap_or(0.0),
            bound: traj.bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate_exact;
    use crate::presets::benchmark_model;
    use crate::synthesis::{synthesize, AnalysisParams};

    fn x0() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 1.0])
    }

    #[test]
    fn origin_stays_put() {
        let model = benchmark_model(true, 0.5);
        let syn = synthesize(&model, 4, &AnalysisParams::default()).unwrap();
        let sc = Scenario::new(ScenarioKind::Regulate, 50, model.zero_state());
        let traj = run_regulation(&model, &syn, &sc).unwrap();
        assert!(traj.check_consistent());
        assert!(traj.states.iter().all(|x| x.norm() == 0.0));
        assert!(traj.residual_norms.unwrap()[..50].iter().all(|&r| r == 0.0));
    }

    #[test]
    fn zero_reference_reduces_to_regulation() {
        let model = benchmark_model(true, 0.5);
        let syn = synthesize(&model, 6, &AnalysisParams::default()).unwrap();
        let sc = Scenario::new(ScenarioKind::Regulate, 120, x0())
            .with_disturbance(Disturbance::Uniform { b_w: 0.5, seed: 3 });
        let reg = run_regulation(&model, &syn, &sc).unwrap();
        let trk = run_track_fos(&model, &syn, &sc, &FosReference::zero(&model, 120)).unwrap();
        assert_eq!(reg.states, trk.states);
        assert_eq!(reg.inputs, trk.inputs);
        assert_eq!(trk.errors.as_ref().unwrap(), &reg.states);
    }

    #[test]
    fn matched_start_tracks_exactly() {
        let model = benchmark_model(true, 0.0);
        let syn = synthesize(&model, 8, &AnalysisParams::default()).unwrap();
        let reference =
            FosReference::generate(&model, x0(), 100, |k, _| DVector::from_element(1, (0.1 * k as f64).sin()))
                .unwrap();
        let sc = Scenario::new(ScenarioKind::TrackFos, 100, x0());
        let traj = run_track_fos(&model, &syn, &sc, &reference).unwrap();
        assert!(traj.errors.unwrap().iter().all(|e| e.norm() <= 1e-10));
    }

    #[test]
    fn error_system_is_the_model_driven_by_the_input_difference() {
        let model = benchmark_model(true, 0.3);
        let syn = synthesize(&model, 8, &AnalysisParams::default()).unwrap();
        let va = &syn.design.vapprox;
        let reference =
            FosReference::generate(&model, DVector::from_vec(vec![0.5, -0.2]), 80, |k, sim| {
                let fb = &syn.design.gain * va.assemble(sim.states(), sim.inputs(), k);
                fb.add_scalar(0.3 * (0.05 * k as f64).cos())
            })
            .unwrap();
        let sc = Scenario::new(ScenarioKind::TrackFos, 80, x0())
            .with_disturbance(Disturbance::Uniform { b_w: 0.3, seed: 11 });
        let traj = run_track_fos(&model, &syn, &sc, &reference).unwrap();
        let du: Vec<_> = traj.inputs.iter().zip(&reference.inputs).map(|(u, r)| u - r).collect();
        let e0 = &traj.states[0] - &reference.states[0];
        let direct = simulate_exact(&model, e0, 80, |k, _| du[k].clone(), |k| traj.disturbances[k].clone()).unwrap();
        let mut worst: f64 = 0.0;
        for (k, (a, b)) in direct.states.iter().zip(traj.errors.as_ref().unwrap()).enumerate() {
            let scale = 1.0 + traj.states[k].norm() + reference.states[k].norm();
            worst = worst.max((a - b).norm() / scale);
        }
        assert!(worst <= 1e-10, "worst {worst:e}");
    }

    #[test]
    fn window_one_diverges() {
        let model = benchmark_model(false, 0.0);
        let syn = synthesize(&model, 1, &AnalysisParams::default()).unwrap();
        assert!(!syn.is_feasible());
        let sc = Scenario::new(ScenarioKind::Regulate, 500, x0());
        let traj = run_regulation(&model, &syn, &sc).unwrap();
        let crossed = traj.state_norms().iter().position(|&x| x > 1e6);
        assert!(crossed.is_some(), "max {:?}", traj.state_norms().iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn vapprox_tracking_from_matched_state_with_zero_input() {
        let model = benchmark_model(false, 0.0);
        let syn = synthesize(&model, 8, &AnalysisParams::default()).unwrap();
        let sc = Scenario::new(ScenarioKind::TrackVApprox, 60, x0());
        let xe0 = syn.design.vapprox.initial_state(&x0());
        let m = model.input_dim();
        let run = run_track_vapprox(&model, &syn, &sc, xe0, |_k: usize, _x: &DVector<f64>| {
            Ok(DVector::zeros(m))
        })
        .unwrap();
        let t = &run.trajectory;
        assert!(t.check_consistent());
        assert_eq!(run.exo_states.len(), 61);
        // both sides follow the same closed loop until the residual kicks in at k = v
        for k in 0..=8 {
            assert!(t.errors.as_ref().unwrap()[k].norm() < 1e-12);
        }
    }
}
