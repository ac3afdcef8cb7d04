//! A one-step window ignores too much memory: the LQR gain designed on it
//! destabilizes the exact plant.

use nalgebra::DVector;

use fracctl::presets::benchmark_model;
use fracctl::sim::{run_regulation, Scenario, ScenarioKind};
use fracctl::synthesis::{synthesize, AnalysisParams};

fn main() -> fracctl::Result<()> {
    let model = benchmark_model(true, 0.0);
    let x0 = DVector::from_vec(vec![1.0, 1.0]);
    for v in [1, 9] {
        let syn = synthesize(&model, v, &AnalysisParams::default())?;
        let traj = run_regulation(&model, &syn, &Scenario::new(ScenarioKind::Regulate, 500, x0.clone()))?;
        let norms = traj.state_norms();
        println!(
            "v = {v}: c_psi psi = {:.3}, rho(A_K) = {:.4}, steps = {}, final ||x|| = {:.3e}, diverged = {}",
            syn.design.constants.condition,
            syn.design.spectral_radius,
            norms.len() - 1,
            norms.last().unwrap(),
            traj.diverged
        );
    }
    Ok(())
}
