//! The plant follows a receding-horizon reference whose first state tracks
//! a two-tone target.

use nalgebra::DVector;

use fracctl::mpc::{MpcConfig, MpcController, MpcProblem};
use fracctl::presets::benchmark_model;
use fracctl::sim::{run_track_vapprox, Scenario, ScenarioKind};
use fracctl::synthesis::{synthesize, AnalysisParams};

fn main() -> fracctl::Result<()> {
    let model = benchmark_model(true, 0.0);
    let syn = synthesize(&model, 9, &AnalysisParams::default())?;
    let config = MpcConfig::default();
    let target = config.target.clone();
    let mut ctl = MpcController::new(MpcProblem::new(&syn.design, config)?);
    let scenario = Scenario::new(ScenarioKind::TrackVApprox, 300, DVector::zeros(2));
    let xe0 = DVector::zeros(syn.design.vapprox.dim());
    let run = run_track_vapprox(&model, &syn, &scenario, xe0, |k: usize, x_e: &DVector<f64>| {
        Ok(ctl.step(k, x_e))
    })?;
    println!("  k     p_d(k)     x_r1(k)      x_1(k)");
    for k in (0..=300).step_by(25) {
        let xr = &run.trajectory.ref_states.as_ref().unwrap()[k];
        println!("{k:>3} {:>10.4} {:>11.4} {:>11.4}", target.eval(k), xr[0], run.trajectory.states[k][0]);
    }
    println!("ultimate ||e|| = {:.4}, predicted d = {:.4e}", run.ultimate_error, run.d.unwrap());
    let unconverged = ctl.records().iter().filter(|r| !r.converged).count();
    println!("optimizer: {} solves, {unconverged} hit the iteration cap", ctl.records().len());
    Ok(())
}
