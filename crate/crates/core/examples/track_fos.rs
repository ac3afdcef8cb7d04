//! Tracking a trajectory of the fractional model itself from a mismatched
//! initial condition.

use nalgebra::DVector;

use fracctl::presets::benchmark_model;
use fracctl::sim::{run_track_fos, FosReference, RunSummary, Scenario, ScenarioKind};
use fracctl::synthesis::{synthesize, AnalysisParams};

fn main() -> fracctl::Result<()> {
    let model = benchmark_model(true, 0.0);
    let syn = synthesize(&model, 10, &AnalysisParams::default())?;
    let va = &syn.design.vapprox;
    let gain = &syn.design.gain;
    // the reference is stabilized by the same gain so that it stays bounded
    let reference = FosReference::generate(&model, DVector::from_vec(vec![2.0, 0.0]), 300, |k, sim| {
        gain * va.assemble(sim.states(), sim.inputs(), k) + DVector::from_element(1, (0.05 * k as f64).sin())
    })?;
    let scenario = Scenario::new(ScenarioKind::TrackFos, 300, DVector::from_vec(vec![0.0, 0.0]));
    let traj = run_track_fos(&model, &syn, &scenario, &reference)?;
    let s = RunSummary::of(&traj);
    println!("initial ||e|| = {:.3}", traj.error_norms()[0]);
    println!("sup ||e||     = {:.3}", s.sup_norm);
    println!("final ||e||   = {:.3e}", s.final_norm);
    Ok(())
}
