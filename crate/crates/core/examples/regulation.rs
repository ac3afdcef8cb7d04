//! Noisy regulation of the benchmark plant with the smallest certified window.

use nalgebra::DVector;

use fracctl::presets::benchmark_model;
use fracctl::rng::Disturbance;
use fracctl::sim::{run_regulation, RunSummary, Scenario, ScenarioKind};
use fracctl::synthesis::{find_min_v, AnalysisParams};

fn main() -> fracctl::Result<()> {
    let model = benchmark_model(true, 0.5);
    let syn = find_min_v(&model, &AnalysisParams::default(), 20)?;
    let scenario = Scenario::new(ScenarioKind::Regulate, 400, DVector::from_vec(vec![1.0, 1.0]))
        .with_disturbance(Disturbance::Uniform { b_w: 0.5, seed: 1 });
    let traj = run_regulation(&model, &syn, &scenario)?;
    let s = RunSummary::of(&traj);
    println!("window v = {}, rho(A_K) = {:.4}", syn.v(), syn.design.spectral_radius);
    println!("sup ||x||            = {:.4}", s.sup_norm);
    println!("ultimate ||x||       = {:.4}", s.ultimate_norm);
    println!("bound c_gamma * b_w  = {:.4e}", s.bound.unwrap());
    Ok(())
}
