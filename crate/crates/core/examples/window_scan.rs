//! Scans window lengths for the benchmark plant and reports where the
//! stability condition `c_psi * psi(v) < 1` starts to hold.

use fracctl::presets::benchmark_model;
use fracctl::synthesis::{scan_v, AnalysisParams};

fn main() {
    let model = benchmark_model(true, 0.5);
    let rows = scan_v(&model, &AnalysisParams::default(), 1..=20, 1.0, 0.0);
    println!("{:>3} {:>12} {:>12} {:>12} {:>9} {:>12}", "v", "psi", "c_psi", "c_psi psi", "feasible", "c_gamma");
    for r in &rows {
        let c_gamma = r.c_gamma.map_or("-".to_string(), |c| format!("{c:.4e}"));
        println!(
            "{:>3} {:>12.4e} {:>12.4e} {:>12.4e} {:>9} {:>12}",
            r.v, r.psi, r.c_psi, r.condition, r.feasible, c_gamma
        );
    }
    match rows.iter().find(|r| r.feasible) {
        Some(r) => println!("smallest feasible window: v = {}", r.v),
        None => println!("no feasible window up to v = 20"),
    }
}
