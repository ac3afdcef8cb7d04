//! Loads a configuration file, runs its analysis and writes it back out.
//!
//! `cargo run --example config_file -- configs/benchmark.toml`

use fracctl::config::Config;
use fracctl::synthesis::find_min_v;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/benchmark.toml").to_string());
    let cfg = Config::load(&path)?;
    let model = cfg.build_model()?;
    println!(
        "model: n = {}, m = {}, p = {}, b_w = {}",
        model.state_dim(),
        model.input_dim(),
        model.dist_dim(),
        model.b_w()
    );
    let syn = find_min_v(&model, &cfg.analysis_params()?, cfg.analysis.v_max)?;
    println!("smallest feasible window: v = {}", syn.v());
    print!("{}", cfg.to_toml()?);
    Ok(())
}
