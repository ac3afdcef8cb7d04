//! Command front end behind the `fracctl` binary.
//!
//! Exit codes: `0` success (a diverged simulation is still a success), `1`
//! configuration or model error, `2` no feasible window in the scanned range,
//! `3` runtime failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use crate::config::{Config, DisturbanceSpec, KindSpec, ReferenceSource, SignalSpec};
use crate::error::Error;
use crate::frac::{coeff_table, phi_tail, FracOrder};
use crate::model::FosModel;
use crate::mpc::{MpcController, MpcProblem};
use crate::output::{self, SummaryReport};
use crate::sim::{run_regulation, run_track_fos, run_track_vapprox, FosReference};
use crate::synthesis::{find_min_v, scan_v, synthesize, AnalysisParams, SynthesisResult};
use crate::trajectory::Trajectory;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracctl", version, about = "Feedback design and simulation for fractional-order difference systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Seed of the disturbance generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Window length; for `analyze` only this window is evaluated.
    #[arg(long)]
    pub v: Option<usize>,
    /// Number of simulated steps.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan windows v and report psi(v), c_psi, feasibility, c_gamma and d.
    Analyze {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the scenario in the configuration file on the exact plant.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Track a receding-horizon reference generated on the v-approximation.
    MpcTrack {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Dump coefficient tables c_j^a and tails phi_a(v).
    Coeffs {
        /// Take the orders from this model instead of `--order`.
        config: Option<PathBuf>,
        /// Order to tabulate; repeatable. Defaults to 1.7.
        #[arg(long = "order")]
        orders: Vec<f64>,
        /// Largest lag j (and window v) in the table.
        #[arg(long, default_value_t = 20)]
        horizon: usize,
        /// Also write `coeffs.csv` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(e: impl ToString) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl ToString) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }

    /// Model and parameter problems are the user's to fix; everything else
    /// happened while running.
    fn classify(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidOrder(_)
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch(_)
            | Error::SingularAggregateMatrix { .. } => Self::config(e),
            _ => Self::runtime(e),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, stdout, stderr),
        Err(e) => {
            let _ = write!(stderr, "{e}");
            // --help and --version are not errors
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Analyze { config, overrides } => analyze(&config, &overrides, stdout),
        Command::Simulate { config, overrides } => simulate(&config, &overrides, false, stdout),
        Command::MpcTrack { config, overrides } => simulate(&config, &overrides, true, stdout),
        Command::Coeffs {
            config,
            orders,
            horizon,
            out,
        } => coeffs(config.as_deref(), orders, horizon, out.as_deref(), stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path, o: &Overrides) -> Result<Config, Failure> {
    let mut cfg = Config::load(path).map_err(Failure::config)?;
    if let Some(v) = o.v {
        cfg.analysis.v = Some(v);
    }
    if let Some(s) = cfg.scenario.as_mut() {
        if let Some(seed) = o.seed {
            s.seed = seed;
        }
        if let Some(h) = o.horizon {
            s.horizon = h;
        }
    }
    if let Some(dir) = &o.out {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn out_path(cfg: &Config, name: &str) -> PathBuf {
    Path::new(&cfg.output.dir).join(name)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn model_and_params(cfg: &Config) -> Result<(FosModel, AnalysisParams), Failure> {
    let model = cfg.build_model().map_err(Failure::classify)?;
    let params = cfg.analysis_params().map_err(Failure::classify)?;
    Ok((model, params))
}

fn analyze(path: &Path, o: &Overrides, stdout: &mut dyn Write) -> CmdResult {
    let cfg = load(path, o)?;
    let (model, params) = model_and_params(&cfg)?;
    let a = &cfg.analysis;
    let rows = match a.v {
        Some(v) => scan_v(&model, &params, [v], a.b_xr, a.b_ur),
        None => scan_v(&model, &params, 1..=a.v_max, a.b_xr, a.b_ur),
    };
    let table = output::scan_table(&rows);
    let _ = write!(stdout, "{table}");
    let best = rows.iter().find(|r| r.feasible).map(|r| r.v);
    let range = match a.v {
        Some(v) => format!("v = {v}"),
        None => format!("1..={}", a.v_max),
    };
    match best {
        Some(v) => {
            let _ = writeln!(stdout, "smallest feasible window: v = {v}");
        }
        None => {
            let _ = writeln!(stdout, "no feasible window in {range}");
        }
    }
    if !cfg.output.scan.is_empty() {
        write_file(&out_path(&cfg, &cfg.output.scan), &output::scan_csv(&rows))?;
    }
    Ok(if best.is_some() { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn design(cfg: &Config, model: &FosModel, params: &AnalysisParams) -> Result<SynthesisResult, Failure> {
    match cfg.analysis.v {
        Some(v) => synthesize(model, v, params).map_err(Failure::classify),
        None => find_min_v(model, params, cfg.analysis.v_max).map_err(|e| match e {
            Error::InfeasibleUpTo(_) => Failure::runtime(format!("{e}; set analysis.v to force a window")),
            e => Failure::classify(e),
        }),
    }
}

fn signal_input(spec: &SignalSpec, m: usize) -> impl Fn(usize) -> DVector<f64> {
    let target = spec.to_target();
    move |k| DVector::from_element(m, target.eval(k))
}

fn vector(v: &Option<Vec<f64>>, n: usize, what: &str) -> Result<DVector<f64>, Failure> {
    match v {
        None => Ok(DVector::zeros(n)),
        Some(x) if x.len() == n => Ok(DVector::from_vec(x.clone())),
        Some(x) => Err(Failure::config(format!("{what} has length {}, expected {n}", x.len()))),
    }
}

/// Everything a finished run reports besides its trajectory.
struct RunOutput {
    traj: Trajectory,
    report: SummaryReport,
    mpc_csv: Option<String>,
}

fn simulate(path: &Path, o: &Overrides, force_mpc: bool, stdout: &mut dyn Write) -> CmdResult {
    let mut cfg = load(path, o)?;
    if force_mpc {
        let s = cfg
            .scenario
            .as_mut()
            .ok_or_else(|| Failure::config("missing [scenario] table"))?;
        s.kind = KindSpec::TrackVapprox;
        s.reference.get_or_insert_with(Default::default).source = ReferenceSource::Mpc;
    }
    let (model, params) = model_and_params(&cfg)?;
    let scenario = cfg.scenario().map_err(Failure::classify)?;
    let section = cfg.scenario_section().map_err(Failure::classify)?.clone();
    if scenario.x0.len() != model.state_dim() {
        return Err(Failure::config(format!(
            "scenario.x0 has length {}, expected {}",
            scenario.x0.len(),
            model.state_dim()
        )));
    }
    let mpc_config = cfg.mpc_config();
    mpc_config.validate().map_err(Failure::classify)?;
    let syn = design(&cfg, &model, &params)?;

    let (n, m) = (model.state_dim(), model.input_dim());
    let reference = section.reference.clone().unwrap_or_default();
    let xr0 = vector(&reference.x0, n, "scenario.reference.x0")?;
    let signal = signal_input(&reference.input.clone().unwrap_or_default(), m);
    let gain = &syn.design.gain;

    let mut report = SummaryReport {
        kind: match section.kind {
            KindSpec::Regulate => "regulate",
            KindSpec::TrackFos => "track-fos",
            KindSpec::TrackVapprox => "track-vapprox",
        }
        .into(),
        v: syn.v(),
        seed: (section.disturbance == DisturbanceSpec::Uniform).then_some(section.seed),
        b_w: scenario.noise_bound(),
        gamma: syn.gamma(scenario.noise_bound()),
        spectral_radius: syn.design.spectral_radius,
        condition: syn.constants().condition,
        ..Default::default()
    };

    let run = match section.kind {
        KindSpec::Regulate => RunOutput {
            traj: run_regulation(&model, &syn, &scenario).map_err(Failure::classify)?,
            report,
            mpc_csv: None,
        },
        KindSpec::TrackFos => {
            if reference.source == ReferenceSource::Mpc {
                return Err(Failure::config(
                    "scenario.reference.source = \"mpc\" requires kind = \"track-vapprox\"",
                ));
            }
            // the reference is a closed-loop solution of the model, so it stays
            // bounded even when the model is open-loop unstable
            let va = &syn.design.vapprox;
            let fos_ref = FosReference::generate(&model, xr0, scenario.horizon, |k, sim| {
                gain * va.assemble(sim.states(), sim.inputs(), k) + signal(k)
            })
            .map_err(Failure::classify)?;
            let traj = run_track_fos(&model, &syn, &scenario, &fos_ref).map_err(Failure::classify)?;
            let sup = |v: &[DVector<f64>]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            report.b_xr = Some(sup(&fos_ref.states));
            report.b_ur = Some(sup(&fos_ref.inputs));
            RunOutput { traj, report, mpc_csv: None }
        }
        KindSpec::TrackVapprox => {
            let xe0 = syn.design.vapprox.initial_state(&xr0);
            let (tracking, mpc_csv) = match reference.source {
                ReferenceSource::Signal => {
                    let exo = |k: usize, x_e: &DVector<f64>| Ok(gain * x_e + signal(k));
                    (run_track_vapprox(&model, &syn, &scenario, xe0, exo), None)
                }
                ReferenceSource::Mpc => {
                    let problem = MpcProblem::new(&syn.design, mpc_config).map_err(Failure::classify)?;
                    let mut ctl = MpcController::new(problem);
                    let exo = |k: usize, x_e: &DVector<f64>| Ok(ctl.step(k, x_e));
                    let tracking = run_track_vapprox(&model, &syn, &scenario, xe0, exo);
                    let (csv, extra) = mpc_diagnostics(&ctl);
                    report.extra = extra;
                    (tracking, Some(csv))
                }
            };
            let tracking = tracking.map_err(Failure::classify)?;
            report.b_xr = Some(tracking.b_xr);
            report.b_ur = Some(tracking.b_ur);
            report.d = tracking.d;
            RunOutput {
                traj: tracking.trajectory,
                report,
                mpc_csv,
            }
        }
    };

    let summary = run.report.render(&run.traj);
    let o = &cfg.output;
    if !o.csv.is_empty() {
        write_file(&out_path(&cfg, &o.csv), &output::csv_string(&run.traj))?;
    }
    if !o.summary.is_empty() {
        write_file(&out_path(&cfg, &o.summary), &summary)?;
    }
    if !o.svg.is_empty() {
        write_file(&out_path(&cfg, &o.svg), &output::trajectory_svg(&run.traj))?;
    }
    if let Some(csv) = run.mpc_csv {
        write_file(&out_path(&cfg, "mpc.csv"), &csv)?;
    }
    let _ = write!(stdout, "{summary}");
    Ok(EXIT_OK)
}

/// Per-step optimizer diagnostics and summary lines.
fn mpc_diagnostics(ctl: &MpcController) -> (String, Vec<(String, String)>) {
    let records = ctl.records();
    let margins = ctl.decrease_margins(ctl.alpha_coefficient());
    let mut csv = String::from("k,value,extended_cost,iterations,grad_inf_norm,converged,decrease_margin\n");
    for (i, r) in records.iter().enumerate() {
        let margin = margins.get(i).copied().unwrap_or(f64::NAN);
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{},{:.16e},{},{:.16e}\n",
            r.k, r.value, r.extended_cost, r.iterations, r.grad_inf_norm, r.converged as u8, margin
        ));
    }
    let worse = records.iter().filter(|r| r.value > r.extended_cost).count();
    let unconverged = records.iter().filter(|r| !r.converged).count();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let extra = vec![
        ("mpc_steps".into(), records.len().to_string()),
        ("mpc_worse_than_warm".into(), worse.to_string()),
        ("mpc_unconverged".into(), unconverged.to_string()),
        ("mpc_min_decrease_margin".into(), format!("{min_margin:.6e}")),
    ];
    (csv, extra)
}

fn coeffs(
    config: Option<&Path>,
    mut orders: Vec<f64>,
    horizon: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CmdResult {
    if let Some(path) = config {
        let cfg = Config::load(path).map_err(Failure::config)?;
        let m = &cfg.model;
        for t in m.state.iter().chain(&m.input).chain(&m.disturbance) {
            if !orders.contains(&t.order) {
                orders.push(t.order);
            }
        }
    }
    if orders.is_empty() {
        orders.push(1.7);
    }
    let orders: Vec<FracOrder> = orders
        .into_iter()
        .map(FracOrder::new)
        .collect::<Result<_, _>>()
        .map_err(Failure::config)?;
    let tables: Vec<_> = orders.iter().map(|&a| coeff_table(a, horizon)).collect();

    let mut csv = String::from("j");
    for a in &orders {
        csv.push_str(&format!(",c_{a},phi_{a}"));
    }
    csv.push('\n');
    let mut text = format!("{:>4}", "j");
    for a in &orders {
        text.push_str(&format!("  {:>24}  {:>24}", format!("c_j^{a}"), format!("phi_{a}(j)")));
    }
    text.push('\n');
    for j in 0..=horizon {
        csv.push_str(&j.to_string());
        text.push_str(&format!("{j:>4}"));
        for (a, t) in orders.iter().zip(&tables) {
            let (c, phi) = (t.coeffs()[j], phi_tail(*a, j));
            csv.push_str(&format!(",{c:.16e},{phi:.16e}"));
            text.push_str(&format!("  {c:>24.16e}  {phi:>24.16e}"));
        }
        csv.push('\n');
        text.push('\n');
    }
    let _ = write!(stdout, "{text}");
    if let Some(dir) = out {
        write_file(&dir.join("coeffs.csv"), &csv)?;
    }
    Ok(EXIT_OK)
}
