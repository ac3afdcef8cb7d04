//! TOML scenario files.
//!
//! A file has up to five tables; only `[model]` is required.
//!
//! ```toml
//! [model]
//! b_w = 0.5
//! [[model.state]]            # one entry per term A_i * Δ^{a_i}
//! matrix = [[1.0, 0.0], [0.0, 1.0]]
//! order = 0.0
//! [[model.input]]            # B_i * Δ^{b_i}
//! matrix = [[0.0], [1.0]]
//! order = 0.0
//! [[model.disturbance]]      # G_i * Δ^{g_i}, optional
//! matrix = [[1.0, 0.0], [0.0, 1.0]]
//! order = 0.0
//!
//! [analysis]                 # all optional
//! theta = 0.5
//! theta_hat = 0.5
//! c_rho = 0.5
//! kappa = 0.95               # default: max(0.9, (1 + c_psi psi) / 2)
//! q = 1.0                    # scalar multiple of I, or a full matrix
//! r = 1.0
//! gain = [[...]]             # user-supplied K_v instead of LQR
//! v = 9                      # fixed window; otherwise the smallest feasible one
//! v_max = 64
//! b_xr = 1.0                 # reference bounds used for d in the scan table
//! b_ur = 0.0
//!
//! [scenario]
//! kind = "regulate"          # or "track-fos", "track-vapprox"
//! horizon = 400
//! x0 = [1.0, 1.0]
//! disturbance = "uniform"    # or "none"; amplitude defaults to model.b_w
//! seed = 1
//! [scenario.reference]       # tracking only
//! source = "signal"          # "signal" or "mpc"
//! x0 = [0.0, 0.0]
//! input = { offset = 0.0, sines = [{ amplitude = 1.0, frequency = 0.1, phase = 0.0 }] }
//!
//! [mpc]                      # receding-horizon reference generator
//! horizon = 20
//! c_le = 1e5
//! c_s = 1e-5
//! target = { sines = [{ amplitude = -10.0, frequency = 0.2 }, { amplitude = 3.0, frequency = 0.5 }] }
//!
//! [output]
//! dir = "out"
//! csv = "trajectory.csv"
//! summary = "summary.txt"
//! svg = "trajectory.svg"
//! ```
//!
//! Unknown keys are rejected and every error names the offending path.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac::FracOrder;
use crate::model::{FosModel, Term};
use crate::mpc::{MpcConfig, Sine, Target};
use crate::rng::Disturbance;
use crate::sim::{Scenario, ScenarioKind};
use crate::synthesis::{AnalysisParams, GainMethod, Weight};

pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mpc: Option<MpcSection>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputSection,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub matrix: Matrix,
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub b_w: f64,
    pub state: Vec<TermSpec>,
    pub input: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disturbance: Vec<TermSpec>,
}

/// `q = 2.0` means `2 I`; a nested list is a full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Scale(f64),
    Matrix(Matrix),
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Scale(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub theta: f64,
    pub theta_hat: f64,
    pub c_rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub q: WeightSpec,
    pub r: WeightSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain: Option<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    pub v_max: usize,
    pub b_xr: f64,
    pub b_ur: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let p = AnalysisParams::default();
        Self {
            theta: p.theta,
            theta_hat: p.theta_hat,
            c_rho: p.c_rho,
            kappa: None,
            q: WeightSpec::default(),
            r: WeightSpec::default(),
            gain: None,
            v: None,
            v_max: 64,
            b_xr: 1.0,
            b_ur: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindSpec {
    #[default]
    Regulate,
    TrackFos,
    TrackVapprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisturbanceSpec {
    #[default]
    None,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default)]
    pub kind: KindSpec,
    pub horizon: usize,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    /// Amplitude of the uniform noise; defaults to `model.b_w`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_bound: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSource {
    #[default]
    Signal,
    Mpc,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    #[serde(default)]
    pub source: ReferenceSource,
    /// Initial reference state `x_r(0)`; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Reference input `u_r(k)` applied to every input channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<SignalSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sines: Vec<SineSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineSpec {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

impl SignalSpec {
    pub fn to_target(&self) -> Target {
        Target {
            offset: self.offset,
            sines: self
                .sines
                .iter()
                .map(|s| Sine {
                    amplitude: s.amplitude,
                    frequency: s.frequency,
                    phase: s.phase,
                })
                .collect(),
        }
    }

    pub fn from_target(t: &Target) -> Self {
        Self {
            offset: t.offset,
            sines: t
                .sines
                .iter()
                .map(|s| SineSpec {
                    amplitude: s.amplitude,
                    frequency: s.frequency,
                    phase: s.phase,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MpcSection {
    pub horizon: usize,
    pub c_le: f64,
    pub c_s: f64,
    pub tracking_weight: f64,
    pub input_weight: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub target: SignalSpec,
}

impl Default for MpcSection {
    fn default() -> Self {
        let c = MpcConfig::default();
        Self {
            horizon: c.horizon,
            c_le: c.c_le,
            c_s: c.c_s,
            tracking_weight: c.tracking_weight,
            input_weight: c.input_weight,
            max_iter: c.max_iter,
            grad_tol: c.grad_tol,
            target: SignalSpec::from_target(&c.target),
        }
    }
}

impl MpcSection {
    pub fn to_config(&self) -> MpcConfig {
        MpcConfig {
            horizon: self.horizon,
            c_le: self.c_le,
            c_s: self.c_s,
            tracking_weight: self.tracking_weight,
            input_weight: self.input_weight,
            target: self.target.to_target(),
            max_iter: self.max_iter,
            grad_tol: self.grad_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub csv: String,
    pub summary: String,
    /// Plot file; empty disables the plot.
    pub svg: String,
    pub scan: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            csv: "trajectory.csv".into(),
            summary: "summary.txt".into(),
            svg: "trajectory.svg".into(),
            scan: "scan.csv".into(),
        }
    }
}

fn matrix(rows: &Matrix, what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{what}: rows have different lengths")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn terms(specs: &[TermSpec], what: &str) -> Result<Vec<Term>> {
    specs
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Ok(Term::new(
                matrix(&t.matrix, &format!("{what}[{i}].matrix"))?,
                FracOrder::new(t.order)?,
            ))
        })
        .collect()
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("at `{path}`: {}", e.into_inner().message()))
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_model(&self) -> Result<FosModel> {
        let m = &self.model;
        FosModel::new(
            terms(&m.state, "model.state")?,
            terms(&m.input, "model.input")?,
            terms(&m.disturbance, "model.disturbance")?,
            m.b_w,
        )
    }

    pub fn analysis_params(&self) -> Result<AnalysisParams> {
        let a = &self.analysis;
        let weight = |w: &WeightSpec, what: &str| -> Result<Weight> {
            Ok(match w {
                WeightSpec::Scale(s) => Weight::Identity(*s),
                WeightSpec::Matrix(rows) => Weight::Matrix(matrix(rows, what)?),
            })
        };
        let gain_method = match &a.gain {
            Some(rows) => GainMethod::UserSupplied(matrix(rows, "analysis.gain")?),
            None => GainMethod::RiccatiLqr,
        };
        let params = AnalysisParams {
            theta: a.theta,
            theta_hat: a.theta_hat,
            c_rho: a.c_rho,
            kappa: a.kappa,
            q: weight(&a.q, "analysis.q")?,
            r: weight(&a.r, "analysis.r")?,
            gain_method,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn mpc_config(&self) -> MpcConfig {
        self.mpc.clone().unwrap_or_default().to_config()
    }

    pub fn scenario_section(&self) -> Result<&ScenarioSection> {
        self.scenario
            .as_ref()
            .ok_or_else(|| Error::Config("missing [scenario] table".into()))
    }

    /// Scenario for the plant; `b_w` supplies the default noise amplitude.
    pub fn scenario(&self) -> Result<Scenario> {
        let s = self.scenario_section()?;
        let kind = match s.kind {
            KindSpec::Regulate => ScenarioKind::Regulate,
            KindSpec::TrackFos => ScenarioKind::TrackFos,
            KindSpec::TrackVapprox => ScenarioKind::TrackVApprox,
        };
        let disturbance = match s.disturbance {
            DisturbanceSpec::None => Disturbance::None,
            DisturbanceSpec::Uniform => Disturbance::Uniform {
                b_w: s.noise_bound.unwrap_or(self.model.b_w),
                seed: s.seed,
            },
        };
        Ok(Scenario::new(kind, s.horizon, DVector::from_vec(s.x0.clone())).with_disturbance(disturbance))
    }
}
