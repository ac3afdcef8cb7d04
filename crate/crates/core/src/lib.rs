//! Finite-dimensional feedback control of linear discrete-time
//! fractional-order systems.
//!
//! The crate covers the whole pipeline:
//!
//! - [`frac`]: Grünwald–Letnikov coefficients and exponential tails `phi_a(v)`.
//! - [`model`]: the fractional model, its explicit recursion and an exact
//!   full-memory simulator.
//! - [`vapprox`]: the finite-window augmented linear system and its residual.
//! - [`synthesis`]: LQR gain, discrete Lyapunov solution, stability constants,
//!   and the search for the smallest admissible window.
//! - [`sim`]: regulation and tracking scenarios on the exact plant.
//! - [`mpc`]: receding-horizon reference generator on the v-approximation.
//! - [`config`], [`output`], [`cli`]: configuration files, CSV/SVG output and
//!   the command front end used by the `fracctl` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod frac;
pub mod linalg;
pub mod model;
pub mod mpc;
pub mod output;
pub mod presets;
pub mod rng;
pub mod sim;
pub mod synthesis;
pub mod trajectory;
pub mod vapprox;

pub use error::{Error, Result};
pub use frac::{coeff_table, gl_coefficient, phi_tail, CoeffTable, FracOrder};
pub use model::{simulate_exact, validate_model, ExactSimulator, FosModel, ReformCoeffs, Term};
pub use synthesis::{
    compute_constants, compute_psi, compute_tracking_bound_d, find_min_v, scan_v, solve_dlyap,
    synthesize, synthesize_gain, AnalysisParams, SynthesisResult,
};
pub use trajectory::Trajectory;
pub use vapprox::{build_v_approx, residual, VApprox};
