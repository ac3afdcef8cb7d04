//! Gain synthesis for the v-approximation and the closed-loop stability
//! constants that certify it on the full fractional model.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frac::phi_tail;
use crate::linalg::{spectral_norm, spectral_radius, sym_eig_extremes, symmetrize};
use crate::model::FosModel;
use crate::vapprox::{build_v_approx, VApprox};

pub const RICCATI_TOL: f64 = 1e-12;
pub const RICCATI_MAX_ITER: usize = 10_000;
const RICCATI_BLOWUP: f64 = 1e100;
/// Closed loops with spectral radius above `1 - LYAP_MARGIN` are rejected.
pub const LYAP_MARGIN: f64 = 1e-9;

/// How the state/input weights are formed for a given augmented dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// `scale * I`.
    Identity(f64),
    /// Explicit symmetric positive-definite matrix of the right size.
    Matrix(DMatrix<f64>),
}

impl Weight {
    pub fn build(&self, dim: usize) -> Result<DMatrix<f64>> {
        let w = match self {
            Weight::Identity(s) => DMatrix::identity(dim, dim) * *s,
            Weight::Matrix(m) => {
                if m.shape() != (dim, dim) {
                    return Err(Error::DimensionMismatch(format!(
                        "weight matrix is {}x{}, expected {dim}x{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                m.clone()
            }
        };
        if (&w - w.transpose()).amax() > 1e-12 * w.amax().max(1.0) {
            return Err(Error::InvalidParameter("weight matrix must be symmetric".into()));
        }
        let (min, _) = sym_eig_extremes(&w);
        if !(min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight matrix must be positive definite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainMethod {
    RiccatiLqr,
    UserSupplied(DMatrix<f64>),
}

/// Free parameters of the stability analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisParams {
    pub theta: f64,
    pub theta_hat: f64,
    pub c_rho: f64,
    /// `None` picks `max(0.9, (1 + c_psi * psi) / 2)`.
    pub kappa: Option<f64>,
    pub q: Weight,
    pub r: Weight,
    pub gain_method: GainMethod,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            theta: 0.5,
            theta_hat: 0.5,
            c_rho: 0.5,
            kappa: None,
            q: Weight::Identity(1.0),
            r: Weight::Identity(1.0),
            gain_method: GainMethod::RiccatiLqr,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {x}")))
            }
        };
        open_unit("theta", self.theta)?;
        open_unit("theta_hat", self.theta_hat)?;
        open_unit("c_rho", self.c_rho)?;
        if let Some(k) = self.kappa {
            open_unit("kappa", k)?;
        }
        Ok(())
    }
}

/// LQR gain from the fixed-point Riccati iteration.
#[derive(Debug, Clone)]
pub struct LqrSolution {
    /// `K` such that `A + B K` is the closed loop.
    pub gain: DMatrix<f64>,
    /// Stabilizing Riccati solution.
    pub cost: DMatrix<f64>,
    pub iterations: usize,
}

/// Iterates `S <- Q + A'SA - A'SB (R + B'SB)^{-1} B'SA` from `S = Q`.
pub fn solve_lqr(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<LqrSolution> {
    let not_stabilizable = |reason: String| Error::NotStabilizable {
        reason,
        mode_modulus: spectral_radius(a),
    };
    let at = a.transpose();
    let bt = b.transpose();
    let mut s = q.clone();
    for it in 1..=RICCATI_MAX_ITER {
        let sb = &s * b;
        let gram = r + &bt * &sb;
        let Some(chol) = symmetrize(&gram).cholesky() else {
            return Err(not_stabilizable("produced an indefinite input Gram matrix".into()));
        };
        // K = (R + B'SB)^{-1} B'SA
        let k = chol.solve(&(sb.transpose() * a));
        let next = symmetrize(&(q + &at * &s * a - &at * &sb * &k));
        let scale = next.norm();
        if !scale.is_finite() || scale > RICCATI_BLOWUP {
            return Err(not_stabilizable(format!("diverged after {it} iterations")));
        }
        let delta = (&next - &s).norm();
        s = next;
        if delta <= RICCATI_TOL * scale {
            let sb = &s * b;
            let gram = symmetrize(&(r + &bt * &sb));
            let chol = gram
                .cholesky()
                .ok_or_else(|| not_stabilizable("final Gram matrix indefinite".into()))?;
            let gain = -chol.solve(&(sb.transpose() * a));
            let rho = spectral_radius(&(a + b * &gain));
            if rho >= 1.0 {
                return Err(not_stabilizable(format!(
                    "converged to a non-stabilizing solution (closed-loop radius {rho:.6})"
                )));
            }
            return Ok(LqrSolution {
                gain,
                cost: s,
                iterations: it,
            });
        }
    }
    Err(not_stabilizable(format!(
        "did not converge in {RICCATI_MAX_ITER} iterations"
    )))
}

/// Stabilizing gain `K_v` for the v-approximation.
pub fn synthesize_gain(va: &VApprox, params: &AnalysisParams) -> Result<DMatrix<f64>> {
    match &params.gain_method {
        GainMethod::RiccatiLqr => {
            let q = params.q.build(va.dim())?;
            let r = params.r.build(va.tilde_b().ncols())?;
            Ok(solve_lqr(va.tilde_a(), va.tilde_b(), &q, &r)?.gain)
        }
        GainMethod::UserSupplied(k) => {
            if k.shape() != (va.tilde_b().ncols(), va.dim()) {
                return Err(Error::DimensionMismatch(format!(
                    "user gain is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    va.tilde_b().ncols(),
                    va.dim()
                )));
            }
            Ok(k.clone())
        }
    }
}

/// Solution `P` of `A'PA - P + Q = 0` by squaring:
/// `P <- P + M'PM`, `M <- M^2`, starting from `P = Q`, `M = A`.
pub fn solve_dlyap(a_k: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = spectral_radius(a_k);
    if rho >= 1.0 - LYAP_MARGIN {
        return Err(Error::UnstableClosedLoop { rho });
    }
    let mut p = q.clone();
    let mut m = a_k.clone();
    for _ in 0..128 {
        p += m.transpose() * &p * &m;
        m = &m * &m;
        if m.norm() < 1e-15 {
            break;
        }
    }
    Ok(symmetrize(&p))
}

/// `Psi(v)`: spectral norms of `Â_0^{-1} A_i` and `Â_0^{-1} B_i K_v` weighted by
/// the exponential tails of their orders.
pub fn compute_psi(model: &FosModel, gain: &DMatrix<f64>, v: usize) -> f64 {
    state_tail_weight(model, v)
        + model
            .input_terms()
            .iter()
            .map(|t| {
                let phi = phi_tail(t.order, v);
                if phi == 0.0 {
                    0.0
                } else {
                    spectral_norm(&model.solve_a0(&(&t.matrix * gain))) * phi
                }
            })
            .sum::<f64>()
}

/// `sum_i ||Â_0^{-1} A_i|| phi_{a_i}(v)`.
fn state_tail_weight(model: &FosModel, v: usize) -> f64 {
    model
        .state_terms()
        .iter()
        .map(|t| {
            let phi = phi_tail(t.order, v);
            if phi == 0.0 {
                0.0
            } else {
                spectral_norm(&model.solve_a0(&t.matrix)) * phi
            }
        })
        .sum()
}

/// `sum_i ||Â_0^{-1} G_i|| e^{g_i}`.
pub fn disturbance_gain(model: &FosModel) -> f64 {
    model
        .dist_terms()
        .iter()
        .map(|t| spectral_norm(&model.solve_a0(&t.matrix)) * t.order.value().exp())
        .sum()
}

/// Tracking offset
/// `d = kappa/(1-kappa) (b_xr sum ||Â_0^{-1}A_i|| phi_{a_i}(v) + b_ur sum ||Â_0^{-1}B_i|| phi_{b_i}(v))`.
pub fn compute_tracking_bound_d(model: &FosModel, v: usize, kappa: f64, b_xr: f64, b_ur: f64) -> f64 {
    let input_weight: f64 = model
        .input_terms()
        .iter()
        .map(|t| {
            let phi = phi_tail(t.order, v);
            if phi == 0.0 {
                0.0
            } else {
                spectral_norm(&model.solve_a0(&t.matrix)) * phi
            }
        })
        .sum();
    let mut total = 0.0;
    if b_xr != 0.0 {
        total += b_xr * state_tail_weight(model, v);
    }
    if b_ur != 0.0 {
        total += b_ur * input_weight;
    }
    kappa / (1.0 - kappa) * total
}

/// Constants that do not depend on `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseConstants {
    pub psi: f64,
    pub c2: f64,
    pub c4: f64,
    pub c4_hat: f64,
    pub c_psi: f64,
    /// `c_psi * psi`; feasibility requires `< 1`.
    pub condition: f64,
    /// `b_w sum ||Â_0^{-1} G_i|| e^{g_i}`.
    pub gamma_w: f64,
    pub lambda_min_p: f64,
    pub lambda_max_p: f64,
    pub lambda_min_q: f64,
}

/// Gain, Lyapunov pair and kappa-free constants for one window length.
#[derive(Debug, Clone)]
pub struct Design {
    pub vapprox: VApprox,
    pub gain: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub a_k: DMatrix<f64>,
    pub spectral_radius: f64,
    pub constants: BaseConstants,
}

impl Design {
    pub fn v(&self) -> usize {
        self.vapprox.v()
    }

    pub fn is_feasible(&self) -> bool {
        self.constants.condition < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub kappa: f64,
    /// Ultimate-bound gain: `gamma(r) = c_gamma * r`.
    pub c_gamma: f64,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub design: Design,
    /// Present only when `c_psi * psi(v) < 1`.
    pub certificate: Option<Certificate>,
}

impl SynthesisResult {
    pub fn v(&self) -> usize {
        self.design.v()
    }

    pub fn constants(&self) -> &BaseConstants {
        &self.design.constants
    }

    pub fn is_feasible(&self) -> bool {
        self.certificate.is_some()
    }

    /// `gamma(b) = c_gamma * b`, if certified.
    pub fn gamma(&self, b: f64) -> Option<f64> {
        self.certificate.map(|c| c.c_gamma * b)
    }

    pub fn tracking_bound_d(&self, model: &FosModel, b_xr: f64, b_ur: f64) -> Option<f64> {
        self.certificate
            .map(|c| compute_tracking_bound_d(model, self.v(), c.kappa, b_xr, b_ur))
    }
}

fn base_constants(
    model: &FosModel,
    va: &VApprox,
    gain: &DMatrix<f64>,
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    a_k: &DMatrix<f64>,
    params: &AnalysisParams,
) -> BaseConstants {
    let g = va.tilde_g();
    let (lambda_min_q, _) = sym_eig_extremes(q);
    let (lambda_min_p, lambda_max_p) = sym_eig_extremes(p);
    let (_, gpg_max) = sym_eig_extremes(&(g.transpose() * p * g));
    let cross = spectral_norm(&(g.transpose() * p * a_k));
    let c2 = gpg_max + cross * cross / (params.theta * lambda_min_q);
    let c4 = (1.0 - params.theta) * lambda_min_q / lambda_max_p;
    let c4_hat = c4.min(params.theta_hat);
    let c_psi = (c2 / (c4_hat * params.c_rho * lambda_min_p)).sqrt();
    let psi = compute_psi(model, gain, va.v());
    BaseConstants {
        psi,
        c2,
        c4,
        c4_hat,
        c_psi,
        condition: c_psi * psi,
        gamma_w: model.b_w() * disturbance_gain(model),
        lambda_min_p,
        lambda_max_p,
        lambda_min_q,
    }
}

fn certify(model: &FosModel, constants: &BaseConstants, params: &AnalysisParams) -> Result<Certificate> {
    let cond = constants.condition;
    if !(cond < 1.0) {
        return Err(Error::KappaInfeasible { condition: cond });
    }
    let kappa = match params.kappa {
        Some(k) if k > cond && k < 1.0 => k,
        Some(k) => {
            return Err(Error::InvalidParameter(format!(
                "kappa = {k} is outside ({cond:.6e}, 1)"
            )))
        }
        None => default_kappa(cond),
    };
    Ok(Certificate {
        kappa,
        c_gamma: constants.c_psi * kappa / (1.0 - kappa) * disturbance_gain(model),
    })
}

/// `max(0.9, (1 + condition) / 2)`, always inside `(condition, 1)` for `condition < 1`.
pub fn default_kappa(condition: f64) -> f64 {
    0.9f64.max((1.0 + condition) / 2.0)
}

/// Fills every constant for a given gain and Lyapunov pair.
///
/// Fails with [`Error::KappaInfeasible`] when `c_psi * psi(v) >= 1`.
pub fn compute_constants(
    model: &FosModel,
    va: &VApprox,
    gain: &DMatrix<f64>,
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    params: &AnalysisParams,
) -> Result<SynthesisResult> {
    let a_k = va.tilde_a() + va.tilde_b() * gain;
    let constants = base_constants(model, va, gain, p, q, &a_k, params);
    let certificate = certify(model, &constants, params)?;
    Ok(SynthesisResult {
        design: Design {
            vapprox: va.clone(),
            gain: gain.clone(),
            p: p.clone(),
            q: q.clone(),
            spectral_radius: spectral_radius(&a_k),
            a_k,
            constants,
        },
        certificate: Some(certificate),
    })
}

/// Builds the v-approximation, synthesizes the gain, solves the Lyapunov
/// equation and evaluates the constants. An infeasible window is not an
/// error here; the result simply carries no certificate.
pub fn synthesize(model: &FosModel, v: usize, params: &AnalysisParams) -> Result<SynthesisResult> {
    params.validate()?;
    let va = build_v_approx(model, v)?;
    let gain = synthesize_gain(&va, params)?;
    let q = params.q.build(va.dim())?;
    let a_k = va.tilde_a() + va.tilde_b() * &gain;
    let p = solve_dlyap(&a_k, &q)?;
    let constants = base_constants(model, &va, &gain, &p, &q, &a_k, params);
    let certificate = match certify(model, &constants, params) {
        Ok(c) => Some(c),
        Err(Error::KappaInfeasible { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(SynthesisResult {
        design: Design {
            vapprox: va,
            gain,
            p,
            q,
            spectral_radius: spectral_radius(&a_k),
            a_k,
            constants,
        },
        certificate,
    })
}

/// One row of a window scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub v: usize,
    pub psi: f64,
    pub c_psi: f64,
    pub condition: f64,
    pub feasible: bool,
    pub kappa: Option<f64>,
    pub c_gamma: Option<f64>,
    pub d: Option<f64>,
    /// Synthesis failure for this window, if any.
    pub failure: Option<String>,
}

impl ScanRow {
    fn from_result(model: &FosModel, res: &SynthesisResult, b_xr: f64, b_ur: f64) -> Self {
        let c = res.constants();
        Self {
            v: res.v(),
            psi: c.psi,
            c_psi: c.c_psi,
            condition: c.condition,
            feasible: res.is_feasible(),
            kappa: res.certificate.map(|c| c.kappa),
            c_gamma: res.certificate.map(|c| c.c_gamma),
            d: res.tracking_bound_d(model, b_xr, b_ur),
            failure: None,
        }
    }

    fn failed(v: usize, err: &Error) -> Self {
        Self {
            v,
            psi: f64::NAN,
            c_psi: f64::NAN,
            condition: f64::NAN,
            feasible: false,
            kappa: None,
            c_gamma: None,
            d: None,
            failure: Some(err.to_string()),
        }
    }
}

/// Evaluates every window in `windows` independently (in parallel).
pub fn scan_v(
    model: &FosModel,
    params: &AnalysisParams,
    windows: impl IntoIterator<Item = usize>,
    b_xr: f64,
    b_ur: f64,
) -> Vec<ScanRow> {
    let windows: Vec<usize> = windows.into_iter().collect();
    windows
        .par_iter()
        .map(|&v| match synthesize(model, v, params) {
            Ok(res) => ScanRow::from_result(model, &res, b_xr, b_ur),
            Err(e) => ScanRow::failed(v, &e),
        })
        .collect()
}

/// Smallest `v <= v_max` with `c_psi * psi(v) < 1`.
///
/// Each candidate is synthesized from scratch since both factors depend on the
/// gain; the condition is not known to be monotone, so this is a linear scan.
pub fn find_min_v(model: &FosModel, params: &AnalysisParams, v_max: usize) -> Result<SynthesisResult> {
    params.validate()?;
    for v in 1..=v_max {
        match synthesize(model, v, params) {
            Ok(res) if res.is_feasible() => return Ok(res),
            Ok(_) | Err(Error::NotStabilizable { .. }) | Err(Error::UnstableClosedLoop { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::InfeasibleUpTo(v_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac::FracOrder;
    use crate::model::Term;
    use crate::presets::benchmark_model;

    fn m1(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    #[test]
    fn lqr_on_stable_scalar() {
        let sol = solve_lqr(&m1(0.5), &m1(1.0), &m1(1.0), &m1(1.0)).unwrap();
        let closed = 0.5 + sol.gain[(0, 0)];
        assert!(closed.abs() < 1.0);
        // scalar DARE: s = 1 + 0.25 s - 0.25 s^2 / (1 + s)
        let s = sol.cost[(0, 0)];
        assert!((s - (1.0 + 0.25 * s - 0.25 * s * s / (1.0 + s))).abs() < 1e-10);
    }

    #[test]
    fn lqr_detects_unreachable_unstable_mode() {
        let err = solve_lqr(&m1(2.0), &m1(0.0), &m1(1.0), &m1(1.0)).unwrap_err();
        match err {
            Error::NotStabilizable { mode_modulus, .. } => assert!((mode_modulus - 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dlyap_scalar_and_zero() {
        let p = solve_dlyap(&m1(0.5), &m1(1.0)).unwrap();
        assert!((p[(0, 0)] - 4.0 / 3.0).abs() < 1e-14);
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let p = solve_dlyap(&DMatrix::zeros(2, 2), &q).unwrap();
        assert_eq!(p, q);
        assert!(matches!(
            solve_dlyap(&m1(1.0), &m1(1.0)),
            Err(Error::UnstableClosedLoop { .. })
        ));
    }

    #[test]
    fn scalar_constants_by_hand() {
        // A_K = 0.5, G = 1, Q = 1 => P = 4/3
        // c2 = 4/3 + (4/3 * 0.5)^2 / (0.5 * 1) = 4/3 + 8/9 = 20/9
        // c4 = 0.5 * 1 / (4/3) = 3/8, c4_hat = min(3/8, 1/2) = 3/8
        // P = diag(4/3, 1) on the augmented state, so lambda_min(P) = 1 and
        // c_psi = sqrt((20/9) / (3/8 * 1/2 * 1)) = sqrt(320/27)
        let ord = |a| FracOrder::new(a).unwrap();
        let model = FosModel::new(
            vec![Term::new(m1(0.5), ord(0.0)), Term::new(m1(0.5), ord(1.0))],
            vec![Term::new(m1(1.0), ord(0.0))],
            vec![Term::new(m1(1.0), ord(0.0))],
            0.2,
        )
        .unwrap();
        // Ǎ_1 = 0.5 with this split; v = 1 gives Ã = [[0.5, 0], [0, 0]]
        let va = build_v_approx(&model, 1).unwrap();
        let gain = DMatrix::zeros(1, 2);
        let q = DMatrix::identity(2, 2);
        let a_k = va.tilde_a() + va.tilde_b() * &gain;
        let p = solve_dlyap(&a_k, &q).unwrap();
        assert!((p[(0, 0)] - 4.0 / 3.0).abs() < 1e-14);
        let params = AnalysisParams::default();
        let c = base_constants(&model, &va, &gain, &p, &q, &a_k, &params);
        assert!((c.c2 - 20.0 / 9.0).abs() < 1e-12);
        assert!((c.c4 - 3.0 / 8.0).abs() < 1e-12);
        assert!((c.c4_hat - 3.0 / 8.0).abs() < 1e-12);
        assert!((c.c_psi - (320.0f64 / 27.0).sqrt()).abs() < 1e-12);
        assert!((c.gamma_w - 0.2).abs() < 1e-15);
        // phi_1(1) = e - 2 times ||Â_0^{-1} A_2|| = 0.5
        assert!((c.psi - 0.5 * (1f64.exp() - 2.0)).abs() < 1e-14);
        // condition > 1 here
        let err = compute_constants(&model, &va, &gain, &p, &q, &params).unwrap_err();
        assert!(matches!(err, Error::KappaInfeasible { .. }));
    }

    #[test]
    fn benchmark_psi_anchors() {
        let model = benchmark_model(false, 0.0);
        for (v, expect) in [(1, 4.488_341_162_818_728), (8, 6.348_109_809_617_609e-4)] {
            let res = synthesize(&model, v, &AnalysisParams::default()).unwrap();
            assert!((res.constants().psi / expect - 1.0).abs() < 1e-10);
        }
        let res = synthesize(&model, 1, &AnalysisParams::default()).unwrap();
        assert!(!res.is_feasible());
        assert!(res.design.spectral_radius < 1.0);
    }

    #[test]
    fn psi_decreases_with_frozen_gain() {
        let ord = |a| FracOrder::new(a).unwrap();
        let model = FosModel::new(
            vec![
                Term::new(DMatrix::identity(2, 2) * 1.5, ord(0.0)),
                Term::new(DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.0, 0.3]), ord(0.6)),
            ],
            vec![Term::new(DMatrix::from_row_slice(2, 1, &[0.0, 1.0]), ord(0.4))],
            vec![],
            0.0,
        )
        .unwrap();
        let gain = DMatrix::from_row_slice(1, 6, &[0.1, -0.2, 0.3, 0.05, 0.0, 0.4]);
        let mut prev = f64::INFINITY;
        for v in 1..30 {
            let psi = compute_psi(&model, &gain, v);
            assert!(psi < prev);
            prev = psi;
        }
    }

    #[test]
    fn d_vanishes_without_references() {
        let model = benchmark_model(false, 0.0);
        assert_eq!(compute_tracking_bound_d(&model, 8, 0.9, 0.0, 0.0), 0.0);
        let d = compute_tracking_bound_d(&model, 8, 0.9, 2.0, 5.0);
        assert!((d - 9.0 * 2.0 * 6.348_109_809_617_609e-4).abs() < 1e-12);
    }

    #[test]
    fn zero_disturbance_bound_gives_zero_gamma_w() {
        let model = benchmark_model(true, 0.0);
        let res = synthesize(&model, 8, &AnalysisParams::default()).unwrap();
        assert_eq!(res.constants().gamma_w, 0.0);
        if let Some(b) = res.gamma(0.0) {
            assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn stable_integer_model_needs_one_step_window() {
        let ord = |a| FracOrder::new(a).unwrap();
        let f = DMatrix::from_row_slice(2, 2, &[0.05, 0.01, 0.0, 0.04]);
        let model = FosModel::new(
            vec![Term::new(DMatrix::identity(2, 2) - &f, ord(0.0)), Term::new(f.clone(), ord(1.0))],
            vec![Term::new(DMatrix::from_row_slice(2, 1, &[0.0, 1.0]), ord(0.0))],
            vec![],
            0.0,
        )
        .unwrap();
        let res = find_min_v(&model, &AnalysisParams::default(), 10).unwrap();
        assert_eq!(res.v(), 1);
        assert!(res.constants().psi < 0.1);
    }

    #[test]
    fn weights_are_checked() {
        assert!(Weight::Identity(-1.0).build(3).is_err());
        assert!(Weight::Matrix(DMatrix::identity(2, 2)).build(3).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(Weight::Matrix(asym).build(2).is_err());
        let bad = AnalysisParams {
            theta: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn doubling_weights_scales_cost_only() {
        let model = benchmark_model(false, 0.0);
        let va = build_v_approx(&model, 3).unwrap();
        let q = DMatrix::identity(va.dim(), va.dim());
        let r = DMatrix::identity(1, 1);
        let one = solve_lqr(va.tilde_a(), va.tilde_b(), &q, &r).unwrap();
        let two = solve_lqr(va.tilde_a(), va.tilde_b(), &(&q * 2.0), &(&r * 2.0)).unwrap();
        assert!((&one.gain - &two.gain).norm() < 1e-8 * one.gain.norm());
        assert!((&one.cost * 2.0 - &two.cost).norm() < 1e-8 * two.cost.norm());
        let rho1 = spectral_radius(&(va.tilde_a() + va.tilde_b() * &one.gain));
        let rho2 = spectral_radius(&(va.tilde_a() + va.tilde_b() * &two.gain));
        assert!((rho1 - rho2).abs() < 1e-8);
    }
}
