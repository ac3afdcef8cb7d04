use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use fracctl::frac::{coeff_table, gl_coefficient, phi_tail, FracOrder};
use fracctl::linalg::spectral_radius;
use fracctl::mpc::{MpcConfig, MpcProblem};
use fracctl::presets::benchmark_model;
use fracctl::rng::Disturbance;
use fracctl::sim::{run_regulation, Scenario, ScenarioKind};
use fracctl::synthesis::{solve_dlyap, synthesize, AnalysisParams};

fn ord(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn square(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

fn stable_pair() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1usize..=5)
        .prop_flat_map(|n| (square(n), square(n), 0.05..0.95f64))
        .prop_map(|(a, m, rho)| {
            let r = spectral_radius(&a);
            let a = if r > 1e-9 { a * (rho / r) } else { a };
            let n = m.nrows();
            let q = m.transpose() * &m + DMatrix::identity(n, n);
            (a, q)
        })
}

proptest! {
    #[test]
    fn integer_orders_vanish_past_their_degree(a in 0usize..=4, j in 0usize..40) {
        let c = gl_coefficient(ord(a as f64), j);
        if j > a {
            prop_assert_eq!(c, 0.0);
        } else {
            prop_assert!(c != 0.0);
        }
    }

    #[test]
    fn table_matches_pointwise(a in 0.0..4.0f64, len in 0usize..50) {
        let t = coeff_table(ord(a), len);
        for j in 0..=len {
            prop_assert_eq!(t.get(j), Some(gl_coefficient(ord(a), j)));
        }
    }

    #[test]
    fn phi_is_nonnegative_and_nonincreasing(a in 0.0..4.0f64, v in 0usize..40) {
        let (p0, p1) = (phi_tail(ord(a), v), phi_tail(ord(a), v + 1));
        prop_assert!(p0 >= 0.0 && p1 <= p0);
    }

    #[test]
    fn dlyap_solves_the_equation((a, q) in stable_pair()) {
        let p = solve_dlyap(&a, &q).unwrap();
        let res = (a.transpose() * &p * &a - &p + &q).norm();
        prop_assert!(res <= 1e-8 * q.norm(), "residual {res}");
        // symmetric positive definite
        prop_assert!((&p - p.transpose()).norm() <= 1e-10 * p.norm());
        prop_assert!(p.clone().cholesky().is_some());
    }

    #[test]
    fn solver_never_returns_worse_than_its_warm_start(
        k in 0usize..200,
        x in prop::collection::vec(-5.0..5.0f64, 27),
    ) {
        let model = benchmark_model(true, 0.5);
        let syn = synthesize(&model, 9, &AnalysisParams::default()).unwrap();
        let config = MpcConfig { horizon: 8, max_iter: 60, ..MpcConfig::default() };
        let problem = MpcProblem::new(&syn.design, config).unwrap();
        let x0 = DVector::from_vec(x);
        let warm = problem.gain_rollout(&x0);
        let sol = problem.solve(k, &x0, warm);
        prop_assert!(sol.cost <= sol.warm_cost);
    }
}

#[test]
fn feasible_design_stays_bounded_over_a_long_noisy_run() {
    let model = benchmark_model(true, 0.5);
    let syn = synthesize(&model, 9, &AnalysisParams::default()).unwrap();
    assert!(syn.is_feasible());
    let scenario = Scenario::new(ScenarioKind::Regulate, 1000, DVector::from_vec(vec![1.0, 1.0]))
        .with_disturbance(Disturbance::Uniform { b_w: 0.5, seed: 99 });
    let traj = run_regulation(&model, &syn, &scenario).unwrap();
    assert!(!traj.diverged);
    let bound = traj.bound.unwrap();
    let sup = traj.state_norms().into_iter().skip(500).fold(0.0, f64::max);
    assert!(sup <= bound, "{sup} > {bound}");
}
