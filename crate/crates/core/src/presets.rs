//! Ready-made models.

use nalgebra::DMatrix;

use crate::frac::FracOrder;
use crate::model::{FosModel, Term};

/// Order of the fractional term in [`benchmark_model`].
pub const BENCHMARK_ORDER: f64 = 1.7;

/// Open-loop unstable two-state benchmark with `A = [[1, 1], [0, 1]]`:
///
/// ```text
/// I D^0 x(k+1) + A D^1.7 x(k+1) - A D^0 x(k+1) = [0; 1] u(k) + G D^0 w(k)
/// ```
///
/// `sum_i A_i = I`. `G = I` when `with_noise_input`, otherwise the zero matrix.
pub fn benchmark_model(with_noise_input: bool, b_w: f64) -> FosModel {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let g = if with_noise_input {
        DMatrix::identity(2, 2)
    } else {
        DMatrix::zeros(2, 2)
    };
    let ord = |v| FracOrder::new(v).expect("literal order");
    FosModel::new(
        vec![
            Term::new(DMatrix::identity(2, 2), ord(0.0)),
            Term::new(a.clone(), ord(BENCHMARK_ORDER)),
            Term::new(-a, ord(0.0)),
        ],
        vec![Term::new(DMatrix::from_row_slice(2, 1, &[0.0, 1.0]), ord(0.0))],
        vec![Term::new(g, ord(0.0))],
        b_w,
    )
    .expect("benchmark model is valid")
}
