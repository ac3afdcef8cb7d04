//! Grünwald–Letnikov coefficients and exponential tails for a few orders.

use fracctl::frac::{coeff_table, phi_tail, FracOrder};

fn main() {
    for a in [0.5, 1.0, 1.7, 2.0] {
        let order = FracOrder::new(a).unwrap();
        let table = coeff_table(order, 8);
        let coeffs: Vec<String> = table.coeffs().iter().map(|c| format!("{c:+.4}")).collect();
        println!("a = {a}: c_0..c_8 = [{}]", coeffs.join(", "));
    }
    let order = FracOrder::new(1.7).unwrap();
    println!("\n  v   phi_1.7(v)");
    for v in [0, 1, 2, 4, 8, 12, 16, 20, 30] {
        println!("{v:>3}   {:.6e}", phi_tail(order, v));
    }
}
