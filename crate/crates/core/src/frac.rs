//! Grünwald–Letnikov coefficients and exponential tail functions.
//!
//! The coefficient of lag `j` for a difference of order `a` is
//! `c_j = (-1)^j * binom(a, j)`. Every coefficient is produced by the running
//! product `c_{j+1} = c_j * (j - a) / (j + 1)`, so integer orders give exact
//! zeros past `j = a` and nothing overflows for long tables.

use std::fmt;

use crate::error::{Error, Result};

/// Non-negative order of a fractional difference.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidOrder(value))
        }
    }

    pub const ZERO: FracOrder = FracOrder(0.0);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for FracOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

/// `c_j^a` for a single lag.
pub fn gl_coefficient(order: FracOrder, j: usize) -> f64 {
    let a = order.value();
    let mut c = 1.0;
    for i in 0..j {
        c *= (i as f64 - a) / (i as f64 + 1.0);
    }
    c
}

/// Precomputed coefficients `c_0^a ..= c_J^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    order: FracOrder,
    coeffs: Vec<f64>,
}

impl CoeffTable {
    pub fn new(order: FracOrder, horizon: usize) -> Self {
        let mut table = Self {
            order,
            coeffs: vec![1.0],
        };
        table.extend_to(horizon);
        table
    }

    /// Grows the table so that lags up to `horizon` are available.
    pub fn extend_to(&mut self, horizon: usize) {
        let a = self.order.value();
        let mut last = *self.coeffs.last().expect("table holds c_0");
        for j in self.coeffs.len() - 1..horizon {
            last *= (j as f64 - a) / (j as f64 + 1.0);
            self.coeffs.push(last);
        }
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    /// Largest stored lag `J`.
    pub fn horizon(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient at lag `j`, or `None` past the stored horizon.
    pub fn get(&self, j: usize) -> Option<f64> {
        self.coeffs.get(j).copied()
    }
}

/// Convenience wrapper around [`CoeffTable::new`].
pub fn coeff_table(order: FracOrder, horizon: usize) -> CoeffTable {
    CoeffTable::new(order, horizon)
}

/// Below this window the closed form `e^a - partial sum` is accurate enough.
const CLOSED_FORM_MAX_V: usize = 12;
const TAIL_REL_CUTOFF: f64 = 1e-20;
const TAIL_MAX_TERMS: usize = 100_000;

/// `phi_a(v) = e^a - sum_{j=0}^{v} a^j / j!`, equivalently the tail
/// `sum_{j>v} a^j / j!`. Uses `0^0 = 1`, so `phi_0(v) = 0`.
pub fn phi_tail(order: FracOrder, v: usize) -> f64 {
    let a = order.value();
    if a == 0.0 {
        return 0.0;
    }
    if v >= CLOSED_FORM_MAX_V {
        return phi_tail_sum(order, v);
    }
    let mut term = 1.0;
    let mut partial = 1.0;
    for j in 1..=v {
        term *= a / j as f64;
        partial += term;
    }
    (a.exp() - partial).max(0.0)
}

/// Direct tail summation `sum_{j=v+1}^inf a^j / j!`.
pub fn phi_tail_sum(order: FracOrder, v: usize) -> f64 {
    let a = order.value();
    if a == 0.0 {
        return 0.0;
    }
    // a^(v+1) / (v+1)! built as a product to stay finite for large v
    let mut term = 1.0;
    for j in 1..=v + 1 {
        term *= a / j as f64;
    }
    let mut sum = 0.0;
    let mut j = v + 1;
    for _ in 0..TAIL_MAX_TERMS {
        sum += term;
        j += 1;
        term *= a / j as f64;
        if term < TAIL_REL_CUTOFF * sum || term == 0.0 {
            break;
        }
    }
    sum
}

/// `sum_j |c_j^a|` over lags `j in lo..=hi`.
pub fn abs_coeff_sum(table: &CoeffTable, lo: usize, hi: usize) -> f64 {
    (lo..=hi.min(table.horizon()))
        .map(|j| table.coeffs[j].abs())
        .sum()
}
