//! q-calculus primitives.
//!
//! Everything here is a plain `f64` function of its arguments. Removable
//! singularities at `q = 1` are handled by explicit limit branches, and
//! q-numbers are summed term by term so that `q` close to 1 does not lose
//! precision to `1 - q` cancellation.

use crate::error::{invalid, Result};

/// A validated geometric rate `q` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QValue(f64);

impl QValue {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q <= 1.0 {
            Ok(QValue(q))
        } else {
            Err(invalid(format!("q must lie in (0, 1], got {q}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

/// `(a; q)_n = prod_{j<n} (1 - a q^j)`.
pub fn q_shifted_factorial(a: f64, q: f64, n: usize) -> f64 {
    let mut out = 1.0;
    let mut aq = a;
    for _ in 0..n {
        out *= 1.0 - aq;
        aq *= q;
    }
    out
}

/// `[z]_q = (1 - q^z) / (1 - q)`, equal to `z` at `q = 1`.
pub fn q_number(z: i64, q: f64) -> f64 {
    if q == 1.0 {
        return z as f64;
    }
    if z < 0 {
        return -q.powi(z as i32) * q_number(-z, q);
    }
    let mut sum = 0.0;
    let mut p = 1.0;
    for _ in 0..z {
        sum += p;
        p *= q;
    }
    sum
}

/// `[m]_q! = [1]_q [2]_q ... [m]_q`.
pub fn q_factorial(m: usize, q: f64) -> f64 {
    (1..=m as i64).map(|i| q_number(i, q)).product()
}

/// Gaussian polynomial `[n m]_q`, built factor by factor as
/// `prod_{i<m} [n-i]_q / [i+1]_q`. Returns 0 when `m > n`.
pub fn q_binomial_coeff(n: usize, m: usize, q: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    let mut out = 1.0;
    for i in 0..m {
        out *= q_number((n - i) as i64, q) / q_number((i + 1) as i64, q);
    }
    out
}

/// `|prod_{i=1}^n (1 + z q^{i-1}) - sum_j q^{j(j-1)/2} [n j]_q z^j|`.
pub fn q_newton_identity_residual(z: f64, q: f64, n: usize) -> f64 {
    let lhs = (0..n).fold(1.0, |acc, i| acc * (1.0 + z * q.powi(i as i32)));
    let rhs: f64 = (0..=n)
        .map(|j| {
            let e = (j * j.saturating_sub(1) / 2) as i32;
            q.powi(e) * q_binomial_coeff(n, j, q) * z.powi(j as i32)
        })
        .sum();
    (lhs - rhs).abs()
}
