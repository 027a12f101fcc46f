//! Exact integer kernel values at `q = 1` by inclusion-exclusion.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::{check_family, Family};
use crate::error::{invalid, Result};

fn binom(n: i64, m: i64) -> BigInt {
    if n < 0 || m < 0 || m > n {
        return BigInt::zero();
    }
    let m = m.min(n - m);
    let mut c = BigInt::one();
    for i in 0..m {
        c = c * (n - i) / (i + 1);
    }
    c
}

fn sign(j: i64) -> BigInt {
    if j % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Weak compositions of `m` into `c` cells, with the empty-cell convention
/// that zero cells hold exactly zero balls.
fn weak(m: i64, c: i64) -> BigInt {
    if c == 0 {
        return if m == 0 { BigInt::one() } else { BigInt::zero() };
    }
    if m < 0 {
        return BigInt::zero();
    }
    binom(m + c - 1, c - 1)
}

/// Solutions of `x_1 + ... + x_a = c` in integers `1 <= x_i <= b - 1`.
pub fn s_bounded(a: i64, b: i64, c: i64) -> BigInt {
    if a == 0 {
        return if c == 0 { BigInt::one() } else { BigInt::zero() };
    }
    let mut total = BigInt::zero();
    for j in 0..=a {
        total += sign(j) * binom(a, j) * binom(c - j * (b - 1) - 1, a - 1);
    }
    total
}

/// Allocations of `alpha` balls into `r` cells where `m` given cells hold at
/// most `k` balls each.
pub fn h_capped(m: i64, alpha: i64, r: i64, k: i64) -> BigInt {
    let mut total = BigInt::zero();
    if alpha < 0 {
        return total;
    }
    let mut j = 0;
    while j <= m && alpha - (k + 1) * j >= 0 {
        total += sign(j) * binom(m, j) * weak(alpha - (k + 1) * j, r);
        j += 1;
    }
    total
}

/// Allocations of `alpha` balls into `r` cells with no cell holding exactly `k`.
pub fn a_avoiding(alpha: i64, r: i64, k: i64) -> BigInt {
    let mut total = BigInt::zero();
    if alpha < 0 {
        return total;
    }
    let mut j = 0;
    while j <= r && alpha - k * j >= 0 {
        total += sign(j) * binom(r, j) * weak(alpha - k * j, r - j);
        j += 1;
    }
    total
}

/// Allocations of `alpha` balls into `i` cells holding fewer than `m` balls
/// each plus `ri` cells holding fewer than `n` balls each.
pub fn c_two_caps(alpha: i64, i: i64, ri: i64, m: i64, n: i64) -> BigInt {
    let mut total = BigInt::zero();
    if alpha < 0 {
        return total;
    }
    let mut j1 = 0;
    while j1 <= i && alpha - m * j1 >= 0 {
        let mut j2 = 0;
        while j2 <= ri && alpha - m * j1 - n * j2 >= 0 {
            total += sign(j1 + j2) * binom(i, j1) * binom(ri, j2) * weak(alpha - m * j1 - n * j2, i + ri);
            j2 += 1;
        }
        j1 += 1;
    }
    total
}

fn a1(k: i64, r: i64, s: i64, t: i64) -> BigInt {
    if r == 0 {
        return if s == 0 && t == 0 { BigInt::one() } else { BigInt::zero() };
    }
    if s - k * t < 0 {
        return BigInt::zero();
    }
    binom(r + t - 1, t) * s_bounded(r, k + 1, s - k * t + r)
}

fn b1(k: i64, r: i64, s: i64, t: i64) -> BigInt {
    binom(r, t) * h_capped(r - t, s - t * k, r, k - 1)
}

fn c1(k: i64, r: i64, s: i64, t: i64) -> BigInt {
    if t == 0 {
        return s_bounded(r, k + 1, s + r);
    }
    (1..=r.min(t))
        .map(|a| binom(r, a) * binom(t - 1, a - 1) * s_bounded(r - a, k + 1, s + r - t - a * k))
        .sum()
}

fn d1(k: i64, r: i64, s: i64, t: i64) -> BigInt {
    if r == 0 {
        return if s == 0 && t == 0 { BigInt::one() } else { BigInt::zero() };
    }
    binom(r, t) * a_avoiding(s - t * k, r - t, k)
}

fn e1(k: i64, ell: i64, r: i64, s: i64, t: i64) -> BigInt {
    if t == 0 {
        return s_bounded(r, k + 1, s + r);
    }
    (1..=r.min(t))
        .map(|a| {
            binom(r, a) * binom(t - 1, a - 1) * c_two_caps(s - a * ell - (k - ell) * t, a, r - a, k - ell, k)
        })
        .sum()
}

// Split at the last exact cell: `a - 1` unrestricted cells before it with
// `t - 1` exact cells, and `r - a` cells below k after it.
fn g1(k: i64, r: i64, s: i64, t: i64) -> BigInt {
    if t == 0 {
        return a1(k, r, s, 0);
    }
    let mut total = BigInt::zero();
    for a in 1..=r {
        for tail in 0..=(s - k) {
            total += d1(k, a - 1, s - k - tail, t - 1) * a1(k, r - a, tail, 0);
        }
    }
    total
}

/// Kernel value at `q = 1` as an exact integer.
pub fn closed_form_q1(family: Family, k: usize, ell: usize, r: usize, s: usize, t: usize) -> Result<BigUint> {
    check_family(family, k, ell)?;
    if r == 0 {
        return Err(invalid("kernel needs at least one cell (r >= 1)"));
    }
    let (k, ell, r, s, t) = (k as i64, ell as i64, r as i64, s as i64, t as i64);
    let v = match family {
        Family::A => a1(k, r, s, t),
        Family::B => b1(k, r, s, t),
        Family::C => c1(k, r, s, t),
        Family::D => d1(k, r, s, t),
        Family::E => e1(k, ell, r, s, t),
        Family::G => g1(k, r, s, t),
    };
    debug_assert!(!v.is_negative());
    Ok(v.to_biguint().unwrap_or_default())
}
