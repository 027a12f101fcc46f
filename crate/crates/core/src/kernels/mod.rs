//! Weighted composition counts.
//!
//! For a family `F` with per-cell run count `phi_F`, the kernel
//! `K_F(r, s, t)` sums `q^(y_2 + 2 y_3 + ... + (r-1) y_r)` over all weak
//! compositions `(y_1, ..., y_r)` of `s` with `sum_i phi_F(y_i) = t`.
//!
//! | family | `phi(j)` for a cell holding `j` balls |
//! |--------|----------------------------------------|
//! | A      | `j / k`                                |
//! | B      | `[j >= k]`                             |
//! | C      | `max(j - k + 1, 0)`                    |
//! | D      | `[j == k]`                             |
//! | E      | `(j - ell) / (k - ell)` when `j >= k`  |
//!
//! Family G is a guarded variant of D: exactly `t` cells equal `k` and no
//! cell after the last of them exceeds `k` (with `t = 0`, every cell is
//! below `k`). It drives the exact-run waiting time.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

mod brute;
mod closed;
mod recurrence;
mod sweep;

pub use brute::{brute_force_kernel, BRUTE_FORCE_LIMIT};
pub use closed::{a_avoiding, c_two_caps, closed_form_q1, h_capped, s_bounded};
pub use recurrence::{aq, bq, cq, dq, eq, gq, KernelCache};
pub use sweep::{Row, ScaledRows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    G,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::A, Family::B, Family::C, Family::D, Family::E, Family::G];

    /// Run count of a single cell holding `j` balls. Not meaningful for G,
    /// whose condition is not additive over cells; there it reports `[j == k]`.
    pub fn phi(self, j: usize, k: usize, ell: usize) -> usize {
        match self {
            Family::A => j / k,
            Family::B => usize::from(j >= k),
            Family::C => (j + 1).saturating_sub(k),
            Family::D | Family::G => usize::from(j == k),
            Family::E => {
                if j >= k {
                    (j - ell) / (k - ell)
                } else {
                    0
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::G => "G",
        };
        f.write_str(c)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "G" => Ok(Family::G),
            _ => Err(Error::Parse(format!("unknown kernel family {s:?}"))),
        }
    }
}

/// Memo key for one kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelKey {
    pub family: Family,
    pub k: usize,
    /// Only family E uses `ell`; it is 0 elsewhere.
    pub ell: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
}

impl KernelKey {
    pub fn new(family: Family, k: usize, ell: usize, r: usize, s: usize, t: usize) -> Result<Self> {
        check_family(family, k, ell)?;
        if r == 0 {
            return Err(invalid("kernel needs at least one cell (r >= 1)"));
        }
        Ok(KernelKey { family, k, ell, r, s, t })
    }
}

pub(crate) fn check_family(family: Family, k: usize, ell: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    match family {
        Family::E if ell >= k => Err(invalid(format!("ell must be below k (ell={ell}, k={k})"))),
        Family::E => Ok(()),
        _ if ell != 0 => Err(invalid(format!("family {family} takes no ell"))),
        _ => Ok(()),
    }
}
