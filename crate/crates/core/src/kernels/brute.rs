//! Direct summation over weak compositions. Test oracle only.

use super::{check_family, Family};
use crate::error::{invalid, Error, Result};

/// Largest number of compositions the enumerator will walk.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

fn composition_count(r: usize, s: usize) -> u128 {
    // C(s + r - 1, r - 1), saturating.
    let mut c: u128 = 1;
    for i in 1..r as u128 {
        c = c.saturating_mul(s as u128 + i) / i;
        if c > BRUTE_FORCE_LIMIT * 1000 {
            return u128::MAX;
        }
    }
    c
}

struct Walk {
    family: Family,
    k: usize,
    ell: usize,
    r: usize,
    t: usize,
    q: f64,
    total: f64,
}

impl Walk {
    // `exact` and `big_after` track family G: exact-k cells seen so far and
    // whether a cell above k appeared after the latest of them.
    fn go(&mut self, cell: usize, left: usize, runs: usize, exp: usize, exact: usize, big_after: bool) {
        if cell + 1 == self.r {
            let y = left;
            let e = exp + cell * y;
            let ok = if self.family == Family::G {
                let (ex, big) = self.step_g(y, exact, big_after);
                ex == self.t && !big
            } else {
                runs + self.family.phi(y, self.k, self.ell) == self.t
            };
            if ok {
                self.total += self.q.powi(e as i32);
            }
            return;
        }
        for y in 0..=left {
            let runs2 = runs + self.family.phi(y, self.k, self.ell);
            if self.family != Family::G && runs2 > self.t {
                continue;
            }
            let (ex, big) = self.step_g(y, exact, big_after);
            self.go(cell + 1, left - y, runs2, exp + cell * y, ex, big);
        }
    }

    fn step_g(&self, y: usize, exact: usize, big_after: bool) -> (usize, bool) {
        if y == self.k {
            (exact + 1, false)
        } else {
            (exact, big_after || y > self.k)
        }
    }
}

/// Kernel value by exhaustive enumeration of the weak compositions of `s`
/// into `r` cells. Refuses when there are more than [`BRUTE_FORCE_LIMIT`].
pub fn brute_force_kernel(family: Family, k: usize, ell: usize, r: usize, s: usize, t: usize, q: f64) -> Result<f64> {
    check_family(family, k, ell)?;
    if r == 0 {
        return Err(invalid("kernel needs at least one cell (r >= 1)"));
    }
    if composition_count(r, s) > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded(format!("too many compositions for r={r}, s={s}")));
    }
    let mut walk = Walk { family, k, ell, r, t, q, total: 0.0 };
    walk.go(0, s, 0, 0, 0, false);
    Ok(walk.total)
}
