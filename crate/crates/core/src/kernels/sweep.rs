//! Probability-scaled kernel rows for bulk PMF evaluation.
//!
//! Row `c` holds `P(c, s, t) = theta^s (theta; q)_{c-1} K(c, s, t)` for the
//! chosen family. Row 0 is the point mass at `s = t = 0`, and each new row
//! follows from the previous one in `O(k)` work per entry:
//!
//! `P(c, s, t) = rho_c * sum_j u_c^j P(c-1, s-j, t-phi(j))`
//!
//! with `u_c = theta q^(c-1)`, `rho_1 = 1` and `rho_c = 1 - theta q^(c-2)`.
//! The tail of the `j` sum is folded into a same-row auxiliary recursion, so
//! no entry costs more than `O(k)`. Values stay in `[0, 1]`, which keeps the
//! sweep free of overflow at `q = 1`.

use super::{check_family, Family};
use crate::error::{invalid, Result};

/// One row of scaled kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    width: usize,
    len: usize,
    data: Vec<f64>,
}

impl Row {
    fn delta(width: usize) -> Row {
        let mut data = vec![0.0; width];
        data[0] = 1.0;
        Row { width, len: 1, data }
    }

    /// `P(c, s, t)`; zero outside the stored range.
    #[inline]
    pub fn get(&self, s: usize, t: usize) -> f64 {
        if s < self.len && t < self.width {
            self.data[s * self.width + t]
        } else {
            0.0
        }
    }

    /// Entries with `s >= len()` are zero.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of tracked counts, `t_max + 1`.
    pub fn width(&self) -> usize {
        self.width
    }
}

/// Iterator-like driver producing rows `0, 1, 2, ...` of one family.
#[derive(Debug, Clone)]
pub struct ScaledRows {
    family: Family,
    k: usize,
    ell: usize,
    theta: f64,
    q: f64,
    c: usize,
    row: Row,
    // Family G reads the exact-run family's previous row.
    d_row: Option<Row>,
}

impl ScaledRows {
    /// Starts at row 0, tracking counts `t = 0..=t_max`.
    pub fn new(family: Family, k: usize, ell: usize, t_max: usize, theta: f64, q: f64) -> Result<Self> {
        check_family(family, k, ell)?;
        if !(theta > 0.0 && theta < 1.0) || !(q > 0.0 && q <= 1.0) {
            return Err(invalid(format!("need 0 < theta < 1 and 0 < q <= 1, got theta={theta}, q={q}")));
        }
        let width = t_max + 1;
        let d_row = (family == Family::G).then(|| Row::delta(width));
        Ok(ScaledRows { family, k, ell, theta, q, c: 0, row: Row::delta(width), d_row })
    }

    /// Index `c` of the current row.
    pub fn index(&self) -> usize {
        self.c
    }

    pub fn row(&self) -> &Row {
        &self.row
    }

    /// Moves to the next row, computing entries `s < len` only.
    pub fn advance(&mut self, len: usize) {
        let c = self.c + 1;
        let u = self.theta * self.q.powi((c - 1) as i32);
        let rho = if c == 1 { 1.0 } else { 1.0 - self.theta * self.q.powi((c - 2) as i32) };
        let next = match self.family {
            Family::G => {
                let d_prev = self.d_row.as_ref().expect("G sweep carries D rows");
                let g = step(Family::G, self.k, self.ell, &self.row, Some(d_prev), u, rho, len);
                let d = step(Family::D, self.k, self.ell, d_prev, None, u, rho, len);
                self.d_row = Some(d);
                g
            }
            fam => step(fam, self.k, self.ell, &self.row, None, u, rho, len),
        };
        self.row = next;
        self.c = c;
    }
}

#[inline]
fn flush(x: f64) -> f64 {
    if x < f64::MIN_POSITIVE {
        0.0
    } else {
        x
    }
}

#[allow(clippy::too_many_arguments)]
fn step(family: Family, k: usize, ell: usize, prev: &Row, other: Option<&Row>, u: f64, rho: f64, len: usize) -> Row {
    let w = prev.width;
    let p = k - ell;
    let upow: Vec<f64> = (0..=2 * k + 1).scan(1.0, |acc, _| {
        let v = *acc;
        *acc *= u;
        Some(v)
    })
    .collect();
    let mut x = vec![0.0; len * w];
    let mut aux = vec![0.0; len * w];
    let uses_aux = matches!(family, Family::B | Family::C | Family::D | Family::E);
    let reach = prev.len.max(other.map_or(0, |o| o.len));
    let window = 2 * k + 1;
    let mut zero_run = 0;
    let mut stored = len;

    for s in 0..len {
        let mut any = false;
        for t in 0..w {
            let pv = prev.get(s, t);
            // Auxiliary same-row recursions.
            let a = match family {
                Family::B | Family::D => pv + if s >= 1 { u * aux[(s - 1) * w + t] } else { 0.0 },
                Family::C => pv + if s >= 1 && t >= 1 { u * aux[(s - 1) * w + t - 1] } else { 0.0 },
                Family::E => pv + if s >= p && t >= 1 { upow[p] * aux[(s - p) * w + t - 1] } else { 0.0 },
                _ => 0.0,
            };
            let mut v = 0.0;
            for j in 0..k.min(s + 1) {
                v += upow[j] * prev.get(s - j, t);
            }
            match family {
                Family::A => {
                    if s >= k && t >= 1 {
                        v += upow[k] * x[(s - k) * w + t - 1];
                    }
                }
                Family::B => {
                    if s >= k && t >= 1 {
                        v += upow[k] * aux[(s - k) * w + t - 1];
                    }
                }
                Family::C => {
                    if s >= k && t >= 1 {
                        v += upow[k] * aux[(s - k) * w + t - 1];
                    }
                }
                Family::D => {
                    if s >= k && t >= 1 {
                        v += upow[k] * prev.get(s - k, t - 1);
                    }
                    if s > k {
                        v += upow[k + 1] * aux[(s - k - 1) * w + t];
                    }
                }
                Family::E => {
                    if t >= 1 {
                        for vv in 0..p {
                            if s >= k + vv {
                                v += upow[k + vv] * aux[(s - k - vv) * w + t - 1];
                            }
                        }
                    }
                }
                Family::G => {
                    if s >= k && t >= 1 {
                        v += upow[k] * other.expect("G needs D row").get(s - k, t - 1);
                    }
                }
            }
            let v = flush(v);
            let a = flush(a);
            x[s * w + t] = v;
            if uses_aux {
                aux[s * w + t] = a;
            }
            any |= v != 0.0 || a != 0.0;
        }
        zero_run = if any { 0 } else { zero_run + 1 };
        // Past the previous row's reach, a long enough zero window stays zero.
        if s > reach + k + 1 && zero_run >= window {
            stored = s + 1;
            break;
        }
    }
    x.truncate(stored * w);
    let mut used = stored;
    while used > 0 && x[(used - 1) * w..used * w].iter().all(|&v| v == 0.0) {
        used -= 1;
    }
    x.truncate(used * w);
    for v in &mut x {
        *v *= rho;
    }
    Row { width: w, len: used, data: x }
}
