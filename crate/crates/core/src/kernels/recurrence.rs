//! Top-down memoized recurrences over the last cell's content.
//!
//! Evaluation runs on an explicit work list, so `r` in the thousands does not
//! touch the call stack.

use std::collections::HashMap;

use super::{Family, KernelKey};
use crate::error::Result;
use crate::qmath::QValue;

/// Memo table for kernel values at one fixed `q`.
#[derive(Debug, Clone)]
pub struct KernelCache {
    q: f64,
    memo: HashMap<KernelKey, f64>,
    hits: u64,
    misses: u64,
}

enum Expansion {
    Leaf(f64),
    Sum(Vec<(f64, KernelKey)>),
}

impl KernelCache {
    pub fn new(q: f64) -> Result<Self> {
        let q = QValue::new(q)?.get();
        Ok(KernelCache { q, memo: HashMap::new(), hits: 0, misses: 0 })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    pub fn clear(&mut self) {
        self.memo.clear();
        self.hits = 0;
        self.misses = 0;
    }

    /// Kernel value for `key`, computing and caching whatever it depends on.
    pub fn value(&mut self, key: KernelKey) -> f64 {
        if let Some(&v) = self.memo.get(&key) {
            self.hits += 1;
            return v;
        }
        let mut stack = vec![key];
        while let Some(&top) = stack.last() {
            if self.memo.contains_key(&top) {
                stack.pop();
                continue;
            }
            match expand(top, self.q) {
                Expansion::Leaf(v) => {
                    self.memo.insert(top, v);
                    self.misses += 1;
                    stack.pop();
                }
                Expansion::Sum(terms) => {
                    let before = stack.len();
                    for &(_, child) in &terms {
                        if !self.memo.contains_key(&child) {
                            stack.push(child);
                        }
                    }
                    if stack.len() == before {
                        let v = terms.iter().map(|&(w, child)| w * self.memo[&child]).sum();
                        self.hits += terms.len() as u64;
                        self.memo.insert(top, v);
                        self.misses += 1;
                        stack.pop();
                    }
                }
            }
        }
        self.memo[&key]
    }
}

fn base(family: Family, k: usize, ell: usize, s: usize, t: usize) -> bool {
    match family {
        Family::A => t == s / k,
        Family::B => (s >= k && t == 1) || (s < k && t == 0),
        Family::C => (s >= k && t == s - k + 1) || (s < k && t == 0),
        Family::D => (s == k && t == 1) || (s != k && t == 0),
        Family::E => {
            if s < k {
                t == 0
            } else {
                t == (s - ell) / (k - ell)
            }
        }
        Family::G => (s < k && t == 0) || (s == k && t == 1),
    }
}

fn expand(key: KernelKey, q: f64) -> Expansion {
    let KernelKey { family, k, ell, r, s, t } = key;
    if r == 1 {
        return Expansion::Leaf(if base(family, k, ell, s, t) { 1.0 } else { 0.0 });
    }
    // B and D cannot place t runs in fewer than t*k balls or r cells.
    if matches!(family, Family::B | Family::D) && (s < t * k || t > r) {
        return Expansion::Leaf(0.0);
    }
    let w = q.powi((r - 1) as i32);
    let child = |fam: Family, s2: usize, t2: usize| KernelKey { family: fam, k, ell, r: r - 1, s: s2, t: t2 };
    let mut terms = Vec::new();
    let mut wj = 1.0;
    let j_max = match family {
        Family::B => (s + k).saturating_sub(t * k).min(s),
        Family::G => s.min(k),
        _ => s,
    };
    for j in 0..=j_max {
        let used = match family {
            Family::G if j == k => {
                if t >= 1 {
                    terms.push((wj, child(Family::D, s - j, t - 1)));
                }
                wj *= w;
                continue;
            }
            fam => fam.phi(j, k, ell),
        };
        if used <= t {
            terms.push((wj, child(family, s - j, t - used)));
        }
        wj *= w;
    }
    Expansion::Sum(terms)
}

fn kernel(family: Family, k: usize, ell: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    if r == 0 {
        return 0.0;
    }
    cache.value(KernelKey { family, k, ell, r, s, t })
}

/// Non-overlapping kernel. Panics if `k == 0`; returns 0 for `r == 0`.
pub fn aq(k: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    kernel(Family::A, k, 0, r, s, t, cache)
}

/// At-least kernel: cells with at least `k` balls.
pub fn bq(k: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    kernel(Family::B, k, 0, r, s, t, cache)
}

/// Overlapping kernel.
pub fn cq(k: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    kernel(Family::C, k, 0, r, s, t, cache)
}

/// Exact kernel: cells with exactly `k` balls.
pub fn dq(k: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    kernel(Family::D, k, 0, r, s, t, cache)
}

/// `ell`-overlapping kernel. Panics unless `ell < k`.
pub fn eq(k: usize, ell: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    assert!(ell < k, "ell must be below k");
    kernel(Family::E, k, ell, r, s, t, cache)
}

/// Guarded exact kernel used for exact-run waiting times.
pub fn gq(k: usize, r: usize, s: usize, t: usize, cache: &mut KernelCache) -> f64 {
    kernel(Family::G, k, 0, r, s, t, cache)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_examples() {
        let mut c = KernelCache::new(0.5).unwrap();
        assert_eq!(aq(2, 1, 5, 2, &mut c), 1.0);
        assert_eq!(aq(2, 1, 5, 1, &mut c), 0.0);
        assert_eq!(bq(3, 1, 3, 1, &mut c), 1.0);
        assert_eq!(bq(3, 1, 2, 0, &mut c), 1.0);
        assert_eq!(cq(2, 1, 5, 4, &mut c), 1.0);
        assert_eq!(cq(2, 1, 1, 0, &mut c), 1.0);
        assert_eq!(dq(3, 1, 3, 1, &mut c), 1.0);
        assert_eq!(dq(3, 1, 5, 0, &mut c), 1.0);
        assert_eq!(eq(3, 1, 1, 5, 2, &mut c), 1.0);
        assert_eq!(eq(3, 1, 1, 2, 0, &mut c), 1.0);
        assert_eq!(eq(3, 1, 1, 6, 2, &mut c), 1.0);
        assert_eq!(aq(2, 0, 0, 0, &mut c), 0.0);
    }

    #[test]
    fn aq_small_value() {
        // Sum over y1 + y2 + y3 = 4 with one pair in total, weight q^(y2 + 2 y3).
        let q: f64 = 0.5;
        let mut c = KernelCache::new(q).unwrap();
        let mut expect = 0.0;
        for a in 0..=4usize {
            for b in 0..=4 - a {
                let d = 4 - a - b;
                if a / 2 + b / 2 + d / 2 == 1 {
                    expect += q.powi((b + 2 * d) as i32);
                }
            }
        }
        assert!((aq(2, 3, 4, 1, &mut c) - expect).abs() < 1e-14);
    }

    #[test]
    fn cache_idempotent() {
        let mut warm = KernelCache::new(0.75).unwrap();
        let first = eq(4, 1, 4, 12, 3, &mut warm);
        let again = eq(4, 1, 4, 12, 3, &mut warm);
        let mut cold = KernelCache::new(0.75).unwrap();
        let fresh = eq(4, 1, 4, 12, 3, &mut cold);
        assert_eq!(first.to_bits(), again.to_bits());
        assert_eq!(first.to_bits(), fresh.to_bits());
        assert!(warm.hits() > 0 && warm.misses() > 0);
    }

    #[test]
    fn deep_r_does_not_overflow_stack() {
        let mut c = KernelCache::new(0.999).unwrap();
        let v = aq(2, 2000, 3, 1, &mut c);
        assert!(v.is_finite() && v > 0.0);
    }
}
