//! Reference distributions computed straight from the trial model.
//!
//! Exhaustive enumeration walks every sequence of a given length, weighting
//! each by its exact probability. Sequences are integers `0..2^n` with bit `i`
//! giving trial `i + 1`. Work is split into fixed chunks whose partial sums
//! are merged in index order, so results are identical for any thread count.

use rayon::prelude::*;

use crate::dist::{max_count, support_min, ModelParams, PmfTable, RunSpec};
use crate::error::{Error, Result};
use crate::runcount::{count_runs, BinarySeq, OnlineCounter, Scheme};

mod sampler;

pub use sampler::{monte_carlo_waiting_pmf, sample_sequence, TrialSampler, MC_CHUNK};

/// Largest sequence length the enumerators accept.
pub const ENUMERATION_LIMIT: usize = 22;

const CHUNK_BITS: usize = 12;

/// Probability of `seq`: trial `j` after `f` earlier failures succeeds with
/// probability `theta q^f`.
pub fn sequence_probability(seq: &BinarySeq, params: &ModelParams) -> f64 {
    mask_probability(seq.bits().iter().copied(), params)
}

fn mask_probability(bits: impl Iterator<Item = bool>, params: &ModelParams) -> f64 {
    let mut p = 1.0;
    let mut success = params.theta();
    for b in bits {
        if b {
            p *= success;
        } else {
            p *= 1.0 - success;
            success *= params.q();
        }
    }
    p
}

fn check_length(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::GuardExceeded(format!(
            "enumeration of 2^{n} sequences exceeds the limit 2^{ENUMERATION_LIMIT}"
        )));
    }
    Ok(())
}

/// Sum of `f(mask)` over `0..2^n`, chunked and merged in order.
fn ordered_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    let total = 1u64 << n;
    let chunk = 1u64 << CHUNK_BITS.min(n);
    let parts: Vec<f64> = (0..total / chunk)
        .into_par_iter()
        .map(|c| (c * chunk..(c + 1) * chunk).map(&f).sum())
        .collect();
    parts.iter().sum()
}

/// Exact PMF of the waiting time for `n <= n_max`, by enumerating every
/// sequence of each length. The table starts at the support minimum.
pub fn enumerate_waiting_pmf(spec: &RunSpec, params: &ModelParams, n_max: usize) -> Result<PmfTable> {
    check_length(n_max)?;
    let smin = support_min(spec);
    let counter = OnlineCounter::new(spec.k, spec.scheme)?;
    let mut probs = Vec::new();
    for n in smin..=n_max.max(smin) {
        if n > n_max {
            break;
        }
        let v = ordered_sum(n, |mask| {
            let mut c = counter.clone();
            let mut p = 1.0;
            let mut success = params.theta();
            for i in 0..n {
                let b = mask >> i & 1 == 1;
                if b {
                    p *= success;
                } else {
                    p *= 1.0 - success;
                    success *= params.q();
                }
                let hit = c.push(b) == spec.r;
                if hit != (i + 1 == n) {
                    // Reached too early, or not reached at the last trial.
                    return 0.0;
                }
            }
            p
        });
        probs.push(v);
    }
    if probs.is_empty() {
        probs.push(0.0);
    }
    Ok(PmfTable::new(*spec, *params, smin, probs, false))
}

/// Distribution of the run count over all `2^n` sequences of length `n`,
/// indexed by count.
pub fn enumerate_count_pmf(scheme: Scheme, n: usize, k: usize, params: &ModelParams) -> Result<Vec<f64>> {
    check_length(n)?;
    scheme.validate(k)?;
    let top = max_count(scheme, n, k);
    (0..=top)
        .map(|x| {
            Ok(ordered_sum(n, |mask| {
                let seq = BinarySeq::from_mask(mask, n);
                if count_runs(&seq, k, scheme).expect("validated") == x {
                    sequence_probability(&seq, params)
                } else {
                    0.0
                }
            }))
        })
        .collect()
}
