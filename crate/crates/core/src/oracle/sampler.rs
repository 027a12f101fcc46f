//! Seeded simulation of the trial model.
//!
//! Streams come from ChaCha8 keyed by the seed, with the stream id selecting
//! an independent keystream. Monte Carlo replications are cut into chunks of
//! [`MC_CHUNK`] and chunk `c` always uses stream `c`, so output depends only
//! on the seed, never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{support_min, ModelParams, PmfTable, RunSpec};
use crate::error::{invalid, Result};
use crate::runcount::{BinarySeq, OnlineCounter};

/// Replications per random stream.
pub const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct TrialSampler {
    params: ModelParams,
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    failures: usize,
}

impl TrialSampler {
    pub fn new(params: ModelParams, seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        TrialSampler { params, seed, stream_id, rng, failures: 0 }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Failures drawn since the current sequence started.
    pub fn failures(&self) -> usize {
        self.failures
    }

    /// Starts a fresh sequence; the random stream continues.
    pub fn start_sequence(&mut self) {
        self.failures = 0;
    }

    /// Draws the next trial of the current sequence.
    pub fn next_trial(&mut self) -> bool {
        let success = self.rng.gen::<f64>() < self.params.success_prob(self.failures);
        if !success {
            self.failures += 1;
        }
        success
    }
}

/// Draws a fresh sequence of `n` trials.
pub fn sample_sequence(sampler: &mut TrialSampler, n: usize) -> BinarySeq {
    sampler.start_sequence();
    BinarySeq::new((0..n).map(|_| sampler.next_trial()).collect())
}

/// Empirical waiting-time PMF over `replications` simulated sequences, each
/// cut off after `n_cap` trials. Censored runs stay in `tail_bound`, and
/// `stderr` holds the binomial standard error of each entry.
pub fn monte_carlo_waiting_pmf(
    spec: &RunSpec,
    params: &ModelParams,
    replications: usize,
    n_cap: usize,
    seed: u64,
) -> Result<PmfTable> {
    if replications < 1000 {
        return Err(invalid(format!("need at least 1000 replications, got {replications}")));
    }
    let smin = support_min(spec);
    if n_cap < smin {
        return Err(invalid(format!("n_cap={n_cap} is below the support minimum {smin}")));
    }
    let counter = OnlineCounter::new(spec.k, spec.scheme)?;
    let chunks = replications.div_ceil(MC_CHUNK);
    let hists: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let reps = MC_CHUNK.min(replications - c * MC_CHUNK);
            let mut sampler = TrialSampler::new(*params, seed, c as u64);
            let mut hist = vec![0u64; n_cap + 1];
            for _ in 0..reps {
                sampler.start_sequence();
                let mut cnt = counter.clone();
                for n in 1..=n_cap {
                    if cnt.push(sampler.next_trial()) == spec.r {
                        hist[n] += 1;
                        break;
                    }
                }
            }
            hist
        })
        .collect();
    let mut hist = vec![0u64; n_cap + 1];
    for h in &hists {
        for (a, b) in hist.iter_mut().zip(h) {
            *a += b;
        }
    }
    let total = replications as f64;
    let probs: Vec<f64> = hist[smin..].iter().map(|&h| h as f64 / total).collect();
    let stderr = probs.iter().map(|&p| (p * (1.0 - p) / total).sqrt()).collect();
    let censored = replications as u64 - hist.iter().sum::<u64>();
    let mut table = PmfTable::new(*spec, *params, smin, probs, censored > 0);
    table.stderr = Some(stderr);
    Ok(table)
}
