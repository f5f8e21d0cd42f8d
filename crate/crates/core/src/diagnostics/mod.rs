//! Run outputs, inclusion-probability estimators, effective sample size and
//! relative efficiency.

mod efficiency;
mod ess;

pub use efficiency::{median, relative_efficiency, replicate_variances, Efficiency};
pub use ess::{ess_univariate, Ess};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampler::{PtLadder, RunConfig};

/// One sampling-phase step of one coldest-level chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSummary {
    /// Iteration within the sampling phase, from 1.
    pub iteration: u64,
    pub chain: u32,
    pub accepted: bool,
    pub acceptance_prob: f64,
    pub model_size: u32,
    pub n_flips: u32,
    pub log_posterior: f64,
}

/// Snapshot of a kernel's adaptation state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptSnapshot {
    pub iteration: u64,
    pub values: Vec<f64>,
}

/// Event counts and numerical health indicators of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunCounters {
    /// Adaptation steps that exceeded their diminishing-adaptation bound.
    pub adaptation_violations: u64,
    /// Scale-floor resets that hit the upper end of the box.
    pub floor_capped: u64,
    /// Conditional inclusion entries saturated to 0 or 1.
    pub rb_saturated: u64,
    /// Proposals rejected because they could not be scored.
    pub numerical_failures: u64,
    pub refreshes: u64,
    pub refresh_failures: u64,
    /// Largest relative gap between maintained and rebuilt statistics.
    pub max_refresh_drift: f64,
    /// Largest absolute gap between maintained and rebuilt log marginals.
    pub max_log_post_drift: f64,
    pub g_proposals: u64,
    pub g_accepts: u64,
}

impl RunCounters {
    pub fn merge(&mut self, o: &RunCounters) {
        self.adaptation_violations += o.adaptation_violations;
        self.floor_capped += o.floor_capped;
        self.rb_saturated += o.rb_saturated;
        self.numerical_failures += o.numerical_failures;
        self.refreshes += o.refreshes;
        self.refresh_failures += o.refresh_failures;
        self.max_refresh_drift = self.max_refresh_drift.max(o.max_refresh_drift);
        self.max_log_post_drift = self.max_log_post_drift.max(o.max_log_post_drift);
        self.g_proposals += o.g_proposals;
        self.g_accepts += o.g_accepts;
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub setup: f64,
    pub burn_in: f64,
    pub sampling: f64,
    pub total: f64,
}

/// Everything a run produces. Only chains at temperature 1 are recorded.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub p: usize,
    pub names: Vec<String>,
    pub n_chains: usize,
    /// Starting model of each chain, bit-packed.
    pub initial: Vec<Vec<u64>>,
    /// Thinned post-burn-in models per chain, bit-packed.
    pub samples: Vec<Vec<Vec<u64>>>,
    /// Sum of conditional inclusion rows over the sampling phase.
    pub rb_sum: Option<Vec<f64>>,
    pub rb_rows: u64,
    /// Sampling-phase steps, iteration-major then chain.
    pub steps: Vec<StepSummary>,
    pub adaptation: Vec<AdaptSnapshot>,
    /// `g` at each recorded sample, per chain, when `g` is random.
    pub g_samples: Vec<Vec<f64>>,
    pub ladder: Option<PtLadder>,
    pub counters: RunCounters,
    pub timings: Timings,
    pub config: RunConfig,
    pub version: String,
}

fn unpack(words: &[u64], j: usize) -> bool {
    (words[j / 64] >> (j % 64)) & 1 == 1
}

impl RunOutput {
    pub fn n_samples(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    /// Fraction of recorded samples including each variable.
    pub fn inclusion_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.p];
        for s in self.samples.iter().flatten() {
            for (w, &word) in s.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    counts[w * 64 + b] += 1;
                    bits &= bits - 1;
                }
            }
        }
        counts
    }

    /// Indicator series of variable `j` for chain `c`.
    pub fn indicator_series(&self, c: usize, j: usize) -> Vec<f64> {
        self.samples[c]
            .iter()
            .map(|s| unpack(s, j) as u8 as f64)
            .collect()
    }
}

/// Mean of the sampled indicators.
pub fn pip_empirical(out: &RunOutput) -> Result<Vec<f64>> {
    let n = out.n_samples();
    if n == 0 {
        return Err(Error::EmptyOutput("no samples were recorded"));
    }
    Ok(out
        .inclusion_counts()
        .into_iter()
        .map(|c| c as f64 / n as f64)
        .collect())
}

/// Mean of the conditional inclusion rows.
pub fn pip_rb(out: &RunOutput) -> Result<Vec<f64>> {
    match &out.rb_sum {
        Some(sum) if out.rb_rows > 0 => Ok(sum
            .iter()
            .map(|s| (s / out.rb_rows as f64).clamp(0.0, 1.0))
            .collect()),
        _ => Err(Error::EmptyOutput(
            "no conditional inclusion rows were recorded",
        )),
    }
}

/// Headline statistics of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub iterations: u64,
    pub chains: usize,
    pub samples: usize,
    /// Mean Metropolis-Hastings acceptance probability.
    pub acceptance_rate: f64,
    /// Fraction of proposals accepted.
    pub accepted_fraction: f64,
    /// Fraction of steps that accepted a move changing the model.
    pub mutation_rate: f64,
    pub mean_model_size: f64,
    /// `None` when nothing was accepted.
    pub flips_per_accepted: Option<f64>,
    pub g_acceptance: Option<f64>,
    pub swap_rates: Option<Vec<f64>>,
    pub temperatures: Option<Vec<f64>>,
    pub counters: RunCounters,
    pub timings: Timings,
}

pub fn run_summary(out: &RunOutput) -> RunSummary {
    let n = out.steps.len();
    let nf = n.max(1) as f64;
    let accepted = out.steps.iter().filter(|s| s.accepted).count();
    let mutated = out
        .steps
        .iter()
        .filter(|s| s.accepted && s.n_flips > 0)
        .count();
    let flips: u64 = out
        .steps
        .iter()
        .filter(|s| s.accepted)
        .map(|s| s.n_flips as u64)
        .sum();
    RunSummary {
        iterations: out.config.n_iters,
        chains: out.n_chains,
        samples: out.n_samples(),
        acceptance_rate: out.steps.iter().map(|s| s.acceptance_prob).sum::<f64>() / nf,
        accepted_fraction: accepted as f64 / nf,
        mutation_rate: mutated as f64 / nf,
        mean_model_size: out.steps.iter().map(|s| s.model_size as f64).sum::<f64>() / nf,
        flips_per_accepted: (accepted > 0).then(|| flips as f64 / accepted as f64),
        g_acceptance: (out.counters.g_proposals > 0)
            .then(|| out.counters.g_accepts as f64 / out.counters.g_proposals as f64),
        swap_rates: out.ladder.as_ref().map(|l| {
            l.swap_attempts
                .iter()
                .zip(&l.swap_accepts)
                .map(|(&a, &s)| if a > 0 { s as f64 / a as f64 } else { 0.0 })
                .collect()
        }),
        temperatures: out.ladder.as_ref().map(|l| l.temps().to_vec()),
        counters: out.counters.clone(),
        timings: out.timings,
    }
}
