//! Conjugate linear-model computations.

mod cache;
mod dataset;
mod gamma;
mod hyper;
mod prior;
mod stats;

pub use cache::CrossCache;
pub use dataset::Dataset;
pub use gamma::GammaVector;
pub use hyper::update_g;
pub use prior::{GPrior, InclusionPrior, PriorSpec};
pub use stats::{SuffStats, CONDITION_LIMIT, SCHUR_RTOL};

use crate::error::ModelError;

/// Dense `log m(gamma)` together with the statistics it was computed from.
pub fn log_marginal_likelihood(
    data: &Dataset,
    g: f64,
    gamma: &GammaVector,
) -> Result<(f64, SuffStats), ModelError> {
    let stats = SuffStats::from_scratch(data, g, gamma.included())?;
    Ok((stats.log_marginal(data.n()), stats))
}

/// `t * log m(gamma) + log p(gamma)` at the prior's fixed `g`.
pub fn log_posterior(
    data: &Dataset,
    prior: &PriorSpec,
    gamma: &GammaVector,
    temperature: f64,
) -> Result<f64, ModelError> {
    let g = prior.fixed_g().ok_or(ModelError::RandomG)?;
    let (lm, _) = log_marginal_likelihood(data, g, gamma)?;
    Ok(temperature * lm + prior.log_model_prior(gamma.p_gamma(), data.p()))
}

/// Everything a kernel needs to score models: the data, the prior and the
/// conditioning safeguard.
#[derive(Debug, Clone, Copy)]
pub struct ModelContext<'a> {
    pub data: &'a Dataset,
    pub prior: &'a PriorSpec,
    /// Reject models with more than `n - 2` variables.
    pub rank_guard: bool,
}

impl<'a> ModelContext<'a> {
    pub fn new(data: &'a Dataset, prior: &'a PriorSpec) -> Self {
        Self {
            data,
            prior,
            rank_guard: true,
        }
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    pub fn check_size(&self, p_gamma: usize) -> Result<(), ModelError> {
        let limit = self.data.n().saturating_sub(2);
        if self.rank_guard && p_gamma > limit {
            return Err(ModelError::RankGuard { p_gamma, limit });
        }
        Ok(())
    }

    /// Builds the state of `gamma` from scratch.
    pub fn evaluate(&self, gamma: &GammaVector, g: f64) -> Result<PosteriorState, ModelError> {
        self.check_size(gamma.p_gamma())?;
        let stats = SuffStats::from_scratch(self.data, g, gamma.included())?;
        Ok(self.state_from(stats))
    }

    pub(crate) fn state_from(&self, stats: SuffStats) -> PosteriorState {
        PosteriorState {
            log_marginal: stats.log_marginal(self.data.n()),
            log_prior: self.prior.log_model_prior(stats.p_gamma(), self.data.p()),
            stats,
        }
    }

    /// Applies removals, then additions, to a copy of `state`.
    pub fn apply_flips(
        &self,
        state: &PosteriorState,
        cache: &CrossCache,
        removals: &[usize],
        additions: &[usize],
    ) -> Result<PosteriorState, ModelError> {
        let size = (state.stats.p_gamma() + additions.len()).saturating_sub(removals.len());
        self.check_size(size)?;
        let mut stats = state.stats.clone();
        for &j in removals {
            stats.remove(j)?;
        }
        for &j in additions {
            stats.add(self.data, cache, j)?;
        }
        Ok(self.state_from(stats))
    }
}

/// Sufficient statistics with the two terms of the log posterior.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    pub stats: SuffStats,
    pub log_marginal: f64,
    pub log_prior: f64,
}

impl PosteriorState {
    pub fn log_posterior(&self, temperature: f64) -> f64 {
        temperature * self.log_marginal + self.log_prior
    }

    pub fn g(&self) -> f64 {
        self.stats.g()
    }
}
