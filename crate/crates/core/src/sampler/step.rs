use rand::Rng;

use crate::error::ModelError;
use crate::model::{CrossCache, GammaVector, ModelContext, PosteriorState};
use crate::proposal::Move;
use crate::rng::uniform;

/// A (possibly tempered) log density over models that can score a proposed
/// flip set relative to the current model.
pub trait TargetState {
    /// Whatever must be kept to move to the proposed model on acceptance.
    type Candidate;

    fn log_density(&self) -> f64;

    fn evaluate(
        &self,
        gamma: &GammaVector,
        mv: &Move,
    ) -> Result<(f64, Self::Candidate), ModelError>;

    fn commit(&mut self, candidate: Self::Candidate);
}

/// Result of one Metropolis-Hastings step.
#[derive(Debug, Clone, Default)]
pub struct StepRecord {
    pub mv: Move,
    pub accept_prob: f64,
    pub accepted: bool,
    /// The proposal could not be scored and was rejected.
    pub failed: bool,
}

impl StepRecord {
    pub fn n_flips(&self) -> usize {
        self.mv.n_flips()
    }

    /// An accepted move that changed the model.
    pub fn mutated(&self) -> bool {
        self.accepted && !self.mv.is_identity()
    }
}

/// Accepts `mv` with probability `min(1, pi(y) q(y, x) / (pi(x) q(x, y)))`,
/// updating `gamma` and the target in place. Exactly one uniform is drawn
/// per call. A numerical failure while scoring counts as a rejection.
pub fn mh_step<T: TargetState, R: Rng + ?Sized>(
    target: &mut T,
    gamma: &mut GammaVector,
    mv: Move,
    rng: &mut R,
) -> StepRecord {
    let u = uniform(rng);
    if mv.is_identity() {
        return StepRecord {
            mv,
            accept_prob: 1.0,
            accepted: true,
            failed: false,
        };
    }
    match target.evaluate(gamma, &mv) {
        Ok((log_new, candidate)) => {
            let log_ratio = log_new - target.log_density() + mv.log_q_ratio;
            let accept_prob = if log_ratio >= 0.0 {
                1.0
            } else if log_ratio.is_nan() {
                0.0
            } else {
                log_ratio.exp()
            };
            let accepted = u < accept_prob;
            if accepted {
                for &j in &mv.removals {
                    gamma.exclude(j);
                }
                for &j in &mv.additions {
                    gamma.include(j);
                }
                target.commit(candidate);
            }
            StepRecord {
                mv,
                accept_prob,
                accepted,
                failed: false,
            }
        }
        Err(e) => {
            log::debug!("proposal with {} flips rejected: {e}", mv.n_flips());
            StepRecord {
                mv,
                accept_prob: 0.0,
                accepted: false,
                failed: true,
            }
        }
    }
}

/// The linear-model posterior at temperature `t` as seen by one chain.
pub struct ModelTarget<'s, 'a> {
    pub ctx: &'s ModelContext<'a>,
    pub state: &'s mut PosteriorState,
    pub cache: &'s CrossCache,
    pub temperature: f64,
}

impl TargetState for ModelTarget<'_, '_> {
    type Candidate = PosteriorState;

    fn log_density(&self) -> f64 {
        self.state.log_posterior(self.temperature)
    }

    fn evaluate(
        &self,
        _gamma: &GammaVector,
        mv: &Move,
    ) -> Result<(f64, PosteriorState), ModelError> {
        let next = self
            .ctx
            .apply_flips(self.state, self.cache, &mv.removals, &mv.additions)?;
        Ok((next.log_posterior(self.temperature), next))
    }

    fn commit(&mut self, candidate: PosteriorState) {
        *self.state = candidate;
    }
}
