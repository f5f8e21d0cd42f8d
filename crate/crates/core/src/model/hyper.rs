use rand::Rng;

use super::{GammaVector, ModelContext, PosteriorState, SuffStats};
use crate::error::ModelError;
use crate::rng::{standard_normal, uniform};

/// One random-walk Metropolis step on `log g` under the half-Cauchy prior.
///
/// The target is `m(gamma | g)^t p(g)` with the Jacobian `g` of the log
/// transform. On acceptance the statistics are rebuilt at the new `g`;
/// a numerical failure at the proposal counts as a rejection. Returns
/// whether the move was accepted.
pub fn update_g<R: Rng + ?Sized>(
    ctx: &ModelContext<'_>,
    gamma: &GammaVector,
    state: &mut PosteriorState,
    temperature: f64,
    step: f64,
    rng: &mut R,
) -> Result<bool, ModelError> {
    if ctx.prior.fixed_g().is_some() {
        return Err(ModelError::FixedG);
    }
    let z = standard_normal(rng);
    let u = uniform(rng);
    let g = state.g();
    let g_new = g * (step * z).exp();
    if g_new == g {
        return Ok(true);
    }
    let stats = match SuffStats::from_scratch(ctx.data, g_new, gamma.included()) {
        Ok(s) => s,
        Err(e) => {
            log::debug!("g proposal {g_new:e} rejected: {e}");
            return Ok(false);
        }
    };
    let lm_new = stats.log_marginal(ctx.data.n());
    let log_alpha = temperature * (lm_new - state.log_marginal) + ctx.prior.log_g_density(g_new)
        - ctx.prior.log_g_density(g)
        + g_new.ln()
        - g.ln();
    if u.ln() < log_alpha {
        state.log_marginal = lm_new;
        state.stats = stats;
        Ok(true)
    } else {
        Ok(false)
    }
}
