use crate::error::{Error, ModelError, Result};
use crate::model::{CrossCache, Dataset, GammaVector, ModelContext, PriorSpec, SuffStats};

/// Largest `p` accepted by [`enumerate_posterior`].
pub const ENUMERATION_CAP: usize = 20;

/// The exact posterior over all `2^p` models.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub p: usize,
    /// Normalized log probability of the model whose bits are the mask
    /// index; `-inf` for models excluded by the rank guard or singular.
    pub log_probs: Vec<f64>,
    /// Exact posterior inclusion probabilities.
    pub pips: Vec<f64>,
    /// `log sum_gamma m(gamma) p(gamma)`.
    pub log_evidence: f64,
}

impl Enumeration {
    pub fn prob(&self, mask: u64) -> f64 {
        self.log_probs[mask as usize].exp()
    }
}

/// Scores every model from scratch at the prior's fixed `g`.
pub fn enumerate_posterior(
    data: &Dataset,
    prior: &PriorSpec,
    rank_guard: bool,
) -> Result<Enumeration> {
    let p = data.p();
    if p > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            p,
            cap: ENUMERATION_CAP,
        });
    }
    prior.validate()?;
    let g = prior.fixed_g().ok_or(ModelError::RandomG)?;
    let ctx = ModelContext {
        data,
        prior,
        rank_guard,
    };
    let n_models = 1usize << p;
    let mut log_w = Vec::with_capacity(n_models);
    for mask in 0..n_models as u64 {
        let gamma = GammaVector::from_mask(p, mask);
        let w = match ctx.evaluate(&gamma, g) {
            Ok(s) => s.log_posterior(1.0),
            Err(ModelError::RankGuard { .. }) => f64::NEG_INFINITY,
            Err(e) => {
                log::warn!("model {mask:#b} dropped from enumeration: {e}");
                f64::NEG_INFINITY
            }
        };
        log_w.push(w);
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_w.iter().map(|w| (w - max).exp()).sum();
    let log_evidence = max + sum.ln();
    let log_probs: Vec<f64> = log_w.iter().map(|w| w - log_evidence).collect();
    let mut pips = vec![0.0; p];
    for (mask, lp) in log_probs.iter().enumerate() {
        let w = lp.exp();
        for (j, pip) in pips.iter_mut().enumerate() {
            if (mask >> j) & 1 == 1 {
                *pip += w;
            }
        }
    }
    Ok(Enumeration {
        p,
        log_probs,
        pips,
        log_evidence,
    })
}

/// `log a` with `a = BF_j(gamma_k = 1, gamma_0) / BF_j(gamma_k = 0, gamma_0)`,
/// the change in the evidence for `j` caused by including `k`.
pub fn pairwise_bf_ratio(
    data: &Dataset,
    g: f64,
    j: usize,
    k: usize,
    gamma0: &GammaVector,
) -> Result<f64> {
    if j == k {
        return Err(Error::Config(
            "pairwise Bayes factor ratio needs j != k".into(),
        ));
    }
    if gamma0.contains(j) || gamma0.contains(k) {
        return Err(Error::Config(
            "base model must exclude both variables".into(),
        ));
    }
    let cache = CrossCache::new();
    let base = SuffStats::from_scratch(data, g, gamma0.included())?;
    let mut with_k = base.clone();
    with_k.add(data, &cache, k)?;
    Ok(with_k.log_bf_up(data, &cache, j)? - base.log_bf_up(data, &cache, j)?)
}
