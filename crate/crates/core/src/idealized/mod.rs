//! Product-form targets with closed-form mixing quantities, and exact
//! posterior enumeration for small problems.

mod enumerate;

pub use enumerate::{enumerate_posterior, pairwise_bf_ratio, Enumeration, ENUMERATION_CAP};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelError, Result};
use crate::model::GammaVector;
use crate::proposal::{Move, ProposalParams};
use crate::rng::uniform;
use crate::sampler::{mh_step, TargetState};

/// `pi(gamma) = prod_j pi_j^gamma_j (1 - pi_j)^(1 - gamma_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTarget {
    pis: Vec<f64>,
}

/// The two segment-satisfying proposals with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `A_j = 1 - D_j = pi_j`.
    Independent,
    /// `A_j = min(1, pi_j / (1 - pi_j))`, `D_j = min(1, (1 - pi_j) / pi_j)`.
    RandomWalk,
}

impl ProductTarget {
    pub fn new(pis: Vec<f64>) -> Result<Self> {
        if pis.is_empty() {
            return Err(Error::Config(
                "product target needs at least one coordinate".into(),
            ));
        }
        if let Some(v) = pis.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Config(format!(
                "inclusion probability {v} outside (0, 1)"
            )));
        }
        Ok(Self { pis })
    }

    pub fn p(&self) -> usize {
        self.pis.len()
    }

    pub fn pis(&self) -> &[f64] {
        &self.pis
    }

    pub fn log_mass(&self, gamma: &GammaVector) -> f64 {
        self.pis
            .iter()
            .enumerate()
            .map(|(j, &q)| {
                if gamma.contains(j) {
                    q.ln()
                } else {
                    (-q).ln_1p()
                }
            })
            .sum()
    }

    /// Exact draw from the target.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GammaVector {
        let bits: Vec<bool> = self.pis.iter().map(|&q| uniform(rng) < q).collect();
        GammaVector::from_bits(&bits)
    }

    /// `Var f_j` for the indicator `f_j(gamma) = gamma_j`.
    pub fn indicator_variances(&self) -> Vec<f64> {
        self.pis.iter().map(|&q| q * (1.0 - q)).collect()
    }
}

/// `A_j = 1 - D_j = pi_j`.
pub fn ideal_independent_params(target: &ProductTarget) -> ProposalParams {
    let a = target.pis.clone();
    let d = target.pis.iter().map(|q| 1.0 - q).collect();
    ProposalParams::exact(a, d).expect("pi in (0, 1)")
}

/// `A_j = min(1, pi_j / (1 - pi_j))`, `D_j = min(1, (1 - pi_j) / pi_j)`.
pub fn ideal_rw_params(target: &ProductTarget) -> ProposalParams {
    let a = target
        .pis
        .iter()
        .map(|&q| (q / (1.0 - q)).min(1.0))
        .collect();
    let d = target
        .pis
        .iter()
        .map(|&q| ((1.0 - q) / q).min(1.0))
        .collect();
    ProposalParams::exact(a, d).expect("pi in (0, 1)")
}

pub fn ideal_params(target: &ProductTarget, variant: Variant) -> ProposalParams {
    match variant {
        Variant::Independent => ideal_independent_params(target),
        Variant::RandomWalk => ideal_rw_params(target),
    }
}

/// Stationary expected squared jump distance (Hamming) of the ideal chain.
pub fn esjd_closed_form(target: &ProductTarget, variant: Variant) -> f64 {
    2.0 * target
        .pis
        .iter()
        .map(|&q| match variant {
            Variant::Independent => q * (1.0 - q),
            Variant::RandomWalk => q.min(1.0 - q),
        })
        .sum::<f64>()
}

/// Asymptotic variance of `f = a_0 + sum_j a_j f_j(gamma_j)` given the
/// stationary variances `Var f_j`.
pub fn asym_var_linear(
    target: &ProductTarget,
    weights: &[f64],
    variances: &[f64],
    variant: Variant,
) -> f64 {
    assert_eq!(weights.len(), target.p());
    assert_eq!(variances.len(), target.p());
    target
        .pis
        .iter()
        .zip(weights.iter().zip(variances))
        .map(|(&q, (&a, &v))| {
            let factor = match variant {
                Variant::Independent => 1.0,
                Variant::RandomWalk => 2.0 * q.max(1.0 - q) - 1.0,
            };
            factor * a * a * v
        })
        .sum()
}

/// Stationary probability that a step changes the model.
pub fn mutation_rate(target: &ProductTarget, variant: Variant) -> f64 {
    let stay: f64 = target
        .pis
        .iter()
        .map(|&q| match variant {
            Variant::Independent => (1.0 - q).powi(2) + q * q,
            Variant::RandomWalk => (2.0 * q - 1.0).abs(),
        })
        .product();
    1.0 - stay
}

/// The product target as a chain's target state.
pub struct ProductState<'t> {
    pub target: &'t ProductTarget,
    pub log_mass: f64,
}

impl TargetState for ProductState<'_> {
    type Candidate = f64;

    fn log_density(&self) -> f64 {
        self.log_mass
    }

    fn evaluate(&self, _gamma: &GammaVector, mv: &Move) -> Result<(f64, f64), ModelError> {
        let logit = |j: usize| {
            let q = self.target.pis[j];
            q.ln() - (-q).ln_1p()
        };
        let delta = mv.additions.iter().map(|&j| logit(j)).sum::<f64>()
            - mv.removals.iter().map(|&j| logit(j)).sum::<f64>();
        let next = self.log_mass + delta;
        Ok((next, next))
    }

    fn commit(&mut self, candidate: f64) {
        self.log_mass = candidate;
    }
}

/// Per-step output of an ideal-chain simulation.
#[derive(Debug, Clone, Default)]
pub struct IdealRun {
    pub accept_probs: Vec<f64>,
    /// Squared jump distance of each step (0 when rejected).
    pub jumps: Vec<f64>,
    /// Model size after each step.
    pub sizes: Vec<f64>,
}

impl IdealRun {
    pub fn min_accept(&self) -> f64 {
        self.accept_probs
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn mutations(&self) -> Vec<f64> {
        self.jumps.iter().map(|&j| (j > 0.0) as u8 as f64).collect()
    }
}

/// Runs the production Metropolis-Hastings step on a product target with
/// fixed parameters, from an exact stationary draw.
pub fn simulate_ideal<R: Rng + ?Sized>(
    target: &ProductTarget,
    params: &ProposalParams,
    n_steps: usize,
    rng: &mut R,
) -> IdealRun {
    let mut gamma = target.sample(rng);
    let mut state = ProductState {
        target,
        log_mass: target.log_mass(&gamma),
    };
    let mut out = IdealRun {
        accept_probs: Vec::with_capacity(n_steps),
        jumps: Vec::with_capacity(n_steps),
        sizes: Vec::with_capacity(n_steps),
    };
    for _ in 0..n_steps {
        let mv = crate::proposal::sample_proposal(params, &gamma, rng);
        let rec = mh_step(&mut state, &mut gamma, mv, rng);
        out.accept_probs.push(rec.accept_prob);
        out.jumps.push(if rec.accepted {
            rec.n_flips() as f64
        } else {
            0.0
        });
        out.sizes.push(gamma.p_gamma() as f64);
    }
    out
}

/// Mean and its batch-means standard error.
pub fn batch_mean_se(x: &[f64], batches: usize) -> (f64, f64) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let size = n / batches;
    if size == 0 || batches < 2 {
        return (mean, f64::NAN);
    }
    let means: Vec<f64> = x
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}
