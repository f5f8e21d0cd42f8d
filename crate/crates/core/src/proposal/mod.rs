//! Product-form proposals over `{0,1}^p` and the two adaptation laws.

mod asi;
mod eia;
mod sparse;

pub use asi::{AsiState, AsiUpdate};
pub use eia::{EiaState, EiaUpdate};
pub use sparse::BucketSampler;

use rand::Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::GammaVector;
use crate::rng::uniform;

/// Indices flipped by one proposal; 64 live inline before spilling to the heap.
pub type FlipSet = SmallVec<[usize; 64]>;

/// `logit_eps(x) = log(x - eps) - log(1 - x - eps)` on `(eps, 1 - eps)`.
pub fn logit_eps(x: f64, eps: f64) -> Result<f64> {
    let (lo, hi) = (eps, 1.0 - eps);
    if !(x > lo && x < hi) {
        return Err(Error::OutOfRange { value: x, lo, hi });
    }
    Ok((x - eps).ln() - (1.0 - x - eps).ln())
}

/// Inverse of [`logit_eps`]: `eps + (1 - 2 eps) / (1 + exp(-y))`.
pub fn inv_logit_eps(y: f64, eps: f64) -> f64 {
    let s = if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    };
    eps + (1.0 - 2.0 * eps) * s
}

/// Step sizes `phi_i = c * i^(-lambda)` for `i >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub scale: f64,
    pub lambda: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            scale: 1.0,
            lambda: 0.55,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!(
                "phi scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.lambda > 0.5 && self.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "lambda must lie in (1/2, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn phi(&self, i: u64) -> f64 {
        self.scale * (i.max(1) as f64).powf(-self.lambda)
    }
}

/// Tuning constants shared by the adaptive kernels.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdaptSettings {
    /// Lower acceptance threshold of the individual-adaptation rule.
    pub tau_l: f64,
    /// Upper acceptance threshold of the individual-adaptation rule.
    pub tau_u: f64,
    /// Target acceptance rate of the scaled rule.
    pub tau: f64,
    /// Shrinkage of the inclusion estimates away from 0 and 1.
    pub kappa: f64,
    /// Box `[eps, 1 - eps]` for proposal probabilities; `None` means `0.1 / p`.
    pub eps: Option<f64>,
    pub phi_scale: f64,
    pub lambda: f64,
    /// Starting value of the common scale.
    pub initial_zeta: f64,
    /// Stop accumulating conditional inclusion rows after burn-in.
    pub rb_burnin_only: bool,
}

impl Default for AdaptSettings {
    fn default() -> Self {
        Self {
            tau_l: 0.01,
            tau_u: 0.1,
            tau: 0.234,
            kappa: 0.001,
            eps: None,
            phi_scale: 1.0,
            lambda: 0.55,
            initial_zeta: 0.5,
            rb_burnin_only: false,
        }
    }
}

impl AdaptSettings {
    pub fn eps_for(&self, p: usize) -> f64 {
        self.eps.unwrap_or(0.1 / p as f64)
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            scale: self.phi_scale,
            lambda: self.lambda,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        self.schedule().validate()?;
        let eps = self.eps_for(p);
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Config(format!(
                "eps must lie in (0, 1/2), got {eps}"
            )));
        }
        if !(0.0 < self.tau_l && self.tau_l < self.tau_u && self.tau_u < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < tau_l < tau_u < 1, got tau_l = {}, tau_u = {}",
                self.tau_l, self.tau_u
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if !(self.kappa >= 0.0 && self.kappa < 0.5) {
            return Err(Error::Config(format!(
                "kappa must lie in [0, 1/2), got {}",
                self.kappa
            )));
        }
        if !(self.initial_zeta > eps && self.initial_zeta < 1.0 - eps) {
            return Err(Error::Config(format!(
                "initial zeta {} must lie in (eps, 1 - eps)",
                self.initial_zeta
            )));
        }
        Ok(())
    }
}

/// Offset keeping adapted probabilities strictly inside the box so their
/// logits stay finite.
pub(crate) fn box_margin(eps: f64) -> f64 {
    1e-6 * (1.0 - 2.0 * eps)
}

/// Per-variable proposal probabilities: excluded `j` is proposed for
/// inclusion with probability `A_j`, included `j` for deletion with `D_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalParams {
    a: Vec<f64>,
    d: Vec<f64>,
    eps: f64,
}

impl ProposalParams {
    /// Values are clamped into `[eps, 1 - eps]`.
    pub fn new(a: Vec<f64>, d: Vec<f64>, eps: f64) -> Result<Self> {
        if a.len() != d.len() || a.is_empty() {
            return Err(Error::Config(format!(
                "proposal vectors must be non-empty and of equal length ({} vs {})",
                a.len(),
                d.len()
            )));
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Config(format!(
                "eps must lie in (0, 1/2), got {eps}"
            )));
        }
        if a.iter().chain(&d).any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "proposal probabilities must be finite".into(),
            ));
        }
        let mut p = Self { a, d, eps };
        for j in 0..p.a.len() {
            p.a[j] = p.clamp(p.a[j]);
            p.d[j] = p.clamp(p.d[j]);
        }
        Ok(p)
    }

    /// Unboxed parameters (`eps = 0`); every value must lie in `(0, 1]`.
    /// Used for idealized targets where `A_j = 1` is legitimate.
    pub fn exact(a: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if a.len() != d.len() || a.is_empty() {
            return Err(Error::Config(
                "proposal vectors must be non-empty and of equal length".into(),
            ));
        }
        if let Some(v) = a.iter().chain(&d).find(|v| !(**v > 0.0 && **v <= 1.0)) {
            return Err(Error::Config(format!(
                "proposal probability {v} outside (0, 1]"
            )));
        }
        Ok(Self { a, d, eps: 0.0 })
    }

    pub fn constant(p: usize, a: f64, d: f64, eps: f64) -> Result<Self> {
        Self::new(vec![a; p], vec![d; p], eps)
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.eps, 1.0 - self.eps)
    }

    pub(crate) fn set(&mut self, j: usize, a: f64, d: f64) {
        self.a[j] = self.clamp(a);
        self.d[j] = self.clamp(d);
    }

    /// Probability that coordinate `j` flips from state `included`.
    #[inline]
    pub fn flip_prob(&self, j: usize, included: bool) -> f64 {
        if included {
            self.d[j]
        } else {
            self.a[j]
        }
    }

    /// `sum_j (A_j [excluded] + D_j [included])`, the expected number of flips.
    pub fn expected_flips(&self, gamma: &GammaVector) -> f64 {
        (0..self.p())
            .map(|j| self.flip_prob(j, gamma.contains(j)))
            .sum()
    }
}

/// A proposed move as the two flip sets plus `log q(y, x) - log q(x, y)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Move {
    pub removals: FlipSet,
    pub additions: FlipSet,
    pub log_q_ratio: f64,
}

impl Move {
    pub fn n_flips(&self) -> usize {
        self.removals.len() + self.additions.len()
    }

    pub fn is_identity(&self) -> bool {
        self.removals.is_empty() && self.additions.is_empty()
    }

    /// The proposed model.
    pub fn apply(&self, gamma: &GammaVector) -> GammaVector {
        let mut next = gamma.clone();
        for &j in &self.removals {
            next.exclude(j);
        }
        for &j in &self.additions {
            next.include(j);
        }
        next
    }

    /// Flip sets between two models, sorted.
    pub fn between(from: &GammaVector, to: &GammaVector) -> Self {
        let mut mv = Self::default();
        for j in 0..from.p() {
            match (from.contains(j), to.contains(j)) {
                (true, false) => mv.removals.push(j),
                (false, true) => mv.additions.push(j),
                _ => {}
            }
        }
        mv
    }
}

/// Draws `gamma'` from `q_eta(gamma, .)` with one uniform per coordinate, in
/// index order. The returned move carries the proposal ratio.
pub fn sample_proposal<R: Rng + ?Sized>(
    params: &ProposalParams,
    gamma: &GammaVector,
    rng: &mut R,
) -> Move {
    let mut mv = Move::default();
    for j in 0..params.p() {
        let inc = gamma.contains(j);
        if uniform(rng) < params.flip_prob(j, inc) {
            if inc {
                mv.removals.push(j);
            } else {
                mv.additions.push(j);
            }
        }
    }
    mv.log_q_ratio = log_q_ratio(params, &mv);
    mv
}

/// `log q(gamma, gamma')` over all coordinates.
pub fn log_proposal_prob(params: &ProposalParams, from: &GammaVector, to: &GammaVector) -> f64 {
    (0..params.p())
        .map(|j| {
            let q = params.flip_prob(j, from.contains(j));
            if from.contains(j) == to.contains(j) {
                (-q).ln_1p()
            } else {
                q.ln()
            }
        })
        .sum()
}

/// `log q(gamma', gamma) - log q(gamma, gamma')`. Unflipped coordinates cancel,
/// leaving `log(D_j / A_j)` per addition and `log(A_j / D_j)` per removal.
pub fn log_q_ratio(params: &ProposalParams, mv: &Move) -> f64 {
    let add: f64 = mv
        .additions
        .iter()
        .map(|&j| params.d[j].ln() - params.a[j].ln())
        .sum();
    let rem: f64 = mv
        .removals
        .iter()
        .map(|&j| params.a[j].ln() - params.d[j].ln())
        .sum();
    add + rem
}

/// Metropolis-Hastings acceptance probability; NaN inputs give 0.
pub fn acceptance_prob(
    log_post_from: f64,
    log_post_to: f64,
    log_q_fwd: f64,
    log_q_rev: f64,
) -> f64 {
    let r = log_post_to - log_post_from + log_q_rev - log_q_fwd;
    if r >= 0.0 {
        1.0
    } else if r.is_nan() {
        0.0
    } else {
        r.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn logit_basics() {
        assert_eq!(logit_eps(0.5, 0.01).unwrap(), 0.0);
        assert!((logit_eps(0.75, 1e-300).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert!(logit_eps(0.005, 0.01).is_err());
        assert!(logit_eps(0.995, 0.01).is_err());
        let mut rng = stream_rng(3, Stream::Data);
        for _ in 0..1000 {
            let eps = 0.2 * uniform(&mut rng);
            let x = eps + (1.0 - 2.0 * eps) * (0.001 + 0.998 * uniform(&mut rng));
            let back = inv_logit_eps(logit_eps(x, eps).unwrap(), eps);
            assert!((back - x).abs() < 1e-12);
        }
    }

    #[test]
    fn params_are_boxed() {
        let p = ProposalParams::new(vec![0.0, 1.0, 0.3], vec![1.0, 0.0, 0.3], 0.05).unwrap();
        assert_eq!(p.a(), &[0.05, 0.95, 0.3]);
        assert_eq!(p.d(), &[0.95, 0.05, 0.3]);
        assert!(ProposalParams::new(vec![0.1], vec![0.1, 0.2], 0.05).is_err());
    }

    #[test]
    fn proposal_probabilities_normalize() {
        let p = 6;
        let mut rng = stream_rng(5, Stream::Data);
        let a: Vec<f64> = (0..p).map(|_| uniform(&mut rng)).collect();
        let d: Vec<f64> = (0..p).map(|_| uniform(&mut rng)).collect();
        let params = ProposalParams::new(a, d, 0.01).unwrap();
        for from_mask in [0u64, 5, 63] {
            let from = GammaVector::from_mask(p, from_mask);
            let total: f64 = (0..1u64 << p)
                .map(|m| log_proposal_prob(&params, &from, &GammaVector::from_mask(p, m)).exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_matches_full_probabilities() {
        let p = 7;
        let mut rng = stream_rng(8, Stream::Data);
        let a: Vec<f64> = (0..p).map(|_| uniform(&mut rng)).collect();
        let d: Vec<f64> = (0..p).map(|_| uniform(&mut rng)).collect();
        let params = ProposalParams::new(a, d, 0.01).unwrap();
        let from = GammaVector::from_indices(p, &[1, 4]);
        for _ in 0..50 {
            let mv = sample_proposal(&params, &from, &mut rng);
            let to = mv.apply(&from);
            let full =
                log_proposal_prob(&params, &to, &from) - log_proposal_prob(&params, &from, &to);
            assert!((full - mv.log_q_ratio).abs() < 1e-12);
            assert_eq!(Move::between(&from, &to).additions, mv.additions);
        }
    }

    #[test]
    fn single_flip_probability() {
        let params = ProposalParams::new(vec![0.2, 0.3, 0.4], vec![0.5; 3], 0.01).unwrap();
        let from = GammaVector::empty(3);
        let to = GammaVector::from_indices(3, &[1]);
        let expected = 0.3f64.ln() + 0.8f64.ln() + 0.6f64.ln();
        assert!((log_proposal_prob(&params, &from, &to) - expected).abs() < 1e-14);
        let expected_same = 0.8f64.ln() + 0.7f64.ln() + 0.6f64.ln();
        assert!((log_proposal_prob(&params, &from, &from) - expected_same).abs() < 1e-14);
    }

    #[test]
    fn acceptance_cases() {
        assert_eq!(acceptance_prob(-3.0, -3.0, -1.0, -1.0), 1.0);
        assert!((acceptance_prob(0.0, -1.0, 0.0, 0.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(acceptance_prob(0.0, f64::NAN, 0.0, 0.0), 0.0);
    }

    #[test]
    fn schedule_decreases() {
        let s = Schedule::default();
        assert_eq!(s.phi(1), 1.0);
        assert!(s.phi(2) < s.phi(1));
        assert!(Schedule {
            scale: 1.0,
            lambda: 0.5
        }
        .validate()
        .is_err());
    }
}
