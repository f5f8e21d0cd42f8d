use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use super::step::StepRecord;
use crate::error::{Error, Result};
use crate::model::GammaVector;
use crate::proposal::{
    sample_proposal, AdaptSettings, AsiState, BucketSampler, EiaState, Move, ProposalParams,
};
use crate::rng::{uniform, ChainRng};

/// What a kernel sees after each chain step.
pub struct AdaptInput<'r> {
    pub record: &'r StepRecord,
    /// Global iteration index, starting at 1.
    pub iteration: u64,
    /// Conditional inclusion probabilities at the post-step model, when
    /// the kernel asked for them.
    pub rb_row: Option<&'r [f64]>,
}

/// Diminishing-adaptation bookkeeping from one update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdaptReport {
    pub violations: usize,
    pub floor_capped: bool,
}

/// A proposal mechanism over `{0,1}^p`, possibly adaptive.
pub trait SelectionKernel: Send {
    fn name(&self) -> &'static str;

    fn propose(&self, gamma: &GammaVector, rng: &mut ChainRng) -> Move;

    /// Whether the next [`adapt`](Self::adapt) call wants a row of
    /// conditional inclusion probabilities.
    fn wants_rb_row(&self) -> bool {
        false
    }

    fn adapt(&mut self, _input: &AdaptInput<'_>) -> AdaptReport {
        AdaptReport::default()
    }

    /// Called once when burn-in ends.
    fn end_burn_in(&mut self) {}

    fn params(&self) -> Option<&ProposalParams> {
        None
    }

    /// Compact numeric summary of the adaptation state for traces.
    fn snapshot(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Inputs for building a kernel.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub p: usize,
    /// Prior inclusion probability used for initialization.
    pub h: f64,
    pub settings: AdaptSettings,
    /// Use the bucketed sampler for `p` at or above this size.
    pub sparse_threshold: usize,
}

impl KernelSpec {
    fn sparse(&self) -> bool {
        self.p >= self.sparse_threshold
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Individually adapted proposal.
pub struct EiaKernel {
    state: EiaState,
    sparse: Option<BucketSampler>,
}

impl EiaKernel {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        let state = EiaState::new(spec.p, spec.h, &spec.settings)?;
        let sparse = spec.sparse().then(|| BucketSampler::new(state.params()));
        Ok(Self { state, sparse })
    }

    pub fn state(&self) -> &EiaState {
        &self.state
    }
}

impl SelectionKernel for EiaKernel {
    fn name(&self) -> &'static str {
        "eia"
    }

    fn propose(&self, gamma: &GammaVector, rng: &mut ChainRng) -> Move {
        match &self.sparse {
            Some(s) => s.sample(self.state.params(), gamma, rng),
            None => sample_proposal(self.state.params(), gamma, rng),
        }
    }

    fn adapt(&mut self, input: &AdaptInput<'_>) -> AdaptReport {
        let mv = &input.record.mv;
        let u = self
            .state
            .update(mv, input.record.accept_prob, input.iteration);
        if let Some(s) = &mut self.sparse {
            for &j in mv.additions.iter().chain(&mv.removals) {
                s.update(j, self.state.params().a()[j]);
            }
        }
        AdaptReport {
            violations: u.violations,
            floor_capped: false,
        }
    }

    fn params(&self) -> Option<&ProposalParams> {
        Some(self.state.params())
    }

    fn snapshot(&self) -> Vec<f64> {
        vec![mean(self.state.params().a()), mean(self.state.params().d())]
    }
}

/// Scaled proposal driven by running conditional inclusion estimates.
pub struct AsiKernel {
    state: AsiState,
    sparse: Option<BucketSampler>,
    rb_burnin_only: bool,
}

impl AsiKernel {
    pub fn new(spec: &KernelSpec) -> Result<Self> {
        let state = AsiState::new(spec.p, spec.h, &spec.settings)?;
        let sparse = spec.sparse().then(|| BucketSampler::new(state.params()));
        Ok(Self {
            state,
            sparse,
            rb_burnin_only: spec.settings.rb_burnin_only,
        })
    }

    pub fn state(&self) -> &AsiState {
        &self.state
    }
}

impl SelectionKernel for AsiKernel {
    fn name(&self) -> &'static str {
        "asi"
    }

    fn propose(&self, gamma: &GammaVector, rng: &mut ChainRng) -> Move {
        match &self.sparse {
            Some(s) => s.sample(self.state.params(), gamma, rng),
            None => sample_proposal(self.state.params(), gamma, rng),
        }
    }

    fn wants_rb_row(&self) -> bool {
        self.state.adapt_rb()
    }

    fn adapt(&mut self, input: &AdaptInput<'_>) -> AdaptReport {
        let u = self
            .state
            .update(input.rb_row, input.record.accept_prob, input.iteration);
        if let Some(s) = &mut self.sparse {
            *s = BucketSampler::new(self.state.params());
        }
        AdaptReport {
            violations: u.violations,
            floor_capped: u.floor_capped,
        }
    }

    fn end_burn_in(&mut self) {
        if self.rb_burnin_only {
            self.state.set_adapt_rb(false);
        }
    }

    fn params(&self) -> Option<&ProposalParams> {
        Some(self.state.params())
    }

    fn snapshot(&self) -> Vec<f64> {
        vec![self.state.zeta(), self.state.delta()]
    }
}

/// Non-adaptive add-delete-swap proposal.
///
/// With probability 1/2 one uniformly chosen variable is flipped, otherwise
/// a uniformly chosen included variable is exchanged with a uniformly chosen
/// excluded one. Both moves are symmetric. A swap from the empty or the
/// full model proposes no change.
#[derive(Debug, Clone, Default)]
pub struct AdsKernel;

impl SelectionKernel for AdsKernel {
    fn name(&self) -> &'static str {
        "ads"
    }

    fn propose(&self, gamma: &GammaVector, rng: &mut ChainRng) -> Move {
        let p = gamma.p();
        let mut mv = Move::default();
        if uniform(rng) < 0.5 {
            let j = rng.random_range(0..p);
            if gamma.contains(j) {
                mv.removals.push(j);
            } else {
                mv.additions.push(j);
            }
            return mv;
        }
        let k_in = gamma.p_gamma();
        if k_in == 0 || k_in == p {
            log::trace!("swap impossible at model size {k_in}");
            return mv;
        }
        let k = gamma.included()[rng.random_range(0..k_in)];
        let j = loop {
            let j = rng.random_range(0..p);
            if !gamma.contains(j) {
                break j;
            }
        };
        mv.removals.push(k);
        mv.additions.push(j);
        mv
    }
}

/// A product proposal with fixed parameters.
#[derive(Debug, Clone)]
pub struct FixedKernel {
    params: ProposalParams,
}

impl FixedKernel {
    pub fn new(params: ProposalParams) -> Self {
        Self { params }
    }
}

impl SelectionKernel for FixedKernel {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn propose(&self, gamma: &GammaVector, rng: &mut ChainRng) -> Move {
        sample_proposal(&self.params, gamma, rng)
    }

    fn params(&self) -> Option<&ProposalParams> {
        Some(&self.params)
    }
}

type Factory = Box<dyn Fn(&KernelSpec) -> Result<Box<dyn SelectionKernel>> + Send + Sync>;

/// Kernel constructors by name.
pub struct KernelRegistry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for KernelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl Default for KernelRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("eia", |s| Ok(Box::new(EiaKernel::new(s)?)));
        r.register("asi", |s| Ok(Box::new(AsiKernel::new(s)?)));
        r.register("ads", |_| Ok(Box::new(AdsKernel)));
        r
    }
}

impl KernelRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Adds or replaces a kernel constructor.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&KernelSpec) -> Result<Box<dyn SelectionKernel>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, spec: &KernelSpec) -> Result<Box<dyn SelectionKernel>> {
        let f = self.factories.get(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown algorithm {name:?}; available: {}",
                self.names().join(", ")
            ))
        })?;
        f(spec)
    }
}
