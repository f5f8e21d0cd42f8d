use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{AdaptInput, KernelRegistry, KernelSpec, SelectionKernel};
use super::step::{mh_step, ModelTarget, StepRecord};
use super::tempering::{PtConfig, PtLadder};
use crate::diagnostics::{AdaptSnapshot, RunCounters, RunOutput, StepSummary, Timings};
use crate::error::{Error, Result};
use crate::model::{
    update_g, CrossCache, Dataset, GammaVector, ModelContext, PosteriorState, PriorSpec,
};
use crate::proposal::AdaptSettings;
use crate::rng::{stream_rng, uniform, ChainRng, Stream};

/// Where chains start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitModel {
    Empty,
    /// Each variable included independently with the prior mean `h`.
    PriorDraw,
}

/// Settings of one sampler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Registered kernel name.
    pub algorithm: String,
    pub n_chains: usize,
    pub burn_in: u64,
    pub n_iters: u64,
    pub thin: u64,
    pub seed: u64,
    pub pt: Option<PtConfig>,
    pub adapt: AdaptSettings,
    pub init: InitModel,
    /// Reject models with more than `n - 2` variables.
    pub rank_guard: bool,
    /// Rebuild each chain's statistics after this many accepted moves.
    pub refresh_every: u64,
    /// Random-walk step on `log g` when `g` is random.
    pub g_step: f64,
    /// Record the adaptation state every this many iterations (0: never).
    pub trace_stride: u64,
    /// Use the bucketed proposal sampler from this many variables on.
    pub sparse_threshold: usize,
    /// Always accumulate conditional inclusion rows while sampling, even for
    /// kernels that do not need them.
    pub rb_estimates: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: "asi".into(),
            n_chains: 1,
            burn_in: 1000,
            n_iters: 10_000,
            thin: 1,
            seed: 0,
            pt: None,
            adapt: AdaptSettings::default(),
            init: InitModel::Empty,
            rank_guard: true,
            refresh_every: 1000,
            g_step: 0.5,
            trace_stride: 0,
            sparse_threshold: 4096,
            rb_estimates: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.n_chains < 1 {
            return Err(Error::Config("need at least one chain".into()));
        }
        if self.thin < 1 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.refresh_every < 1 {
            return Err(Error::Config("refresh interval must be at least 1".into()));
        }
        if !(self.g_step >= 0.0 && self.g_step.is_finite()) {
            return Err(Error::Config(format!(
                "g step must be finite and >= 0, got {}",
                self.g_step
            )));
        }
        self.adapt.validate(p)?;
        if let Some(pt) = &self.pt {
            pt.validate()?;
        }
        Ok(())
    }
}

/// One chain: its model, statistics, cache and random stream.
pub struct ChainState {
    pub gamma: GammaVector,
    pub post: PosteriorState,
    pub cache: CrossCache,
    pub rng: ChainRng,
    accepted: u64,
    row: Vec<f64>,
}

impl ChainState {
    pub fn new(ctx: &ModelContext<'_>, gamma: GammaVector, g: f64, rng: ChainRng) -> Result<Self> {
        let post = ctx.evaluate(&gamma, g)?;
        Ok(Self {
            row: vec![0.0; gamma.p()],
            cache: CrossCache::for_columns(gamma.p()),
            gamma,
            post,
            rng,
            accepted: 0,
        })
    }

    /// Rebuilds the statistics from scratch and records the drift.
    fn refresh(&mut self, ctx: &ModelContext<'_>, counters: &mut RunCounters) {
        counters.refreshes += 1;
        match ctx.evaluate(&self.gamma, self.post.g()) {
            Ok(fresh) => {
                counters.max_refresh_drift = counters
                    .max_refresh_drift
                    .max(self.post.stats.max_rel_deviation(&fresh.stats));
                counters.max_log_post_drift = counters
                    .max_log_post_drift
                    .max((self.post.log_marginal - fresh.log_marginal).abs());
                self.post = fresh;
            }
            Err(e) => {
                counters.refresh_failures += 1;
                log::warn!("statistics refresh failed: {e}");
            }
        }
    }

    fn swap_state(&mut self, other: &mut Self) {
        std::mem::swap(&mut self.gamma, &mut other.gamma);
        std::mem::swap(&mut self.post, &mut other.post);
        std::mem::swap(&mut self.cache, &mut other.cache);
    }
}

struct StepOptions {
    iteration: u64,
    temperature: f64,
    force_row: bool,
    refresh_every: u64,
    random_g: bool,
    g_step: f64,
}

/// Propose, accept or reject, update `g`, compute the conditional inclusion
/// row if needed, adapt. Returns the record and whether `chain.row` is fresh.
fn chain_step(
    ctx: &ModelContext<'_>,
    kernel: &mut dyn SelectionKernel,
    chain: &mut ChainState,
    opt: &StepOptions,
    counters: &mut RunCounters,
) -> (StepRecord, bool) {
    let mv = kernel.propose(&chain.gamma, &mut chain.rng);
    let record = {
        let mut target = ModelTarget {
            ctx,
            state: &mut chain.post,
            cache: &chain.cache,
            temperature: opt.temperature,
        };
        mh_step(&mut target, &mut chain.gamma, mv, &mut chain.rng)
    };
    counters.numerical_failures += record.failed as u64;
    if record.mutated() {
        chain.accepted += 1;
        if chain.accepted.is_multiple_of(opt.refresh_every) {
            chain.refresh(ctx, counters);
        }
    }
    if opt.random_g {
        counters.g_proposals += 1;
        match update_g(
            ctx,
            &chain.gamma,
            &mut chain.post,
            opt.temperature,
            opt.g_step,
            &mut chain.rng,
        ) {
            Ok(true) => counters.g_accepts += 1,
            Ok(false) => {}
            Err(e) => log::warn!("g update failed: {e}"),
        }
    }
    let kernel_row = kernel.wants_rb_row();
    let fresh = kernel_row || opt.force_row;
    if fresh {
        counters.rb_saturated += chain.post.stats.rao_blackwell_row(
            ctx.data,
            &mut chain.cache,
            ctx.prior,
            opt.temperature,
            &mut chain.row,
        ) as u64;
    }
    let report = kernel.adapt(&AdaptInput {
        record: &record,
        iteration: opt.iteration,
        rb_row: kernel_row.then_some(chain.row.as_slice()),
    });
    counters.adaptation_violations += report.violations as u64;
    counters.floor_capped += report.floor_capped as u64;
    (record, fresh)
}

fn step_level(
    ctx: &ModelContext<'_>,
    kernel: &mut dyn SelectionKernel,
    chains: &mut [ChainState],
    opt: &StepOptions,
) -> (Vec<(StepRecord, bool)>, RunCounters) {
    let mut counters = RunCounters::default();
    let out = chains
        .iter_mut()
        .map(|c| chain_step(ctx, kernel, c, opt, &mut counters))
        .collect();
    (out, counters)
}

fn initial_model(
    ctx: &ModelContext<'_>,
    init: InitModel,
    g: f64,
    rng: &mut ChainRng,
) -> GammaVector {
    let p = ctx.p();
    match init {
        InitModel::Empty => GammaVector::empty(p),
        InitModel::PriorDraw => {
            let h = ctx.prior.mean_h();
            for _ in 0..100 {
                let bits: Vec<bool> = (0..p).map(|_| uniform(rng) < h).collect();
                let gamma = GammaVector::from_bits(&bits);
                if ctx.evaluate(&gamma, g).is_ok() {
                    return gamma;
                }
            }
            log::warn!("no usable prior draw for the starting model; starting empty");
            GammaVector::empty(p)
        }
    }
}

/// Runs `config.algorithm` from `registry` on the linear-model posterior.
///
/// `L = n_chains` chains (per temperature level under tempering) share one
/// adaptive kernel per level and adapt it in chain order after every step,
/// so the output depends only on the seed. Levels run in parallel when
/// they have their own kernels and `p` is large enough to pay for it.
pub fn run(
    data: &Dataset,
    prior: &PriorSpec,
    config: &RunConfig,
    registry: &KernelRegistry,
) -> Result<RunOutput> {
    let start = Instant::now();
    let p = data.p();
    prior.validate()?;
    config.validate(p)?;
    let ctx = ModelContext {
        data,
        prior,
        rank_guard: config.rank_guard,
    };
    let spec = KernelSpec {
        p,
        h: prior.mean_h(),
        settings: config.adapt.clone(),
        sparse_threshold: config.sparse_threshold,
    };
    let pt = config.pt.clone().unwrap_or(PtConfig {
        levels: 1,
        ..PtConfig::default()
    });
    let m = pt.levels;
    let l = config.n_chains;
    let mut ladder = PtLadder::geometric(m, pt.swap_target, config.adapt.schedule());
    let n_kernels = if pt.share_params { 1 } else { m };
    let mut kernels = (0..n_kernels)
        .map(|_| registry.create(&config.algorithm, &spec))
        .collect::<Result<Vec<_>>>()?;
    let g0 = prior.initial_g();
    let mut levels: Vec<Vec<ChainState>> = (0..m)
        .map(|k| {
            (0..l)
                .map(|r| {
                    let mut init_rng = stream_rng(
                        config.seed,
                        Stream::Init {
                            replica: r,
                            level: k,
                        },
                    );
                    let gamma = initial_model(&ctx, config.init, g0, &mut init_rng);
                    ChainState::new(
                        &ctx,
                        gamma,
                        g0,
                        stream_rng(
                            config.seed,
                            Stream::Chain {
                                replica: r,
                                level: k,
                            },
                        ),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut swap_rngs: Vec<ChainRng> = (0..l)
        .map(|r| stream_rng(config.seed, Stream::Swap { replica: r }))
        .collect();

    let cold = m - 1;
    let random_g = prior.fixed_g().is_none();
    let mut counters = RunCounters::default();
    let mut samples = vec![Vec::new(); l];
    let mut g_samples = vec![Vec::new(); if random_g { l } else { 0 }];
    let mut steps = Vec::with_capacity((config.n_iters as usize).saturating_mul(l));
    let mut adaptation = Vec::new();
    let mut rb_sum: Option<Vec<f64>> = None;
    let mut rb_rows = 0u64;
    let initial = levels[cold].iter().map(|c| c.gamma.pack()).collect();
    let parallel = n_kernels > 1 && p >= 256;

    let setup = start.elapsed().as_secs_f64();
    let mut burn_in_secs = 0.0;
    let phase = Instant::now();
    let total = config.burn_in + config.n_iters;
    for i in 1..=total {
        let sampling = i > config.burn_in;
        if i == config.burn_in + 1 {
            burn_in_secs = phase.elapsed().as_secs_f64();
            for k in kernels.iter_mut() {
                k.end_burn_in();
            }
        }
        let temps = ladder.temps().to_vec();
        let options = |k: usize| StepOptions {
            iteration: i,
            temperature: temps[k],
            force_row: sampling && config.rb_estimates && k == cold,
            refresh_every: config.refresh_every,
            random_g,
            g_step: config.g_step,
        };
        let results: Vec<(Vec<(StepRecord, bool)>, RunCounters)> = if n_kernels == 1 {
            let kernel = kernels[0].as_mut();
            levels
                .iter_mut()
                .enumerate()
                .map(|(k, chains)| step_level(&ctx, kernel, chains, &options(k)))
                .collect()
        } else if parallel {
            levels
                .par_iter_mut()
                .zip(kernels.par_iter_mut())
                .enumerate()
                .map(|(k, (chains, kernel))| step_level(&ctx, kernel.as_mut(), chains, &options(k)))
                .collect()
        } else {
            levels
                .iter_mut()
                .zip(kernels.iter_mut())
                .enumerate()
                .map(|(k, (chains, kernel))| step_level(&ctx, kernel.as_mut(), chains, &options(k)))
                .collect()
        };
        for (_, c) in &results {
            counters.merge(c);
        }

        if sampling {
            for (r, (_, fresh)) in results[cold].0.iter().enumerate() {
                if *fresh {
                    let sum = rb_sum.get_or_insert_with(|| vec![0.0; p]);
                    for (s, v) in sum.iter_mut().zip(&levels[cold][r].row) {
                        *s += v;
                    }
                    rb_rows += 1;
                }
            }
        }

        if m > 1 {
            for (r, srng) in swap_rngs.iter_mut().enumerate() {
                let k = srng.random_range(0..m - 1);
                let u = uniform(srng);
                let (lo, hi) = levels.split_at_mut(k + 1);
                let (a, b) = (&mut lo[k][r], &mut hi[0][r]);
                let prob = ladder.swap_prob(k, a.post.log_marginal, b.post.log_marginal);
                let accepted = u < prob;
                if accepted {
                    a.swap_state(b);
                }
                ladder.record_swap(k, accepted);
                if pt.adapt_ladder {
                    ladder.adapt(k, prob, i);
                }
            }
        }

        if sampling {
            let it = i - config.burn_in;
            for (r, (record, _)) in results[cold].0.iter().enumerate() {
                let c = &levels[cold][r];
                steps.push(StepSummary {
                    iteration: it,
                    chain: r as u32,
                    accepted: record.accepted,
                    acceptance_prob: record.accept_prob,
                    model_size: c.gamma.p_gamma() as u32,
                    n_flips: record.n_flips() as u32,
                    log_posterior: c.post.log_posterior(1.0),
                });
                if it.is_multiple_of(config.thin) {
                    samples[r].push(c.gamma.pack());
                    if random_g {
                        g_samples[r].push(c.post.g());
                    }
                }
            }
        }
        if config.trace_stride > 0 && i % config.trace_stride == 0 {
            adaptation.push(AdaptSnapshot {
                iteration: i,
                values: kernels[n_kernels - 1].snapshot(),
            });
        }
    }
    if config.burn_in == total {
        burn_in_secs = phase.elapsed().as_secs_f64();
    }
    let loop_secs = phase.elapsed().as_secs_f64();
    Ok(RunOutput {
        p,
        names: data.names().to_vec(),
        n_chains: l,
        initial,
        samples,
        rb_sum,
        rb_rows,
        steps,
        adaptation,
        g_samples,
        ladder: config.pt.as_ref().map(|_| ladder),
        counters,
        timings: Timings {
            setup,
            burn_in: burn_in_secs,
            sampling: loop_secs - burn_in_secs,
            total: start.elapsed().as_secs_f64(),
        },
        config: config.clone(),
        version: crate::VERSION.to_string(),
    })
}

/// [`run`] with the individually adapted kernel.
pub fn run_eia(data: &Dataset, prior: &PriorSpec, config: &RunConfig) -> Result<RunOutput> {
    let config = RunConfig {
        algorithm: "eia".into(),
        ..config.clone()
    };
    run(data, prior, &config, &KernelRegistry::default())
}

/// [`run`] with the scaled kernel.
pub fn run_asi(data: &Dataset, prior: &PriorSpec, config: &RunConfig) -> Result<RunOutput> {
    let config = RunConfig {
        algorithm: "asi".into(),
        ..config.clone()
    };
    run(data, prior, &config, &KernelRegistry::default())
}
