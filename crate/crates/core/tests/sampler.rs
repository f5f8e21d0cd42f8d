mod common;

use bvsel::diagnostics::{pip_empirical, run_summary};
use bvsel::idealized::{batch_mean_se, enumerate_posterior, Enumeration};
use bvsel::model::{log_marginal_likelihood, CrossCache, ModelContext};
use bvsel::proposal::Move;
use bvsel::rng::{stream_rng, Stream};
use bvsel::sampler::{
    mh_step, run, AdsKernel, FixedKernel, InitModel, ModelTarget, PtConfig, PtLadder,
    SelectionKernel,
};
use bvsel::{
    Dataset, GPrior, GammaVector, KernelRegistry, PriorSpec, ProposalParams, RunConfig, RunOutput,
};
use common::random_dataset;

fn registry_with_fixed(a: f64, d: f64) -> KernelRegistry {
    let mut reg = KernelRegistry::default();
    reg.register("fixed", move |spec| {
        Ok(Box::new(FixedKernel::new(ProposalParams::constant(
            spec.p, a, d, 0.01,
        )?)))
    });
    reg
}

/// Largest `|pip - exact| / se` over coordinates, with batch-means errors
/// pooled across chains.
fn max_z(out: &RunOutput, exact: &Enumeration) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..out.p {
        let series: Vec<f64> = (0..out.n_chains)
            .flat_map(|c| out.indicator_series(c, j))
            .collect();
        let (mean, se) = batch_mean_se(&series, 100);
        let z = (mean - exact.pips[j]).abs() / se.max(1e-4);
        worst = worst.max(z);
    }
    worst
}

fn exactness_data(p: usize) -> (Dataset, PriorSpec, Enumeration) {
    let data = random_dataset(31 + p as u64, 30, p);
    let prior = PriorSpec::fixed(9.0, 0.3);
    let exact = enumerate_posterior(&data, &prior, true).unwrap();
    (data, prior, exact)
}

#[test]
fn fixed_proposal_chain_recovers_enumerated_pips() {
    let (data, prior, exact) = exactness_data(8);
    let reg = registry_with_fixed(0.15, 0.3);
    let cfg = RunConfig {
        algorithm: "fixed".into(),
        burn_in: 1000,
        n_iters: 1_000_000,
        seed: 11,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &reg).unwrap();
    let z = max_z(&out, &exact);
    assert!(z < 3.0, "max z = {z}");
    assert!(out.counters.max_log_post_drift < 1e-8);
}

#[test]
fn add_delete_swap_recovers_enumerated_pips() {
    let (data, prior, exact) = exactness_data(8);
    let cfg = RunConfig {
        algorithm: "ads".into(),
        burn_in: 1000,
        n_iters: 1_000_000,
        seed: 12,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
    let z = max_z(&out, &exact);
    assert!(z < 3.0, "max z = {z}");
}

#[test]
fn tempered_cold_chain_recovers_enumerated_pips() {
    let (data, prior, exact) = exactness_data(6);
    let reg = registry_with_fixed(0.2, 0.3);
    let cfg = RunConfig {
        algorithm: "fixed".into(),
        burn_in: 1000,
        n_iters: 500_000,
        seed: 13,
        pt: Some(PtConfig {
            levels: 2,
            ..Default::default()
        }),
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &reg).unwrap();
    let z = max_z(&out, &exact);
    assert!(z < 3.0, "max z = {z}");
    let ladder = out.ladder.as_ref().unwrap();
    assert_eq!(ladder.temps().len(), 2);
    assert_eq!(ladder.temps()[1], 1.0);
    assert!(ladder.swap_accepts[0] > 0);
}

#[test]
fn chains_are_exchangeable_with_fixed_parameters() {
    let (data, prior, _) = exactness_data(8);
    let reg = registry_with_fixed(0.15, 0.3);
    let cfg = RunConfig {
        algorithm: "fixed".into(),
        n_chains: 4,
        burn_in: 500,
        n_iters: 100_000,
        seed: 14,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &reg).unwrap();
    for j in 0..8 {
        let stats: Vec<(f64, f64)> = (0..4)
            .map(|c| batch_mean_se(&out.indicator_series(c, j), 50))
            .collect();
        for a in 0..4 {
            for b in 0..a {
                let (ma, sa) = stats[a];
                let (mb, sb) = stats[b];
                let se = (sa * sa + sb * sb).sqrt().max(1e-3);
                assert!(
                    (ma - mb).abs() < 4.5 * se,
                    "j {j}, chains {a}/{b}: {ma} vs {mb}"
                );
            }
        }
    }
}

#[test]
fn identity_move_is_accepted_with_probability_one() {
    let data = random_dataset(40, 20, 5);
    let prior = PriorSpec::fixed(9.0, 0.2);
    let ctx = ModelContext::new(&data, &prior);
    let mut gamma = GammaVector::from_indices(5, &[1, 3]);
    let mut state = ctx.evaluate(&gamma, 9.0).unwrap();
    let cache = CrossCache::new();
    let mut rng = stream_rng(
        1,
        Stream::Chain {
            replica: 0,
            level: 0,
        },
    );
    let mut target = ModelTarget {
        ctx: &ctx,
        state: &mut state,
        cache: &cache,
        temperature: 1.0,
    };
    let rec = mh_step(&mut target, &mut gamma, Move::default(), &mut rng);
    assert_eq!(rec.accept_prob, 1.0);
    assert!(rec.accepted && !rec.mutated());
    assert_eq!(gamma.sorted_indices(), vec![1, 3]);

    // accepted moves keep the incremental state equal to a rebuild
    let mv = Move::between(&gamma, &GammaVector::from_indices(5, &[0, 3, 4]));
    let mut target = ModelTarget {
        ctx: &ctx,
        state: &mut state,
        cache: &cache,
        temperature: 1.0,
    };
    let mut tries = 0;
    while !mh_step(&mut target, &mut gamma, mv.clone(), &mut rng).accepted {
        tries += 1;
        assert!(tries < 100_000);
    }
    let (lm, _) = log_marginal_likelihood(&data, 9.0, &gamma).unwrap();
    assert!((state.log_marginal - lm).abs() < 1e-8 * lm.abs().max(1.0));
}

#[test]
fn swap_from_a_full_model_is_a_no_op() {
    let p = 6;
    let full = GammaVector::from_indices(p, &[0, 1, 2, 3, 4, 5]);
    let mut rng = stream_rng(
        2,
        Stream::Chain {
            replica: 0,
            level: 0,
        },
    );
    let mut noops = 0;
    for _ in 0..1000 {
        let mv = AdsKernel.propose(&full, &mut rng);
        assert!(mv.additions.is_empty() && mv.removals.len() <= 1);
        assert_eq!(mv.log_q_ratio, 0.0);
        noops += mv.is_identity() as u32;
    }
    assert!(noops > 400 && noops < 600);
}

#[test]
fn zero_iterations_keep_only_the_initial_state() {
    let data = random_dataset(41, 20, 5);
    let prior = PriorSpec::fixed(9.0, 0.2);
    let cfg = RunConfig {
        burn_in: 0,
        n_iters: 0,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
    assert_eq!(out.n_samples(), 0);
    assert!(out.steps.is_empty());
    assert_eq!(out.initial.len(), 1);
    assert_eq!(GammaVector::empty(5).pack(), out.initial[0]);
}

fn outputs_identical(a: &RunOutput, b: &RunOutput) {
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.initial, b.initial);
    assert_eq!(a.steps.len(), b.steps.len());
    for (x, y) in a.steps.iter().zip(&b.steps) {
        assert_eq!(x.acceptance_prob.to_bits(), y.acceptance_prob.to_bits());
        assert_eq!(x.log_posterior.to_bits(), y.log_posterior.to_bits());
        assert_eq!(
            (x.accepted, x.model_size, x.n_flips),
            (y.accepted, y.model_size, y.n_flips)
        );
    }
    let bits = |v: &Option<Vec<f64>>| {
        v.as_ref()
            .map(|v| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>())
    };
    assert_eq!(bits(&a.rb_sum), bits(&b.rb_sum));
    assert_eq!(
        a.counters.adaptation_violations,
        b.counters.adaptation_violations
    );
}

#[test]
fn same_seed_gives_identical_output() {
    let data = random_dataset(42, 40, 12);
    let prior = PriorSpec::fixed(9.0, 0.2);
    for (algo, pt) in [
        ("eia", None),
        ("asi", Some(PtConfig::default())),
        ("ads", None),
    ] {
        let cfg = RunConfig {
            algorithm: algo.into(),
            n_chains: 3,
            burn_in: 300,
            n_iters: 2000,
            seed: 99,
            pt,
            init: InitModel::PriorDraw,
            rb_estimates: true,
            ..Default::default()
        };
        let a = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
        let b = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
        outputs_identical(&a, &b);
        let c = run(
            &data,
            &prior,
            &RunConfig { seed: 100, ..cfg },
            &KernelRegistry::default(),
        )
        .unwrap();
        assert_ne!(a.samples, c.samples);
    }
}

#[test]
fn thread_count_does_not_change_tempered_runs() {
    // p >= 256 with per-level kernels takes the parallel path
    let data = random_dataset(43, 40, 300);
    let prior = PriorSpec::fixed(9.0, 5.0 / 300.0);
    let cfg = RunConfig {
        algorithm: "asi".into(),
        n_chains: 2,
        burn_in: 100,
        n_iters: 300,
        seed: 5,
        pt: Some(PtConfig {
            levels: 3,
            ..Default::default()
        }),
        ..Default::default()
    };
    let go = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap())
    };
    outputs_identical(&go(1), &go(4));
}

#[test]
fn asi_floor_keeps_at_least_one_expected_flip() {
    let data = random_dataset(44, 40, 30);
    let prior = PriorSpec::fixed(9.0, 0.1);
    let cfg = RunConfig {
        algorithm: "asi".into(),
        burn_in: 500,
        n_iters: 3000,
        trace_stride: 1,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
    assert_eq!(out.adaptation.len(), 3500);
    if out.counters.floor_capped == 0 {
        for s in &out.adaptation {
            assert!(s.values[0] * s.values[1] >= 1.0 - 1e-12, "{:?}", s);
        }
    }
    assert_eq!(out.counters.adaptation_violations, 0);
}

#[test]
fn unknown_kernel_names_are_rejected() {
    let data = random_dataset(45, 20, 5);
    let prior = PriorSpec::fixed(9.0, 0.2);
    let cfg = RunConfig {
        algorithm: "gibbs".into(),
        ..Default::default()
    };
    let err = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap_err();
    assert!(err.to_string().contains("gibbs"));
}

#[test]
fn ladder_rebuilds_from_its_gaps() {
    let schedule = bvsel::proposal::Schedule::default();
    let mut ladder = PtLadder::geometric(4, 0.234, schedule);
    assert_eq!(ladder.temps(), &[0.125, 0.25, 0.5, 1.0]);
    for i in 1..50 {
        ladder.adapt((i % 3) as usize, 1.0, i);
    }
    let rebuilt = PtLadder::from_rho(ladder.rho().to_vec(), 0.234, schedule);
    for (a, b) in ladder.temps().iter().zip(rebuilt.temps()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(ladder.temps().windows(2).all(|w| w[0] < w[1]));
    assert!(ladder.temps()[0] < 0.125);
}

#[test]
fn random_g_matches_a_gridded_posterior() {
    let p = 5;
    let data = random_dataset(46, 30, p);
    let scale = 2.0;
    let prior = PriorSpec {
        g: GPrior::HalfCauchy { scale },
        ..PriorSpec::fixed(1.0, 0.3)
    };

    // p(log g | y) on a 51-point grid, models enumerated
    let (lo, hi) = (1e-5f64.ln(), 1e5f64.ln());
    let grid: Vec<f64> = (0..51).map(|k| lo + (hi - lo) * k as f64 / 50.0).collect();
    let log_w: Vec<f64> = grid
        .iter()
        .map(|&lg| {
            let g = lg.exp();
            let terms: Vec<f64> = (0..(1u64 << p))
                .map(|mask| {
                    let gamma = GammaVector::from_mask(p, mask);
                    log_marginal_likelihood(&data, g, &gamma).unwrap().0
                        + prior.log_model_prior(gamma.p_gamma(), p)
                })
                .collect();
            let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln() + prior.log_g_density(g) + lg
        })
        .collect();
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w
        .iter()
        .enumerate()
        .map(|(k, v)| (v - top).exp() * if k == 0 || k == 50 { 0.5 } else { 1.0 })
        .collect();
    let grid_mean = w.iter().zip(&grid).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();

    let cfg = RunConfig {
        algorithm: "ads".into(),
        burn_in: 2000,
        n_iters: 300_000,
        seed: 21,
        g_step: 1.0,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
    let logs: Vec<f64> = out.g_samples[0].iter().map(|g| g.ln()).collect();
    let (mean, se) = batch_mean_se(&logs, 100);
    assert!(
        (mean - grid_mean).abs() < 3.0 * se,
        "{mean} +- {se} vs {grid_mean}"
    );
    let s = run_summary(&out);
    assert!(s.g_acceptance.unwrap() > 0.1);

    // a zero step leaves g where it started
    let frozen = run(
        &data,
        &prior,
        &RunConfig {
            g_step: 0.0,
            n_iters: 500,
            ..cfg
        },
        &KernelRegistry::default(),
    )
    .unwrap();
    assert!(frozen.g_samples[0].iter().all(|&g| g == scale));
}

#[test]
fn large_simulated_problem_separates_signal() {
    let (data, truth) =
        bvsel::io::generate_synthetic(&bvsel::io::SynthSpec::new(120, 60, 0.6, 3.0, 4)).unwrap();
    let prior = PriorSpec::fixed(9.0, 10.0 / 60.0);
    let cfg = RunConfig {
        algorithm: "asi".into(),
        n_chains: 2,
        burn_in: 1000,
        n_iters: 4000,
        ..Default::default()
    };
    let out = run(&data, &prior, &cfg, &KernelRegistry::default()).unwrap();
    let pip = pip_empirical(&out).unwrap();
    for &j in &truth.active {
        assert!(pip[j - 1] > 0.9, "variable {j}: {}", pip[j - 1]);
    }
}
