use std::fs;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use bvsel::diagnostics::{
    median, pip_empirical, pip_rb, relative_efficiency, replicate_variances, run_summary,
};
use bvsel::idealized::{
    asym_var_linear, batch_mean_se, enumerate_posterior, esjd_closed_form, ideal_params,
    mutation_rate, simulate_ideal, ProductTarget, Variant,
};
use bvsel::io::{
    format_f64, generate_synthetic, load_csv, summary_json, write_dataset_csv, write_pips,
    write_summary, write_trace, LoadOptions, SynthSpec,
};
use bvsel::rng::{derive_seed, stream_rng, Stream};
use bvsel::sampler::{run as run_sampler, InitModel, PtConfig};
use bvsel::{Dataset, GPrior, InclusionPrior, KernelRegistry, PriorSpec, RunConfig};
use rand::Rng;
use serde_json::json;

use crate::args::{
    Budget, CompareArgs, DataArgs, EnumerateArgs, IdealizedArgs, Init, Preset, PriorArgs, RunArgs,
    SamplerArgs, SimulateArgs, VariantArg,
};
use crate::usage;

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        log::info!("no --seed given; drew {s} from the OS");
        s
    })
}

fn load(args: &DataArgs) -> Result<Dataset> {
    let opts = LoadOptions {
        response: args.response.clone(),
        standardize: args.standardize,
    };
    Ok(load_csv(&args.data, &opts)?)
}

fn parse_beta(text: &str) -> Result<InclusionPrior> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(usage(format!("--h-beta expects `a,b`, got {text:?}")));
    };
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| usage(format!("--h-beta: {s:?} is not a number")))
    };
    Ok(InclusionPrior::Beta {
        a: parse(a)?,
        b: parse(b)?,
    })
}

fn inclusion_prior(h: Option<f64>, h_beta: Option<&str>, p: usize) -> Result<InclusionPrior> {
    match (h, h_beta) {
        (_, Some(text)) => parse_beta(text),
        (Some(h), None) => Ok(InclusionPrior::Fixed { h }),
        (None, None) => Ok(InclusionPrior::Fixed {
            h: (10.0 / p as f64).min(0.5),
        }),
    }
}

fn build_prior(args: &PriorArgs, p: usize) -> Result<PriorSpec> {
    let prior = PriorSpec {
        g: match args.g_half_cauchy {
            Some(scale) => GPrior::HalfCauchy { scale },
            None => GPrior::Fixed { value: args.g },
        },
        h: inclusion_prior(args.h, args.h_beta.as_deref(), p)?,
    };
    prior.validate()?;
    Ok(prior)
}

fn init_model(init: Init) -> InitModel {
    match init {
        Init::Empty => InitModel::Empty,
        Init::Prior => InitModel::PriorDraw,
    }
}

fn build_run_config(s: &SamplerArgs, seed: u64, p: usize) -> Result<RunConfig> {
    let mut cfg = RunConfig {
        algorithm: s.algo.name().into(),
        n_chains: s.chains,
        burn_in: s.burnin,
        n_iters: s.iters,
        thin: s.thin,
        seed,
        pt: s.pt.map(|levels| PtConfig {
            levels,
            ..Default::default()
        }),
        init: init_model(s.init),
        rank_guard: !s.no_rank_guard,
        g_step: s.g_step,
        rb_estimates: s.rb,
        ..Default::default()
    };
    let a = &mut cfg.adapt;
    if let Some(v) = s.tau {
        a.tau = v;
    }
    if let Some(v) = s.tau_l {
        a.tau_l = v;
    }
    if let Some(v) = s.tau_u {
        a.tau_u = v;
    }
    if let Some(v) = s.kappa {
        a.kappa = v;
    }
    if let Some(v) = s.lambda {
        a.lambda = v;
    }
    a.eps = s.eps;
    a.rb_burnin_only = s.rb_burnin_only || s.preset == Preset::BigData;
    cfg.validate(p)?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = SynthSpec {
        n: args.n,
        p: args.p,
        rho: args.rho,
        snr: args.snr,
        sigma2: args.sigma2,
        seed: resolve_seed(args.seed),
    };
    spec.validate()?;
    let (data, truth) = generate_synthetic(&spec)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let csv = args.out.join("data.csv");
    write_dataset_csv(&csv, &data)?;
    let truth_path = args.out.join("truth.json");
    fs::write(&truth_path, serde_json::to_string_pretty(&truth)? + "\n")?;
    println!(
        "wrote {} ({} rows, {} covariates) and {} with seed {}",
        csv.display(),
        data.n(),
        data.p(),
        truth_path.display(),
        spec.seed
    );
    Ok(())
}

fn print_top_pips(names: &[String], pips: &[f64], k: usize) {
    let mut order: Vec<usize> = (0..pips.len()).collect();
    order.sort_by(|&a, &b| pips[b].total_cmp(&pips[a]).then(a.cmp(&b)));
    println!("{:>6}  {:<16} {:>8}", "index", "variable", "pip");
    for &j in order.iter().take(k) {
        println!("{:>6}  {:<16} {:>8.4}", j + 1, names[j], pips[j]);
    }
}

pub fn run(args: &RunArgs) -> Result<()> {
    let data = load(&args.data)?;
    let prior = build_prior(&args.prior, data.p())?;
    let seed = resolve_seed(args.seed);
    let cfg = build_run_config(&args.sampler, seed, data.p())?;
    let out = run_sampler(&data, &prior, &cfg, &KernelRegistry::default())?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut summary = summary_json(&out);
    if let Some(obj) = summary.as_object_mut() {
        obj.insert("prior".into(), serde_json::to_value(prior)?);
        obj.insert(
            "data".into(),
            json!({
                "path": args.data.data.display().to_string(),
                "response": args.data.response,
                "standardize": args.data.standardize,
                "n": data.n(),
                "p": data.p(),
            }),
        );
    }
    write_summary(&args.out.join("summary.json"), &summary)?;

    let s = run_summary(&out);
    if out.counters.numerical_failures > 0 {
        log::warn!(
            "{} proposals could not be scored and were rejected",
            out.counters.numerical_failures
        );
    }
    if out.n_samples() == 0 {
        println!(
            "no sampling iterations; wrote {}",
            args.out.join("summary.json").display()
        );
        return Ok(());
    }
    let emp = pip_empirical(&out)?;
    let rb = pip_rb(&out).ok();
    write_pips(
        &args.out.join("pips.csv"),
        &out.names,
        Some(&emp),
        rb.as_deref(),
    )?;
    if args.trace {
        write_trace(&args.out.join("trace.csv"), &out.steps)?;
    }
    println!(
        "{}: acceptance {:.3}, mutation rate {:.3}, mean model size {:.2}, seed {seed}, {:.2}s",
        cfg.algorithm, s.acceptance_rate, s.mutation_rate, s.mean_model_size, s.timings.total
    );
    print_top_pips(&out.names, &emp, 10);
    println!("results in {}", args.out.display());
    Ok(())
}

struct Side {
    name: &'static str,
    estimates: Vec<Vec<f64>>,
    times: Vec<f64>,
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    if args.replicates < 2 {
        return Err(usage(format!(
            "--replicates must be at least 2 for a replicate variance, got {}",
            args.replicates
        )));
    }
    let (burnin_b, iters_b) = match args.budget {
        Budget::Time => (
            args.burnin_b.unwrap_or(args.burnin_a),
            args.iters_b.unwrap_or(args.iters_a),
        ),
        Budget::Iterations => {
            if args.burnin_b.is_some_and(|b| b != args.burnin_a)
                || args.iters_b.is_some_and(|b| b != args.iters_a)
            {
                return Err(usage(
                    "--budget iterations runs both samplers for the same number of iterations",
                ));
            }
            (args.burnin_a, args.iters_a)
        }
    };
    let data = load(&args.data)?;
    let prior = build_prior(&args.prior, data.p())?;
    let base = resolve_seed(args.seed);
    let registry = KernelRegistry::default();

    let mut sides = Vec::new();
    for (k, (algo, burn_in, n_iters)) in [
        (args.algo_a, args.burnin_a, args.iters_a),
        (args.algo_b, burnin_b, iters_b),
    ]
    .into_iter()
    .enumerate()
    {
        let mut side = Side {
            name: algo.name(),
            estimates: Vec::new(),
            times: Vec::new(),
        };
        for r in 0..args.replicates {
            let mut cfg = RunConfig {
                algorithm: algo.name().into(),
                n_chains: args.chains,
                burn_in,
                n_iters,
                seed: derive_seed(base, (2 * r + k) as u64),
                init: init_model(args.init),
                ..Default::default()
            };
            cfg.adapt.rb_burnin_only = args.rb_burnin_only;
            cfg.validate(data.p())?;
            let t = Instant::now();
            let out = run_sampler(&data, &prior, &cfg, &registry)?;
            side.times.push(t.elapsed().as_secs_f64());
            side.estimates.push(pip_empirical(&out)?);
            log::info!("{} replicate {}/{} done", side.name, r + 1, args.replicates);
        }
        sides.push(side);
    }

    let var_a = replicate_variances(&sides[0].estimates)?;
    let var_b = replicate_variances(&sides[1].estimates)?;
    let (ta, tb) = (median(&sides[0].times), median(&sides[1].times));
    let eff = match args.budget {
        Budget::Time => relative_efficiency(&var_a, ta, &var_b, tb)?,
        Budget::Iterations => relative_efficiency(&var_a, 1.0, &var_b, 1.0)?,
    };

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut w = csv::Writer::from_path(args.out.join("efficiency.csv"))?;
    w.write_record([
        "variable_index",
        "variable_name",
        "mean_pip_a",
        "mean_pip_b",
        "var_a",
        "var_b",
        "r",
    ])?;
    let mean =
        |est: &[Vec<f64>], j: usize| est.iter().map(|e| e[j]).sum::<f64>() / est.len() as f64;
    for j in 0..data.p() {
        w.write_record([
            (j + 1).to_string(),
            data.names()[j].clone(),
            format_f64(mean(&sides[0].estimates, j)),
            format_f64(mean(&sides[1].estimates, j)),
            format_f64(var_a[j]),
            format_f64(var_b[j]),
            format_f64(eff.ratios[j]),
        ])?;
    }
    w.flush()?;
    let report = json!({
        "algorithm_a": sides[0].name,
        "algorithm_b": sides[1].name,
        "replicates": args.replicates,
        "chains": args.chains,
        "budget": format!("{:?}", args.budget).to_lowercase(),
        "iterations_a": {"burn_in": args.burnin_a, "n_iters": args.iters_a},
        "iterations_b": {"burn_in": burnin_b, "n_iters": iters_b},
        "median_time_a": ta,
        "median_time_b": tb,
        "median_r": eff.median,
        "infinite_ratios": eff.infinite,
        "undefined_ratios": eff.undefined,
        "seed": base,
        "prior": prior,
        "version": bvsel::VERSION,
    });
    write_summary(&args.out.join("compare.json"), &report)?;

    println!(
        "{:<8} {:<8} {:>10} {:>10} {:>10}",
        "A", "B", "time A", "time B", "median r"
    );
    println!(
        "{:<8} {:<8} {:>10.3} {:>10.3} {:>10.2}",
        sides[0].name, sides[1].name, ta, tb, eff.median
    );
    if eff.infinite + eff.undefined > 0 {
        println!(
            "{} variables with zero variance under A only (r = inf), {} under both (excluded)",
            eff.infinite, eff.undefined
        );
    }
    println!(
        "per-variable table in {}",
        args.out.join("efficiency.csv").display()
    );
    Ok(())
}

pub fn enumerate(args: &EnumerateArgs) -> Result<()> {
    let data = load(&args.data)?;
    let p = data.p();
    if p > bvsel::idealized::ENUMERATION_CAP {
        return Err(usage(format!(
            "enumeration needs p <= {}, the data has p = {p}",
            bvsel::idealized::ENUMERATION_CAP
        )));
    }
    let prior = PriorSpec {
        g: GPrior::Fixed { value: args.g },
        h: inclusion_prior(args.h, args.h_beta.as_deref(), p)?,
    };
    prior.validate()?;
    let e = enumerate_posterior(&data, &prior, !args.no_rank_guard)?;

    let mut order: Vec<usize> = (0..e.log_probs.len()).collect();
    order.sort_by(|&a, &b| e.log_probs[b].total_cmp(&e.log_probs[a]).then(a.cmp(&b)));
    let names = data.names();
    let model_label = |mask: usize| {
        let vars: Vec<&str> = (0..p)
            .filter(|j| (mask >> j) & 1 == 1)
            .map(|j| names[j].as_str())
            .collect();
        if vars.is_empty() {
            "(null)".to_string()
        } else {
            vars.join(" ")
        }
    };

    println!("{:>6}  {:<16} {:>10}", "index", "variable", "pip");
    for j in 0..p {
        println!("{:>6}  {:<16} {:>10.6}", j + 1, names[j], e.pips[j]);
    }
    println!();
    println!("{:>5} {:>12} {:>5}  model", "rank", "prob", "size");
    for (rank, &mask) in order.iter().take(args.top).enumerate() {
        println!(
            "{:>5} {:>12.6e} {:>5}  {}",
            rank + 1,
            e.log_probs[mask].exp(),
            mask.count_ones(),
            model_label(mask)
        );
    }

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut w = csv::Writer::from_path(dir.join("exact_pips.csv"))?;
        w.write_record(["variable_index", "variable_name", "pip"])?;
        for j in 0..p {
            w.write_record([(j + 1).to_string(), names[j].clone(), format_f64(e.pips[j])])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("models.csv"))?;
        w.write_record(["rank", "log_prob", "prob", "size", "variables"])?;
        for (rank, &mask) in order.iter().take(args.top).enumerate() {
            w.write_record([
                (rank + 1).to_string(),
                format_f64(e.log_probs[mask]),
                format_f64(e.log_probs[mask].exp()),
                mask.count_ones().to_string(),
                model_label(mask),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

struct Check {
    variant: &'static str,
    quantity: &'static str,
    closed: f64,
    empirical: f64,
    se: f64,
    pass: bool,
}

fn check_variant(
    target: &ProductTarget,
    variant: Variant,
    steps: usize,
    seed: u64,
    out: &mut Vec<Check>,
) {
    let label = match variant {
        Variant::Independent => "independent",
        Variant::RandomWalk => "rw",
    };
    let mut rng = stream_rng(
        seed,
        Stream::Chain {
            replica: 0,
            level: 0,
        },
    );
    let sim = simulate_ideal(target, &ideal_params(target, variant), steps, &mut rng);
    let n = steps as f64;
    let batches = 100;

    let min_acc = sim.min_accept();
    out.push(Check {
        variant: label,
        quantity: "min acceptance",
        closed: 1.0,
        empirical: min_acc,
        se: 0.0,
        pass: min_acc >= 1.0 - 1e-12,
    });

    let closed = esjd_closed_form(target, variant);
    let (m, se) = batch_mean_se(&sim.jumps, batches);
    out.push(Check {
        variant: label,
        quantity: "ESJD",
        closed,
        empirical: m,
        se,
        pass: (m - closed).abs() <= 3.0 * se,
    });

    let closed = mutation_rate(target, variant);
    let (m, se) = batch_mean_se(&sim.mutations(), batches);
    // a rate within rounding of one leaves every batch identical
    let se = se.max((closed * (1.0 - closed) / n).sqrt());
    out.push(Check {
        variant: label,
        quantity: "mutation rate",
        closed,
        empirical: m,
        se,
        pass: (m - closed).abs() <= 3.0 * se,
    });

    // asymptotic variance of the model size by batch means
    let weights = vec![1.0; target.p()];
    let closed = asym_var_linear(target, &weights, &target.indicator_variances(), variant);
    let (_, se_mean) = batch_mean_se(&sim.sizes, batches);
    let est = n * se_mean * se_mean;
    let se = est.max(closed) * (2.0 / (batches - 1) as f64).sqrt();
    out.push(Check {
        variant: label,
        quantity: "asymptotic variance",
        closed,
        empirical: est,
        se,
        pass: (est - closed).abs() <= 3.0 * se,
    });
}

pub fn idealized_check(args: &IdealizedArgs) -> Result<()> {
    let pis: Vec<f64> = match &args.pis {
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("--pis: {s:?} is not a number")))
            })
            .collect::<Result<_>>()?,
        None => {
            if args.p == 0 {
                return Err(usage("--p must be at least 1"));
            }
            let mut rng = stream_rng(args.seed, Stream::Data);
            (0..args.p).map(|_| rng.random_range(0.05..0.95)).collect()
        }
    };
    if args.steps < 1000 {
        return Err(usage(format!(
            "--steps must be at least 1000, got {}",
            args.steps
        )));
    }
    let target = ProductTarget::new(pis)?;
    let variants: &[Variant] = match args.variant {
        VariantArg::Independent => &[Variant::Independent],
        VariantArg::Rw => &[Variant::RandomWalk],
        VariantArg::Both => &[Variant::Independent, Variant::RandomWalk],
    };
    let mut checks = Vec::new();
    for &v in variants {
        check_variant(&target, v, args.steps, args.seed, &mut checks);
    }

    let pis: Vec<String> = target.pis().iter().map(|q| format!("{q:.3}")).collect();
    println!(
        "p = {}, pi = ({}), {} steps, seed {}",
        target.p(),
        pis.join(", "),
        args.steps,
        args.seed
    );
    println!(
        "{:<12} {:<20} {:>12} {:>12} {:>10}  status",
        "variant", "quantity", "closed form", "empirical", "se"
    );
    for c in &checks {
        println!(
            "{:<12} {:<20} {:>12.6} {:>12.6} {:>10.2e}  {}",
            c.variant,
            c.quantity,
            c.closed,
            c.empirical,
            c.se,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(anyhow!("{failed} of {} checks failed", checks.len()));
    }
    Ok(())
}
