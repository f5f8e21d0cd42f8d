use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bvsel(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvsel"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn bvsel")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn simulate(dir: &Path, n: &str, p: &str, seed: &str, out: &str) {
    let o = bvsel(
        &["simulate", "--n", n, "--p", p, "--seed", seed, "--out", out],
        dir,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_writes_the_requested_shape_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "500", "500", "1", "a");
    simulate(dir.path(), "500", "500", "1", "b");
    let text = fs::read_to_string(dir.path().join("a/data.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 501);
    assert_eq!(lines.count(), 500);
    assert_eq!(
        text,
        fs::read_to_string(dir.path().join("b/data.csv")).unwrap()
    );

    let truth: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth["spec"]["seed"], 1);
    let b1 = truth["beta"][0].as_f64().unwrap();
    let want = 2.0 * 2.0 * (500f64.ln() / 500.0).sqrt();
    assert!((b1 - want).abs() < 1e-12, "{b1}");
}

#[test]
fn too_few_covariates_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bvsel(
        &["simulate", "--n", "20", "--p", "5", "--seed", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn unknown_flags_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bvsel(&["run", "--no-such-flag"], dir.path())), 2);
    assert_eq!(code(&bvsel(&["--help"], dir.path())), 0);
}

#[test]
fn zero_iterations_writes_only_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "40", "12", "2", "d");
    let o = bvsel(
        &[
            "run",
            "--data",
            "d/data.csv",
            "--iters",
            "0",
            "--seed",
            "4",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let entries: Vec<_> = fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(entries, ["summary.json"]);
}

#[test]
fn run_records_defaults_and_reproduces_with_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "60", "15", "3", "d");
    for out in ["o1", "o2"] {
        let o = bvsel(
            &[
                "run",
                "--data",
                "d/data.csv",
                "--iters",
                "500",
                "--burnin",
                "100",
                "--seed",
                "8",
                "--trace",
                "--out",
                out,
            ],
            dir.path(),
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap();
    assert_eq!(read("o1/pips.csv"), read("o2/pips.csv"));
    assert_eq!(read("o1/trace.csv").lines().count(), 501);

    let s: Value = serde_json::from_str(&read("o1/summary.json")).unwrap();
    assert_eq!(s["seed"], 8);
    assert_eq!(s["config"]["algorithm"], "asi");
    let a = &s["config"]["adapt"];
    assert_eq!(a["tau"], 0.234);
    assert_eq!(a["tau_l"], 0.01);
    assert_eq!(a["tau_u"], 0.1);
    assert_eq!(a["kappa"], 0.001);
    assert_eq!(a["lambda"], 0.55);
    assert_eq!(s["prior"]["h"]["kind"], "fixed");
    assert_eq!(s["prior"]["h"]["h"], 0.5);
    assert_eq!(s["data"]["p"], 15);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "40", "12", "5", "d");
    fs::write(
        dir.path().join("run.cfg"),
        "iters = 300\nburnin = 20\nrb-burnin-only = true\nseed = 11\n",
    )
    .unwrap();
    let o = bvsel(
        &[
            "--config",
            "run.cfg",
            "run",
            "--data",
            "d/data.csv",
            "--iters",
            "120",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap())
            .unwrap();
    assert_eq!(s["config"]["n_iters"], 120);
    assert_eq!(s["config"]["burn_in"], 20);
    assert_eq!(s["config"]["adapt"]["rb_burnin_only"], true);
    assert_eq!(s["seed"], 11);

    fs::write(dir.path().join("bad.cfg"), "iters 300\n").unwrap();
    let o = bvsel(
        &["--config", "bad.cfg", "run", "--data", "d/data.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn compare_needs_two_replicates_and_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "40", "12", "6", "d");
    assert_eq!(
        code(&bvsel(
            &["compare", "--data", "d/data.csv", "--replicates", "1"],
            dir.path()
        )),
        2
    );

    let o = bvsel(
        &[
            "compare",
            "--data",
            "d/data.csv",
            "--replicates",
            "3",
            "--chains",
            "2",
            "--burnin-a",
            "50",
            "--iters-a",
            "300",
            "--seed",
            "1",
            "--out",
            "c",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("c/efficiency.csv")).unwrap();
    assert_eq!(table.lines().count(), 13);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c/compare.json")).unwrap())
            .unwrap();
    assert_eq!(report["replicates"], 3);
    assert!(report["median_r"].is_number());
}

#[test]
fn enumeration_of_a_toy_problem_sums_to_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("toy.csv"),
        "a,b,y\n1,0,1\n0,1,0.5\n1,1,2\n0,0,0.1\n2,1,3\n",
    )
    .unwrap();
    let o = bvsel(
        &["enumerate", "--data", "toy.csv", "--h", "0.5", "--out", "e"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let models = fs::read_to_string(dir.path().join("e/models.csv")).unwrap();
    let probs: Vec<f64> = models
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 4);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn enumeration_refuses_large_problems() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "30", "25", "1", "d");
    assert_eq!(
        code(&bvsel(&["enumerate", "--data", "d/data.csv"], dir.path())),
        2
    );
}

#[test]
fn idealized_check_passes_for_the_random_walk() {
    let dir = tempfile::tempdir().unwrap();
    let o = bvsel(
        &["idealized-check", "--p", "5", "--variant", "rw"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    let acc = out.lines().find(|l| l.contains("min acceptance")).unwrap();
    assert!(acc.contains("1.000000") && acc.ends_with("pass"), "{acc}");
    assert!(!out.contains("FAIL"));
}
