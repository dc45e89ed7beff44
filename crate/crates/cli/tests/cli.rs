use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use splitfix::suites::Suite;
use splitfix_cli::config::{ExperimentConfig, Overrides};
use splitfix_cli::sweep::{sweep_csv, sweep_rows, PointOutcome, SWEEP_HEADER};
use splitfix_cli::{cmd_run, cmd_sweep, cmd_verify, rate_from_trace_csv, CliError, ExitStatus};

const TOY: &str = r#"{
  "schema": 1,
  "problem": {"kind": "LINEAR_MONOTONE", "seed": 1, "n": 5, "mu": 1.0, "skew": 0.0},
  "algorithm": "gppa",
  "gamma": 1.0,
  "schedule": {"constant": 1.0},
  "stop": {"residual_tol": 1e-10, "max_iter": 1000},
  "kappa": 1.0
}"#;

fn toy(dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_json(TOY).unwrap();
    c.output.dir = dir.to_path_buf();
    c
}

fn exe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitfix"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn run_on_unit_toy_has_rate_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let (status, summary) = cmd_run(&toy(dir.path())).unwrap();
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(summary.status, "converged");
    assert!((summary.empirical_rate.unwrap() - 0.5).abs() <= 1e-6);
    assert!((summary.bound_factor.unwrap() - 3f64.sqrt() / 2.0).abs() <= 1e-12);
    assert!(summary.final_residual <= 1e-10);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    for key in [
        "empirical_rate",
        "r_squared",
        "iterations",
        "final_residual",
        "bound_factor",
    ] {
        assert!(json.get(key).is_some(), "summary lacks {key}");
    }
}

#[test]
fn trace_csv_layout_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy(dir.path());
    let (_, summary) = cmd_run(&cfg).unwrap();
    let text = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("k,lambda_k,fp_residual,dist_to_ref,bound_factor")
    );
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[0], k.to_string());
        for f in &fields[1..] {
            f.parse::<f64>().unwrap();
        }
    }
    let again = rate_from_trace_csv(&text, cfg.rate_window).unwrap();
    assert_eq!(Some(again.rate), summary.empirical_rate);
    assert_eq!(Some(again.r_squared), summary.r_squared);
}

#[test]
fn bound_column_blank_without_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.kappa = None;
    let (_, summary) = cmd_run(&cfg).unwrap();
    assert_eq!(summary.bound_factor, None);
    let text = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut ca = ExperimentConfig::from_json(TOY).unwrap();
    ca.algorithm = splitfix::Algorithm::Dys;
    ca.gamma = 0.8;
    ca.lipschitz = Some(0.25);
    let mut cb = ca.clone();
    ca.output.dir = a.path().into();
    cb.output.dir = b.path().into();
    cmd_run(&ca).unwrap();
    cmd_run(&cb).unwrap();
    for f in ["trace.csv", "summary.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn fbs_step_beyond_twice_cocoercivity_is_rejected() {
    // μ = 2 puts C = I in the FBS split, so ϑ = 1.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.algorithm = splitfix::Algorithm::Fbs;
    cfg.problem.mu = Some(2.0);
    cfg.gamma = 3.0;
    let err = cmd_run(&cfg).unwrap_err();
    assert!(
        matches!(&err, CliError::Config(m) if m.contains("(0, 2*theta)")),
        "{err}"
    );
    assert!(!dir.path().join("trace.csv").exists());
}

#[test]
fn relaxation_at_the_bound_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.apply(&Overrides {
        lambda: Some(2.0),
        ..Overrides::default()
    });
    assert!(matches!(cmd_run(&cfg), Err(CliError::Config(m)) if m.contains("open interval")));
}

#[test]
fn iteration_cap_reports_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.stop.max_iter = 5;
    let (status, summary) = cmd_run(&cfg).unwrap();
    assert_eq!(status, ExitStatus::IterationCap);
    assert_eq!(summary.status, "max_iter");
    assert_eq!(summary.iterations, 5);
}

#[test]
fn config_errors() {
    assert!(ExperimentConfig::from_json(&TOY.replace("\"schema\": 1", "\"schema\": 2")).is_err());
    assert!(ExperimentConfig::from_json(&TOY.replace("\"gamma\"", "\"gama\"")).is_err());
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(
        &TOY.replace("LINEAR_MONOTONE", "LASSO")
            .replace("\"n\": 5", "\"m\": 8, \"n\": 3, \"p\": 1.5"),
    )
    .unwrap();
    cfg.output.dir = dir.path().into();
    assert!(matches!(cmd_run(&cfg), Err(CliError::Config(m)) if m.contains("C3")));
    let mut cfg = toy(dir.path());
    cfg.orientation = splitfix_cli::config::Orientation::Swapped;
    assert!(matches!(cmd_run(&cfg), Err(CliError::Config(_))));
}

#[test]
fn overrides_win_over_file() {
    let mut cfg = ExperimentConfig::from_json(TOY).unwrap();
    cfg.apply(&Overrides {
        gamma: Some(0.4),
        lambda: Some(1.5),
        seed: Some(9),
        max_iter: Some(7),
        tol: Some(1e-3),
        out: Some("elsewhere".into()),
    });
    assert_eq!(cfg.gamma, 0.4);
    assert_eq!(cfg.schedule, splitfix::RelaxationSchedule::Constant(1.5));
    assert_eq!(cfg.problem.seed, 9);
    assert_eq!((cfg.stop.max_iter, cfg.stop.residual_tol), (7, 1e-3));
    assert_eq!(
        cfg.output.path(&cfg.output.trace),
        Path::new("elsewhere/trace.csv")
    );
}

#[test]
fn swapped_dys_on_lasso_converges_and_dumps_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let base = r#"{"schema": 1, "problem": {"kind": "LASSO", "seed": 11, "m": 10, "n": 3},
        "algorithm": "dys", "gamma": 0.5, "stop": {"residual_tol": 1e-12, "max_iter": 100000},
        "output": {"snapshots": "snaps.csv"}}"#;
    let mut a = ExperimentConfig::from_json(base).unwrap();
    a.output.dir = dir.path().join("a");
    let mut b = a.clone();
    b.orientation = splitfix_cli::config::Orientation::Swapped;
    b.output.dir = dir.path().join("b");
    assert_eq!(cmd_run(&a).unwrap().0, ExitStatus::Success);
    assert_eq!(cmd_run(&b).unwrap().0, ExitStatus::Success);
    let snaps = fs::read_to_string(dir.path().join("a/snaps.csv")).unwrap();
    assert!(snaps.starts_with("k,w_0,w_1,w_2\n"));
}

#[test]
fn sweep_three_by_three_all_converge() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.sweep = Some(splitfix_cli::config::SweepGrid {
        gamma: vec![0.5, 1.0, 2.0],
        lambda: vec![0.5, 1.0, 1.5],
    });
    let (status, rows) = cmd_sweep(&cfg).unwrap();
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(rows.len(), 9);
    assert!(rows
        .iter()
        .all(|r| matches!(&r.outcome, PointOutcome::Ran(s) if s.status == "converged")));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(SWEEP_HEADER));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn sweep_marks_drs_lambda_two_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.algorithm = splitfix::Algorithm::Drs;
    cfg.sweep = Some(splitfix_cli::config::SweepGrid {
        gamma: vec![1.0],
        lambda: vec![1.0, 2.0],
    });
    let (_, rows) = cmd_sweep(&cfg).unwrap();
    assert!(matches!(rows[0].outcome, PointOutcome::Ran(_)));
    assert!(matches!(rows[1].outcome, PointOutcome::Skipped(_)));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().nth(2), Some("1.0,2.0,,,,,skipped"));
}

#[test]
fn sweep_rejects_empty_and_fully_skipped_grids() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy(dir.path());
    cfg.sweep = Some(splitfix_cli::config::SweepGrid {
        gamma: vec![],
        lambda: vec![1.0],
    });
    assert!(matches!(cmd_sweep(&cfg), Err(CliError::Config(_))));
    cfg.sweep = Some(splitfix_cli::config::SweepGrid {
        gamma: vec![1.0, -1.0],
        lambda: vec![2.0, 3.0],
    });
    assert!(matches!(cmd_sweep(&cfg), Err(CliError::Config(_))));
}

#[test]
fn sweep_rows_do_not_depend_on_thread_count() {
    let mut cfg = ExperimentConfig::from_json(TOY).unwrap();
    cfg.start = splitfix_cli::config::Start::Gaussian {
        seed: 5,
        scale: 2.0,
    };
    cfg.sweep = Some(splitfix_cli::config::SweepGrid {
        gamma: vec![0.3, 0.9, 2.7, 8.1],
        lambda: vec![0.4, 1.0, 1.6],
    });
    let pool = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
    };
    let one = pool(1).install(|| sweep_csv(&sweep_rows(&cfg).unwrap()));
    let four = pool(4).install(|| sweep_csv(&sweep_rows(&cfg).unwrap()));
    assert_eq!(one, four);
}

#[test]
fn verify_reductions_passes() {
    let mut out = Vec::new();
    let (status, reports) = cmd_verify(&[Suite::Reductions], &mut out).unwrap();
    assert_eq!(status, ExitStatus::Success);
    assert_eq!(reports[0].checks.len(), 4);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 4);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("toy.json");
    fs::write(&config, TOY).unwrap();
    let c = config.to_str().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(exe(&["run", c, "--out", o]).status.code(), Some(0));
    assert_eq!(
        exe(&["run", c, "--out", o, "--max-iter", "3"])
            .status
            .code(),
        Some(2)
    );
    let bad = exe(&["run", c, "--out", o, "--lambda", "2"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("open interval"));
    assert_eq!(exe(&["run", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(exe(&["sweep", c, "--out", o]).status.code(), Some(1));
    assert_eq!(exe(&["verify", "bounds", "lemmas"]).status.code(), Some(0));
}

#[test]
fn binary_sweep_respects_thread_limit() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("toy.json");
    fs::write(
        &config,
        TOY.replace(
            "\"kappa\": 1.0",
            "\"kappa\": 1.0, \"sweep\": {\"gamma\": [1.0, 2.0], \"lambda\": [1.0]}",
        ),
    )
    .unwrap();
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_splitfix"))
            .env("SPLITFIX_THREADS", threads)
            .args(["sweep", config.to_str().unwrap(), "--out"])
            .arg(dir.path().join(out))
            .status()
            .unwrap()
    };
    assert_eq!(run("1", "a").code(), Some(0));
    assert_eq!(run("3", "b").code(), Some(0));
    assert_eq!(
        fs::read(dir.path().join("a/sweep.csv")).unwrap(),
        fs::read(dir.path().join("b/sweep.csv")).unwrap()
    );
}
