use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use splitfix::analysis::{empirical_rate, empirical_rate_tail, EmpiricalRate};
use splitfix::problems::{reference_solve, ProblemInstance};
use splitfix::splitting::{drs_as_ppa_run, drs_run, dys_run, fbs_run, gppa_run};
use splitfix::{
    rate_bound, schedule_validate, Algorithm, AlgorithmConfig, IterateTrace, RateCase,
    RelaxationSchedule, Rng, Splitting, Termination, Vector,
};

use crate::config::{ExperimentConfig, Start};
use crate::{fmt_f64, fmt_opt, CliError, ExitStatus};

pub const TRACE_HEADER: &str = "k,lambda_k,fp_residual,dist_to_ref,bound_factor";

const REFERENCE_TOL: f64 = 1e-10;

/// A config that passed every admissibility check, with its operators built.
pub struct Prepared {
    pub algorithm: Algorithm,
    pub splitting: Splitting,
    pub cfg: AlgorithmConfig,
    /// Upper end of the open interval for `λ_k`.
    pub lambda_bound: f64,
    pub theta: Option<f64>,
    pub case: RateCase,
    pub kappa: Option<f64>,
    pub lipschitz: Option<f64>,
    pub window: f64,
}

/// Checks `config` against the preconditions of its algorithm and builds
/// the operators. Nothing is iterated here.
pub fn prepare(config: &ExperimentConfig, inst: &ProblemInstance) -> Result<Prepared, CliError> {
    let alg = config.algorithm;
    let gamma = config.gamma;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(CliError::Config(format!(
            "gamma = {gamma}: resolvent steps need a finite gamma > 0"
        )));
    }
    let splitting = config.splitting(inst)?;
    let theta = match alg {
        Algorithm::Fbs | Algorithm::Dys => splitting.c.cocoercivity(),
        _ => None,
    };
    let ub = alg.relaxation_bound(gamma, theta)?;
    check_open_interval(alg, &config.schedule, ub)?;
    let stop = config.stop;
    if !(stop.residual_tol >= 0.0) || stop.max_iter == 0 {
        return Err(CliError::Config(format!(
            "stop rule needs residual_tol >= 0 and max_iter >= 1, got ({}, {})",
            stop.residual_tol, stop.max_iter
        )));
    }
    if !(config.rate_window > 0.0 && config.rate_window <= 1.0) {
        return Err(CliError::Config(format!(
            "rate_window = {} must lie in (0, 1]",
            config.rate_window
        )));
    }
    let case = config.rate_case();
    if let Some(kappa) = config.kappa {
        // Surfaces missing or inadmissible bound inputs before the run.
        rate_bound(
            case,
            gamma,
            kappa,
            config.schedule.lambda(0),
            config.lipschitz,
            theta,
        )
        .map_err(|e| CliError::Config(format!("bound overlay ({case}): {e}")))?;
    }
    Ok(Prepared {
        algorithm: alg,
        splitting,
        cfg: config.algorithm_config(),
        lambda_bound: ub,
        theta,
        case,
        kappa: config.kappa,
        lipschitz: config.lipschitz,
        window: config.rate_window,
    })
}

/// Experiments keep `λ_k` strictly inside `(0, ub)`.
fn check_open_interval(
    alg: Algorithm,
    schedule: &RelaxationSchedule,
    ub: f64,
) -> Result<(), CliError> {
    let outside = |l: f64| !(l > 0.0 && l < ub);
    let bad = match schedule {
        RelaxationSchedule::Constant(l) => outside(*l).then_some((0, *l)),
        RelaxationSchedule::Explicit(v) => {
            if v.is_empty() {
                return Err(CliError::Config("explicit schedule is empty".into()));
            }
            v.iter().position(|&l| outside(l)).map(|k| (k, v[k]))
        }
        RelaxationSchedule::Vanishing { top, c } => {
            let verdict = schedule_validate(schedule, ub)?;
            if !verdict.ok {
                return Err(CliError::Config(format!(
                    "{alg}: relaxation schedule rejected: {}",
                    verdict.diagnostic
                )));
            }
            outside(top - c).then_some((0, top - c))
        }
    };
    match bad {
        None => Ok(()),
        Some((k, l)) => Err(CliError::Config(format!(
            "{alg}: lambda_{k} = {l} lies outside the open interval (0, {ub}) \
             required of the relaxation parameters"
        ))),
    }
}

pub fn start_point(start: &Start, dim: usize, index: u64) -> Vector {
    match start {
        Start::Zeros => Vector::zeros(dim),
        Start::Gaussian { seed, scale } => {
            Rng::new(*seed).child(index).gaussian_vector(dim) * *scale
        }
    }
}

/// Reference solution for the distance column; `None` when no oracle
/// applies or it fails.
pub fn reference(inst: &ProblemInstance) -> Option<Vector> {
    match &inst.reference {
        Some(r) => Some(r.z_star.clone()),
        None => match reference_solve(inst, REFERENCE_TOL) {
            Ok(r) => Some(r.z_star),
            Err(e) => {
                eprintln!("warning: no reference solution ({e}); dist_to_ref left blank");
                None
            }
        },
    }
}

pub fn execute(
    p: &Prepared,
    reference: Option<&Vector>,
    x0: &Vector,
) -> Result<IterateTrace, CliError> {
    let mut cfg = p.cfg.clone();
    if let Some(r) = reference {
        cfg = cfg.with_reference(r.clone());
    }
    let s = &p.splitting;
    let trace = match p.algorithm {
        Algorithm::Gppa => gppa_run(&s.a, &cfg, x0),
        Algorithm::Fbs => fbs_run(&s.a, &s.c, &cfg, x0),
        Algorithm::Drs => drs_run(&s.a, &s.b, &cfg, x0),
        Algorithm::DrsAsPpa => drs_as_ppa_run(&s.a, &s.b, &cfg, x0),
        Algorithm::Dys => dys_run(&s.a, &s.b, &s.c, &cfg, x0),
    }?;
    Ok(trace)
}

impl Prepared {
    pub fn bound_factor(&self, lambda: f64) -> Option<f64> {
        let kappa = self.kappa?;
        rate_bound(
            self.case,
            self.cfg.gamma,
            kappa,
            lambda,
            self.lipschitz,
            self.theta,
        )
        .ok()
        .map(|b| b.factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub gamma: f64,
    pub status: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub empirical_rate: Option<f64>,
    pub r_squared: Option<f64>,
    /// Largest per-step factor over the run; constant schedules have one.
    pub bound_factor: Option<f64>,
}

pub fn status_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIter => "max_iter",
    }
}

pub fn summarize(p: &Prepared, trace: &IterateTrace) -> RunSummary {
    let fit = trace
        .distances()
        .and_then(|_| empirical_rate(trace, p.window).ok());
    let bound = trace
        .records
        .iter()
        .filter_map(|r| p.bound_factor(r.lambda))
        .fold(None, |acc: Option<f64>, f| {
            Some(acc.map_or(f, |a| a.max(f)))
        });
    RunSummary {
        algorithm: p.algorithm.to_string(),
        gamma: p.cfg.gamma,
        status: status_name(trace.termination).into(),
        iterations: trace.iterations(),
        final_residual: trace.final_residual(),
        empirical_rate: fit.as_ref().map(|f| f.rate),
        r_squared: fit.map(|f| f.r_squared),
        bound_factor: bound,
    }
}

pub fn trace_csv(p: &Prepared, trace: &IterateTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            fmt_f64(r.lambda),
            fmt_f64(r.residual),
            fmt_opt(r.dist_to_ref),
            fmt_opt(p.bound_factor(r.lambda))
        );
    }
    out
}

fn snapshots_csv(trace: &IterateTrace) -> Option<String> {
    let snaps = trace.snapshots.as_ref()?;
    let mut out = String::from("k");
    let dim = trace.last.len();
    for i in 0..dim {
        let _ = write!(out, ",w_{i}");
    }
    out.push('\n');
    for (k, s) in snaps.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in s.w.iter() {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    Some(out)
}

/// Recomputes the empirical rate from the distance column of a trace CSV.
pub fn rate_from_trace_csv(text: &str, window: f64) -> Result<EmpiricalRate, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(CliError::Config(
            "trace CSV has an unexpected header".into(),
        ));
    }
    let dists = lines
        .map(|line| {
            let field = line.split(',').nth(3).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                CliError::Config(format!("trace CSV: bad dist_to_ref field `{field}`"))
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(empirical_rate_tail(&dists, window)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs one experiment and writes its trace, summary and (if requested)
/// snapshots.
pub fn cmd_run(config: &ExperimentConfig) -> Result<(ExitStatus, RunSummary), CliError> {
    let inst = config.instance()?;
    let prepared = prepare(config, &inst)?;
    let reference = reference(&inst);
    let x0 = start_point(&config.start, inst.dim(), 0);
    let trace = execute(&prepared, reference.as_ref(), &x0)?;
    let summary = summarize(&prepared, &trace);
    let out = &config.output;
    write_file(&out.path(&out.trace), &trace_csv(&prepared, &trace))?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&out.path(&out.summary), &(json + "\n"))?;
    if let (Some(path), Some(csv)) = (&out.snapshots, snapshots_csv(&trace)) {
        write_file(&out.path(path), &csv)?;
    }
    let status = match trace.termination {
        Termination::Converged => ExitStatus::Success,
        Termination::MaxIter => ExitStatus::IterationCap,
    };
    Ok((status, summary))
}
