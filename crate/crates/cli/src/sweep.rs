use std::fmt::Write as _;
use std::fs;

use rayon::prelude::*;
use splitfix::{RelaxationSchedule, Vector};

use crate::config::ExperimentConfig;
use crate::run::{execute, prepare, reference, start_point, summarize, RunSummary};
use crate::{fmt_f64, fmt_opt, CliError, ExitStatus};

pub const SWEEP_HEADER: &str =
    "gamma,lambda,empirical_rate,r_squared,iterations,bound_factor,status";

/// Upper limit on sweep worker threads.
pub const THREADS_ENV: &str = "SPLITFIX_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Ran(RunSummary),
    /// A precondition failed; the message names it.
    Skipped(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub lambda: f64,
    pub outcome: PointOutcome,
}

impl SweepRow {
    fn csv(&self) -> String {
        let (g, l) = (fmt_f64(self.gamma), fmt_f64(self.lambda));
        match &self.outcome {
            PointOutcome::Ran(s) => format!(
                "{g},{l},{},{},{},{},{}",
                fmt_opt(s.empirical_rate),
                fmt_opt(s.r_squared),
                s.iterations,
                fmt_opt(s.bound_factor),
                s.status
            ),
            PointOutcome::Skipped(_) => format!("{g},{l},,,,,skipped"),
            PointOutcome::Failed(_) => format!("{g},{l},,,,,failed"),
        }
    }
}

fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Evaluates every `(γ, λ)` pair of the grid, `γ` varying slowest. Point
/// `i` starts from stream `i` of the configured start, so rows do not depend
/// on scheduling.
pub fn sweep_rows(config: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let grid = config.sweep.as_ref().ok_or_else(|| {
        CliError::Config("sweep needs a `sweep` grid with `gamma` and `lambda` lists".into())
    })?;
    let points: Vec<(f64, f64)> = grid
        .gamma
        .iter()
        .flat_map(|&g| grid.lambda.iter().map(move |&l| (g, l)))
        .collect();
    if points.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let inst = config.instance()?;
    let reference: Option<Vector> = reference(&inst);
    let eval = |(i, &(gamma, lambda)): (usize, &(f64, f64))| {
        let mut point = config.clone();
        point.gamma = gamma;
        point.schedule = RelaxationSchedule::Constant(lambda);
        point.output.snapshots = None;
        let outcome = match prepare(&point, &inst) {
            Err(CliError::Config(msg)) => PointOutcome::Skipped(msg),
            Err(e) => PointOutcome::Failed(e.to_string()),
            Ok(p) => {
                let x0 = start_point(&point.start, inst.dim(), i as u64);
                match execute(&p, reference.as_ref(), &x0) {
                    Ok(trace) => PointOutcome::Ran(summarize(&p, &trace)),
                    Err(e) => PointOutcome::Failed(e.to_string()),
                }
            }
        };
        SweepRow {
            gamma,
            lambda,
            outcome,
        }
    };
    let run_all = || points.par_iter().enumerate().map(eval).collect::<Vec<_>>();
    let rows = match thread_limit() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("{THREADS_ENV}: {e}")))?
            .install(run_all),
        None => run_all(),
    };
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv());
    }
    out
}

/// Writes the sweep CSV. Exit status is 1 when every point was skipped, 2
/// when some evaluated point did not converge, 0 otherwise.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<(ExitStatus, Vec<SweepRow>), CliError> {
    let rows = sweep_rows(config)?;
    for r in &rows {
        match &r.outcome {
            PointOutcome::Skipped(msg) => {
                eprintln!("skipped gamma={} lambda={}: {msg}", r.gamma, r.lambda)
            }
            PointOutcome::Failed(msg) => {
                eprintln!("failed gamma={} lambda={}: {msg}", r.gamma, r.lambda)
            }
            PointOutcome::Ran(_) => {}
        }
    }
    let path = config.output.path(&config.output.sweep);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(&path, sweep_csv(&rows))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if rows
        .iter()
        .all(|r| matches!(r.outcome, PointOutcome::Skipped(_)))
    {
        return Err(CliError::Config(
            "every sweep point violates a precondition".into(),
        ));
    }
    let all_converged = rows.iter().all(|r| match &r.outcome {
        PointOutcome::Ran(s) => s.status == "converged",
        PointOutcome::Skipped(_) => true,
        PointOutcome::Failed(_) => false,
    });
    let status = if all_converged {
        ExitStatus::Success
    } else {
        ExitStatus::IterationCap
    };
    Ok((status, rows))
}
