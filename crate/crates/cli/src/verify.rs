use std::io::Write;

use splitfix::suites::{Suite, SuiteReport};

use crate::ExitStatus;

/// Runs the named suites (all of them when `suites` is empty), printing
/// one line per check. Failures are repeated at the end.
pub fn cmd_verify(
    suites: &[Suite],
    out: &mut impl Write,
) -> std::io::Result<(ExitStatus, Vec<SuiteReport>)> {
    let chosen: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites.to_vec()
    };
    let mut reports = Vec::with_capacity(chosen.len());
    for suite in chosen {
        let report = suite.run();
        for c in &report.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(out, "[{tag}] {}/{}: {}", report.suite, c.name, c.detail)?;
        }
        reports.push(report);
    }
    let failures: Vec<String> = reports
        .iter()
        .flat_map(|r| r.failures().map(move |c| format!("{}/{}", r.suite, c.name)))
        .collect();
    if failures.is_empty() {
        writeln!(out, "all checks passed")?;
        Ok((ExitStatus::Success, reports))
    } else {
        writeln!(out, "{} failing check(s):", failures.len())?;
        for f in &failures {
            writeln!(out, "  {f}")?;
        }
        Ok((ExitStatus::VerifyFailed, reports))
    }
}
