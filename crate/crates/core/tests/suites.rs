use splitfix::suites::Suite;

fn assert_suite(suite: Suite) {
    let report = suite.run();
    for c in &report.checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    assert!(report.passed(), "suite {suite} failed");
}

#[test]
fn proxes_suite_passes() {
    assert_suite(Suite::Proxes);
}

#[test]
fn reductions_suite_passes() {
    assert_suite(Suite::Reductions);
}

#[test]
fn fejer_suite_passes() {
    assert_suite(Suite::Fejer);
}

#[test]
fn lemmas_suite_passes() {
    assert_suite(Suite::Lemmas);
}

#[test]
fn bounds_suite_passes() {
    assert_suite(Suite::Bounds);
}
