//! Core regression suite: every fixture's committed expected-verdict table
//! must match the live checker outputs exactly, and every table entry must
//! name a check that actually runs.

use std::collections::HashSet;

use koszul::catalog;
use koszul::report::{ResidualContext, DEFAULT_POINTS, DEFAULT_SEED, TOL_IDENTITY};
use koszul::sample::sample_points;
use koszul::suites::{run_suite, Suite};

#[test]
fn expected_verdict_tables_match_checker_outputs() {
    let mut mismatches = Vec::new();
    for name in catalog::names() {
        let fixture = catalog::load(name).expect(name);
        let ctx = ResidualContext::new(
            sample_points(fixture.structure.chart(), DEFAULT_POINTS, DEFAULT_SEED).unwrap(),
            DEFAULT_SEED,
            TOL_IDENTITY,
        );
        let reports = run_suite(&fixture.structure, Suite::All, &ctx).expect(name);
        let mut seen = HashSet::new();
        for report in &reports {
            seen.insert(report.name.clone());
            let expected = fixture.expected_verdict(&report.name);
            if report.verdict != expected {
                mismatches.push(format!(
                    "{name}/{}: got {}, expected {} (residual {:.3e})",
                    report.name, report.verdict, expected, report.residual
                ));
            }
        }
        // stale table entries are bugs too
        for (entry, _) in &fixture.expected_deviations {
            if !seen.contains(entry) {
                mismatches.push(format!("{name}: table entry `{entry}` never ran"));
            }
        }
    }
    assert!(
        mismatches.is_empty(),
        "expected-verdict mismatches:\n{}",
        mismatches.join("\n")
    );
}

#[test]
fn fixture_names_are_stable() {
    assert_eq!(
        catalog::names(),
        vec![
            "poisson-flat-r2",
            "poisson-linear-r3",
            "contact-r3",
            "contact-r5",
            "kenmotsu-half",
            "kenmotsu-one",
            "lcs-gcs-r4",
            "lcs-broken",
        ]
    );
}
