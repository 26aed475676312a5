use std::time::Instant;

use delaydiff::registry::{run_example, scenario, Basis, ExampleId};

#[test]
fn every_example_is_deterministic_and_fast() {
    for id in ExampleId::ALL {
        let start = Instant::now();
        let a = run_example(id, 11).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let b = run_example(id, 11).unwrap();
        assert_eq!(a.checks, b.checks, "{id}");
        assert!(elapsed < 10.0, "{id} took {elapsed} s");
        assert!(!a.checks.is_empty());
        assert!(a.tables.iter().all(|t| !t.csv.is_empty() && t.name.ends_with(".csv")));
    }
}

#[test]
fn every_check_is_consistent_with_its_relation() {
    for id in ExampleId::ALL {
        for c in run_example(id, 3).unwrap().checks {
            let ok = match c.relation {
                delaydiff::registry::Relation::Within => (c.actual - c.expected).abs() <= c.tolerance,
                delaydiff::registry::Relation::AtMost => c.actual <= c.expected,
                delaydiff::registry::Relation::AtLeast => c.actual >= c.expected,
            };
            assert_eq!(ok, c.passed, "{id}: {}", c.name);
            assert!(matches!(c.basis, Basis::ClosedForm | Basis::Computed));
        }
    }
}

#[test]
fn examples_with_closed_form_expectations_pass() {
    for id in [
        ExampleId::ConstantDelay,
        ExampleId::DegenerateTplus1,
        ExampleId::NonuniquenessRemarkH2,
        ExampleId::Example31Blowup,
        ExampleId::DyadicUnbounded,
        ExampleId::ExistContinuousExample,
        ExampleId::CdTauCounterexample,
        ExampleId::TransportConstant,
        ExampleId::TransportVarying,
        ExampleId::StatedepDemo,
    ] {
        let r = run_example(id, 5).unwrap();
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| &c.name).collect();
        assert!(failed.is_empty(), "{id}: {failed:?}");
    }
}

#[test]
fn matrix_sequence_distances_follow_the_closed_form() {
    // sup over [−1, 10] of |(a+1/k)^{n} − a^{n}| is attained at n = 1: 1/k
    // on [−1, 0) and n = 2 on [0, 1): (a+1/k)² − a² = 1/k + 1/k² for a = 1/2
    let r = run_example(ExampleId::CdMatrixSequence, 5).unwrap();
    let d = r.check("sup distance at k=100").unwrap().actual;
    assert!((d - (0.01 + 1e-4)).abs() < 1e-15);
    assert!(r.check("sup distance decreasing in k").unwrap().passed);
}

#[test]
fn scenarios_round_trip_through_json() {
    for id in ExampleId::ALL {
        let scn = scenario(id).unwrap();
        let text = serde_json::to_string(&scn).unwrap();
        let back: delaydiff::Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, scn, "{id}");
    }
}
