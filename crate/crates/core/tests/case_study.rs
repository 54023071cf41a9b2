use std::path::PathBuf;

use tca::analysis::{analyze, AnalysisOptions};
use tca::flatten::{check_determinism, flatten, prune_unsat};
use tca::format::{parse_automaton, parse_trace};
use tca::model::{Automaton, NormSet};
use tca::semantics::run_trace;

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn resource() -> Automaton {
    parse_automaton(&fixture("resource.json")).unwrap()
}

fn ids(m: &Automaton, set: &NormSet) -> Vec<String> {
    set.iter().map(|&n| m.norm(n).id.clone()).collect()
}

#[test]
fn pruned_flattening_moves_the_obligation_into_q4_and_q5() {
    let m = resource();
    let mf = prune_unsat(&flatten(&m).unwrap()).unwrap();
    let mut shape: Vec<(String, Vec<String>)> = mf
        .flat_states
        .iter()
        .map(|f| (m.state(f.base).id.clone(), ids(&m, &f.labelling())))
        .collect();
    shape.sort();
    let expected: Vec<(String, Vec<String>)> = vec![
        ("q1".into(), vec![]),
        ("q2".into(), vec![]),
        ("q3".into(), vec!["o_release".into()]),
        (
            "q4".into(),
            vec!["o_release".into(), "f_release".into(), "f_request".into()],
        ),
        ("q5".into(), vec!["o_release".into()]),
    ];
    assert_eq!(shape, expected);
    assert!(check_determinism(&mf.automaton));
}

#[test]
fn unpruned_flattening_is_deterministic() {
    let mf = flatten(&resource()).unwrap();
    assert!(check_determinism(&mf.automaton));
    assert!(mf.state_count() > 5);
}

#[test]
fn analysis_reports_the_q4_clash_once() {
    let m = resource();
    for prune in [true, false] {
        let report = analyze(&m, AnalysisOptions { prune }).unwrap();
        let findings = report.findings();
        assert_eq!(findings.len(), 1, "prune = {prune}");
        let f = &findings[0];
        assert_eq!(m.state(f.base).id, "q4");
        assert_eq!(m.norm(f.pair.0).id, "o_release");
        assert_eq!(m.norm(f.pair.1).id, "f_release");
        assert_eq!(f.witness.to_string(), "t <= 15");
        assert!(f.witness.contains(&f.sample));
    }
}

#[test]
fn scenario_trace_ends_in_conflict() {
    let m = resource();
    let report = run_trace(&m, &parse_trace(&fixture("resource-trace.json")).unwrap()).unwrap();
    assert!(report.violation().is_none());
    assert_eq!(report.conflicts().len(), 1);
    assert_eq!(report.conflicts()[0].0, 3);
    assert_eq!(m.state(report.last_configuration().state).id, "q4");

    let late = run_trace(
        &m,
        &parse_trace(&fixture("resource-late-trace.json")).unwrap(),
    )
    .unwrap();
    let (at, norms) = late.violation().unwrap();
    assert_eq!(at, 3);
    assert_eq!(ids(&m, &norms.iter().copied().collect()), ["o_release"]);
}

#[test]
fn fixed_automaton_rejects_early_start() {
    let m = parse_automaton(&fixture("resource-fixed.json")).unwrap();
    let report = run_trace(&m, &parse_trace(&fixture("resource-trace.json")).unwrap()).unwrap();
    assert_eq!(report.violation().map(|(i, _)| i), Some(2));
    assert!(!report.has_conflict());
    // the added prohibition makes q4 unreachable without a violation
    assert!(analyze(&m, AnalysisOptions::default())
        .unwrap()
        .is_conflict_free());
}

#[test]
fn stress_fixture_stays_within_the_subset_bound() {
    let m = parse_automaton(&fixture("stress-six.json")).unwrap();
    let s0 = m.state_index("s0").unwrap();
    let full = flatten(&m).unwrap();
    assert!(full.variants_of(s0) <= 64);
    let pruned = prune_unsat(&full).unwrap();
    assert!(pruned.variants_of(s0) <= full.variants_of(s0));
    assert!(check_determinism(&full.automaton));
}
