use std::path::PathBuf;
use std::process::{Command, Output};

use tca::format::parse_automaton;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn tca(args: &[&str], files: &[PathBuf]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tca"))
        .args(args)
        .args(files)
        .env("TCA_COLOR", "never")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_accepts_the_case_study() {
    let out = tca(&["validate"], &[model("resource.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("5 states, 8 transitions, 3 norms"));
}

#[test]
fn validate_rejects_global_clock_reset() {
    let out = tca(&["validate"], &[fixture("gamma-reset.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 9"), "{err}");
    assert!(err.contains("global clock"), "{err}");
}

#[test]
fn validate_rejects_overlapping_guards() {
    let out = tca(&["validate"], &[fixture("nondeterministic.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("overlap on `t = 5`"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn syntax_errors_exit_2_with_position() {
    let out = tca(&["analyze"], &[fixture("truncated.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));
    let out = tca(&["validate"], &[fixture("missing.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_exit_codes() {
    let out = tca(&["analyze"], &[model("resource.json")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("PotentialConflicts (1 finding)"));
    assert!(
        text.contains("state q4: O[t <= 15](A:release) [o_release] vs F(A:release) [f_release]")
    );
    assert!(text.contains("sample:  {gamma: 0, t: 0}"));

    assert_eq!(
        tca(&["analyze"], &[model("resource-fixed.json")])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        tca(&["analyze"], &[fixture("no-norms.json")]).status.code(),
        Some(0)
    );
    assert_eq!(
        tca(&["analyze", "--no-prune"], &[model("resource.json")])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn analyze_without_q4_prohibitions_is_conflict_free() {
    let text = std::fs::read_to_string(model("resource.json")).unwrap();
    let edited = text.replace(
        r#"{"id": "q4", "eph": ["f_release", "f_request"]}"#,
        r#"{"id": "q4"}"#,
    );
    assert_ne!(text, edited);
    let dir = std::env::temp_dir().join(format!("tca-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("resource-free.json");
    std::fs::write(&path, edited).unwrap();
    let out = tca(&["analyze", "--json"], &[path]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "ConflictFree");
}

#[test]
fn simulate_exit_codes() {
    let out = tca(
        &["simulate"],
        &[model("resource.json"), model("resource-trace.json")],
    );
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text
        .contains("3. A:start @ 3 -> q4 {gamma: 3, t: 1} P={o_release} E={f_release,f_request}"));
    assert!(text.contains("conflict: o_release vs f_release"));

    let out = tca(
        &["simulate"],
        &[model("resource.json"), fixture("empty-trace.json")],
    );
    assert_eq!(out.status.code(), Some(0));

    let out = tca(
        &["simulate", "--verbose"],
        &[
            model("resource.json"),
            model("resource-late-trace.json"),
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("4. A:doanything @ 20 -> violation of o_release"));
}

#[test]
fn flatten_writes_a_parsable_document() {
    let dir = std::env::temp_dir().join(format!("tca-cli-flatten-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("flat.json");
    let out = tca(
        &["flatten", "--out", path.to_str().unwrap()],
        &[model("resource.json")],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("pruned: 5 states"));
    let flat = parse_automaton(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let ids: Vec<&str> = flat.states().iter().map(|s| s.id.as_str()).collect();
    assert!(ids.contains(&"q4|E={f_release,f_request}|P={o_release}"));
    assert!(flat.states().iter().all(|s| s.pers.is_empty()));
}

#[test]
fn flatten_of_a_norm_free_automaton_is_isomorphic() {
    let out = tca(&["flatten"], &[fixture("no-norms.json")]);
    assert_eq!(out.status.code(), Some(0));
    let flat = parse_automaton(&stdout(&out)).unwrap();
    let original =
        parse_automaton(&std::fs::read_to_string(fixture("no-norms.json")).unwrap()).unwrap();
    assert_eq!(flat.states().len(), original.states().len());
    let moves: Vec<_> = flat
        .transitions()
        .iter()
        .filter(|t| t.source != t.target)
        .map(|t| (t.label.to_string(), t.guard.to_string()))
        .collect();
    let expected: Vec<_> = original
        .transitions()
        .iter()
        .map(|t| (t.label.to_string(), t.guard.to_string()))
        .collect();
    assert_eq!(moves, expected);
}

#[test]
fn flatten_handles_the_stress_fixture() {
    let out = tca(&["flatten", "--no-prune"], &[model("stress-six.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(
        stderr(&out).contains("flattened: 128 states"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn export_dot() {
    let out = tca(&["export-dot"], &[model("resource.json")]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert_eq!(dot.matches("[label=").count(), 13);
    assert_eq!(dot.matches(" -> ").count(), 8);

    let out = tca(&["export-dot", "--flattened"], &[model("resource.json")]);
    let dot = stdout(&out);
    assert!(dot.contains(r#""q4|E={f_release,f_request}|P={o_release}" [label="#));
    // pruning removed the release loops on q4
    assert!(!dot.contains(r#""q4|E={f_release,f_request}|P={o_release}" -> "q4|E={f_release,f_request}|P={o_release}" [label="A:release"#));

    let out = tca(&["export-dot"], &[fixture("gamma-reset.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuzz_reports_counts() {
    let out = tca(
        &["fuzz", "--suite", "lemma1", "--seed", "5", "--count", "20"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "lemma1: 20 passed, 0 failed");
    let out = tca(&["fuzz", "--suite", "nope"], &[]);
    assert_eq!(out.status.code(), Some(2));
}
