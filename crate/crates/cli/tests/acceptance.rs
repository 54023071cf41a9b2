//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use tca::flatten::{flatten, prune_unsat};
use tca::format::parse_automaton;
use tca::model::{Automaton, NormSet};
use tca::oracle::{gen_trace, run_suite, trace_seed, GenParams, Suite};
use tca::semantics::run_trace;

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

fn load(name: &str) -> Automaton {
    parse_automaton(&std::fs::read_to_string(model(name)).expect("fixture exists"))
        .expect("fixture parses")
}

fn ids(m: &Automaton, set: &NormSet) -> Vec<String> {
    set.iter().map(|&n| m.norm(n).id.clone()).collect()
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:?}")
    })
}

fn case_study_detection() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tca"))
        .args(["analyze", "--json"])
        .arg(model("resource.json"))
        .env("TCA_COLOR", "never")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(1), || {
        format!("exit status {:?}", out.status.code())
    })?;
    let report: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let findings = report["findings"].as_array().ok_or("no findings array")?;
    ensure(findings.len() == 1, || {
        format!("{} findings", findings.len())
    })?;
    let f = &findings[0];
    ensure(f["state"] == "q4", || format!("finding at {}", f["state"]))?;
    ensure(f["norms"] == json!(["o_release", "f_release"]), || {
        format!("pair {}", f["norms"])
    })?;
    ensure(f["witness"] == json!([[["t", "<=", "15"]]]), || {
        format!("witness {}", f["witness"])
    })?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "one finding at q4, {} vs {}, witness {} ({elapsed:.0?})",
        f["pair"][0], f["pair"][1], f["witness_text"]
    ))
}

fn case_study_shape() -> Outcome {
    let m = load("resource.json");
    let mf = prune_unsat(&flatten(&m).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut changed: Vec<(String, Vec<String>)> = mf
        .flat_states
        .iter()
        .filter(|f| f.labelling() != m.state(f.base).labelling())
        .map(|f| (m.state(f.base).id.clone(), ids(&m, &f.labelling())))
        .collect();
    changed.sort();
    let expected = vec![
        (
            "q4".to_owned(),
            vec![
                "o_release".to_owned(),
                "f_release".into(),
                "f_request".into(),
            ],
        ),
        ("q5".to_owned(), vec!["o_release".to_owned()]),
    ];
    ensure(changed == expected, || {
        format!("changed flat states {changed:?}")
    })?;
    let mut bases: Vec<&str> = mf
        .flat_states
        .iter()
        .map(|f| m.state(f.base).id.as_str())
        .collect();
    bases.sort_unstable();
    ensure(bases == ["q1", "q2", "q3", "q4", "q5"], || {
        format!("flat states over {bases:?}")
    })?;
    Ok("only the q4 and q5 versions change, each gaining o_release".into())
}

fn suite(suite: Suite, count: usize, traces: usize, limit: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let report = run_suite(suite, 0, count, traces, &GenParams::default());
    let elapsed = start.elapsed();
    ensure(report.ok() && report.passed == count, || report.to_string())?;
    if let Some(limit) = limit {
        within(elapsed, limit)?;
    }
    Ok(format!("{report} ({elapsed:.2?})"))
}

fn flattening_suites() -> Outcome {
    let mut lines = Vec::new();
    for s in [
        Suite::ActiveMembership,
        Suite::SubsetExclusivity,
        Suite::SatImpliesTiming,
        Suite::Determinism,
    ] {
        lines.push(suite(s, 1000, 0, Some(Duration::from_secs(30)))?);
    }
    Ok(lines.join("; "))
}

fn stress_bound() -> Outcome {
    let start = Instant::now();
    let m = load("stress-six.json");
    let s0 = m.state_index("s0").ok_or("no state s0")?;
    let k = m.state(s0).pers.len();
    ensure(k == 6, || format!("s0 holds {k} persistent norms"))?;
    let full = flatten(&m).map_err(|e| e.to_string())?;
    let pruned = prune_unsat(&full).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let variants = full.variants_of(s0);
    ensure(variants <= 1 << k, || format!("{variants} variants of s0"))?;
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!(
        "{variants} variants of s0 before pruning (bound {}), {} after ({elapsed:.2?})",
        1 << k,
        pruned.variants_of(s0)
    ))
}

fn resolution() -> Outcome {
    let original = load("resource.json");
    let fixed = load("resource-fixed.json");
    let f_start = fixed
        .norms()
        .iter()
        .position(|n| n.id == "f_start")
        .ok_or("no f_start norm")?;
    let p = GenParams::default();
    let mut reaching = 0;
    for j in 0..1000 {
        // traces follow the original automaton, so many reach q4
        let ts = gen_trace(&original, &p.with_seed(trace_seed(2024, j)));
        let before = run_trace(&original, &ts).map_err(|e| e.to_string())?;
        let after = run_trace(&fixed, &ts).map_err(|e| e.to_string())?;
        ensure(!after.has_conflict(), || {
            format!("trace {j} flags a conflict on the fixed automaton")
        })?;
        if let Some(&(position, _)) = before.conflicts().first() {
            reaching += 1;
            let (at, norms) = after
                .violation()
                .ok_or_else(|| format!("trace {j} reaches the conflict without a violation"))?;
            let event = &ts.events()[at];
            ensure(at < position, || {
                format!("trace {j}: violation after the conflict")
            })?;
            ensure(
                event.label.party == "A" && event.label.action == "start" && norms == [f_start],
                || {
                    format!(
                        "trace {j}: first violation is {:?} at {}",
                        norms, event.label
                    )
                },
            )?;
        }
    }
    ensure(reaching > 0, || "no trace reached the conflict".into())?;
    Ok(format!(
        "{reaching} of 1000 traces reach the conflict in the original; each is stopped at A:start by f_start"
    ))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("case-study detection", case_study_detection),
        ("case-study flattening shape", case_study_shape),
        ("configuration correspondence, 200 x 50", || {
            suite(
                Suite::Correspondence,
                200,
                50,
                Some(Duration::from_secs(60)),
            )
        }),
        ("flattening property suites, 1000 each", flattening_suites),
        ("soundness probe, 50 x 1000", || {
            suite(Suite::Soundness, 50, 1000, Some(Duration::from_secs(120)))
        }),
        ("zone oracle, 1000 guard pairs", || {
            suite(Suite::Zones, 1000, 0, None)
        }),
        ("subset-variant bound, k = 6", stress_bound),
        ("resolution by prohibiting A:start in q3", resolution),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
