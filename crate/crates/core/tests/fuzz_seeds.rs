//! Replays the checked-in fuzz corpus through the same round-trip checks the
//! fuzz targets make, so the seeds stay valid without a nightly toolchain.

use std::path::PathBuf;
use std::sync::Arc;

use tca::format::{
    guard_to_json, parse_automaton, parse_guard, parse_trace, write_automaton, write_trace,
};
use tca::rational::{format_rational, parse_rational};
use tca::zone::ClockSet;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn automaton_seeds() {
    for (name, text) in seeds("parse_automaton") {
        let m = parse_automaton(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let written = write_automaton(&m);
        assert_eq!(
            write_automaton(&parse_automaton(&written).unwrap()),
            written,
            "{name}"
        );
    }
}

#[test]
fn trace_seeds() {
    for (name, text) in seeds("parse_trace") {
        let ts = parse_trace(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_trace(&write_trace(&ts)).unwrap(), ts, "{name}");
    }
}

#[test]
fn guard_seeds() {
    let clocks = Arc::new(ClockSet::new(["x", "y"]).unwrap());
    for (name, text) in seeds("parse_guard") {
        let g = parse_guard(&clocks, &text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let back = parse_guard(&clocks, &guard_to_json(&g).to_string()).unwrap();
        assert!(back.equivalent(&g).unwrap(), "{name}");
    }
}

#[test]
fn rational_seeds() {
    for (name, text) in seeds("parse_rational") {
        let r = parse_rational(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r, "{name}");
    }
}

mod mutated {
    use super::*;
    use proptest::prelude::*;

    fn mutate(text: &str, edits: &[(usize, u8)]) -> String {
        let mut bytes = text.as_bytes().to_vec();
        for &(at, b) in edits {
            if bytes.is_empty() {
                bytes.push(b);
            } else {
                let at = at % bytes.len();
                match b % 3 {
                    0 => bytes[at] = b,
                    1 => bytes.insert(at, b),
                    _ => {
                        bytes.remove(at);
                    }
                }
            }
        }
        String::from_utf8_lossy(&bytes).into_owned()
    }

    const NOISE: &str = "[]{}\",:0123456789/.-<=>! xytgamma";

    fn edits() -> impl Strategy<Value = Vec<(usize, u8)>> {
        prop::collection::vec(
            (
                any::<usize>(),
                prop::sample::select(NOISE.as_bytes().to_vec()),
            ),
            1..6,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn parsers_reject_without_panicking(pick in any::<usize>(), edits in edits()) {
            let clocks = Arc::new(ClockSet::new(["x", "y"]).unwrap());
            let all: Vec<(&str, String)> = ["parse_automaton", "parse_trace", "parse_guard", "parse_rational"]
                .into_iter()
                .flat_map(|t| seeds(t).into_iter().map(move |(_, s)| (t, s)))
                .collect();
            let (target, text) = &all[pick % all.len()];
            let input = mutate(text, &edits);
            match *target {
                "parse_automaton" => {
                    if let Ok(m) = parse_automaton(&input) {
                        let written = write_automaton(&m);
                        prop_assert_eq!(write_automaton(&parse_automaton(&written).unwrap()), written);
                    }
                }
                "parse_trace" => {
                    if let Ok(ts) = parse_trace(&input) {
                        prop_assert_eq!(parse_trace(&write_trace(&ts)).unwrap(), ts);
                    }
                }
                "parse_guard" => {
                    if let Ok(g) = parse_guard(&clocks, &input) {
                        let _ = g.not().time_predecessor();
                    }
                }
                _ => {
                    if let Ok(r) = parse_rational(&input) {
                        prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_numbers_are_errors() {
        let huge = "1".repeat(60);
        assert!(parse_rational(&huge).is_err());
        assert!(parse_rational(&format!("1/{huge}")).is_err());
        assert!(parse_rational(&format!("0.{huge}")).is_err());
        let clocks = Arc::new(ClockSet::new(["x", "y"]).unwrap());
        assert!(parse_guard(&clocks, &format!(r#"[[["x", "<=", "{huge}"]]]"#)).is_err());
    }
}
