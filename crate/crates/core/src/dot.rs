//! Graphviz export.

use std::fmt::Write;

use crate::model::{Automaton, NormSet};
use crate::rational;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn norm_lines(m: &Automaton, set: &NormSet, suffix: &str, out: &mut String) {
    for &n in set {
        write!(out, "\n{}{suffix}", m.norm(n)).expect("writing to a string");
    }
}

/// Renders `m` as a DOT digraph: one node per state in state order, labelled
/// with its norms, and one edge `p:a | guard ↦ resets` per transition. The
/// initial state has a double border.
pub fn to_dot(m: &Automaton) -> String {
    let mut out =
        String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n");
    for (q, s) in m.states().iter().enumerate() {
        let mut label = s.id.clone();
        norm_lines(m, &s.pers, " (persistent)", &mut label);
        norm_lines(m, &s.eph, "", &mut label);
        let initial = if q == m.initial() {
            ", peripheries=2"
        } else {
            ""
        };
        writeln!(
            out,
            "  {} [label={}{initial}];",
            quote(&s.id),
            quote(&label)
        )
        .expect("writing to a string");
    }
    for t in m.transitions() {
        let mut label = format!("{} | {}", t.label, t.guard);
        if !t.reset.is_identity() {
            let resets: Vec<String> = t
                .reset
                .entries()
                .map(|(c, v)| format!("{} := {}", m.clocks().name(c), rational::Display(v)))
                .collect();
            write!(label, " ↦ {}", resets.join(", ")).expect("writing to a string");
        }
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&m.state(t.source).id),
            quote(&m.state(t.target).id),
            quote(&label)
        )
        .expect("writing to a string");
    }
    out.push_str("}\n");
    out
}
