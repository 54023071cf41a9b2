//! JSON documents: automata, traces, guards and analysis reports.
//!
//! Automaton documents look like
//!
//! ```json
//! {
//!   "version": 1,
//!   "clocks": ["t"],
//!   "parties": ["A", "B"],
//!   "actions": ["get", "release"],
//!   "norms": [{"id": "o1", "modality": "O", "party": "A", "action": "release",
//!              "guard": [[["t", "<=", "15"]]]}],
//!   "initial": "q1",
//!   "states": [{"id": "q1", "pers": ["o1"], "eph": []}],
//!   "transitions": [{"from": "q1", "party": "A", "action": "get", "to": "q1",
//!                    "guard": [[["t", ">", "2"]]], "reset": ["t"]}]
//! }
//! ```
//!
//! A guard is a list of zones, each a list of `[term, comparator, value]`
//! triples; `[]` is false and a missing guard is true. Norms inside state
//! lists may be written inline instead of by id. The global clock `gamma`
//! is implicit.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use json_spanned_value::Spanned;
use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::analysis::{AnalysisReport, Verdict};
use crate::model::{
    validate_wellformed, ActionLabel, Automaton, Modality, Norm, NormId, NormSet, Transition,
    Violation,
};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::semantics::{TimedEvent, TimedTrace};
use crate::zone::{ClockSet, Constraint, Guard, Reset, Valuation};

pub const FORMAT_VERSION: u32 = 1;

/// A problem at a position of the input text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", render(.diagnostics))]
pub struct FormatError {
    pub diagnostics: Vec<Diagnostic>,
}

fn render(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_owned(),
            None => message,
        };
        FormatError {
            diagnostics: vec![Diagnostic {
                line: e.line(),
                column: e.column(),
                message,
            }],
        }
    }
}

type Text = Spanned<String>;

/// A constant written either as a string (`"2.5"`, `"1/3"`) or an integer.
#[derive(Debug, Clone)]
struct RawValue(String);

impl<'de> Deserialize<'de> for RawValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RawValue;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational constant as a string or an integer")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<RawValue, E> {
                Ok(RawValue(s.to_owned()))
            }
            fn visit_u64<E: de::Error>(self, n: u64) -> Result<RawValue, E> {
                Ok(RawValue(n.to_string()))
            }
            fn visit_i64<E: de::Error>(self, n: i64) -> Result<RawValue, E> {
                Ok(RawValue(n.to_string()))
            }
            fn visit_f64<E: de::Error>(self, _: f64) -> Result<RawValue, E> {
                Err(E::custom("fractional constants must be written as strings"))
            }
        }
        d.deserialize_any(V)
    }
}

type RawGuard = Vec<Vec<(Text, Text, Spanned<RawValue>)>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNorm {
    id: Option<Text>,
    modality: Text,
    party: Text,
    action: Text,
    guard: Option<Spanned<RawGuard>>,
}

/// A state's norm entry: an id or an inline norm.
enum RawNormRef {
    Id(String),
    Inline(Box<RawNorm>),
}

impl<'de> Deserialize<'de> for RawNormRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawNormRef;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a norm id or a norm object")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<RawNormRef, E> {
                Ok(RawNormRef::Id(s.to_owned()))
            }
            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<RawNormRef, A::Error> {
                RawNorm::deserialize(de::value::MapAccessDeserializer::new(map))
                    .map(|n| RawNormRef::Inline(Box::new(n)))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    id: Text,
    #[serde(default)]
    pers: Vec<Spanned<RawNormRef>>,
    #[serde(default)]
    eph: Vec<Spanned<RawNormRef>>,
}

/// A reset entry: a clock name (reset to zero) or `[clock, value]`.
struct RawResetEntry(String, Option<RawValue>);

impl<'de> Deserialize<'de> for RawResetEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawResetEntry;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a clock name or a [clock, value] pair")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<RawResetEntry, E> {
                Ok(RawResetEntry(s.to_owned(), None))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RawResetEntry, A::Error> {
                let clock: String = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let value: RawValue = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(RawResetEntry(clock, Some(value)))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    from: Text,
    party: Text,
    action: Text,
    #[serde(default)]
    attempted: bool,
    guard: Option<Spanned<RawGuard>>,
    #[serde(default)]
    reset: Vec<Spanned<RawResetEntry>>,
    to: Text,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAutomaton {
    version: Spanned<u32>,
    #[serde(default)]
    clocks: Vec<Text>,
    parties: Vec<Text>,
    actions: Vec<Text>,
    #[serde(default)]
    norms: Vec<RawNorm>,
    initial: Option<Text>,
    states: Vec<RawState>,
    #[serde(default)]
    transitions: Vec<Spanned<RawTransition>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    party: Text,
    action: Text,
    #[serde(default)]
    attempted: bool,
    at: Spanned<RawValue>,
}

/// Byte offset to 1-based line and column.
struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn at<T>(&self, span: &Spanned<T>, message: impl fmt::Display) -> Diagnostic {
        self.at_offset(span.start(), message)
    }

    fn at_offset(&self, offset: usize, message: impl fmt::Display) -> Diagnostic {
        let offset = offset.min(self.text.len());
        let before = &self.text.as_bytes()[..offset];
        let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = before
            .iter()
            .rposition(|&b| b == b'\n')
            .map_or(0, |i| i + 1);
        let column = self.text[line_start..offset].chars().count() + 1;
        Diagnostic {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn fail<T, U>(&self, span: &Spanned<T>, message: impl fmt::Display) -> Result<U, FormatError> {
        Err(FormatError {
            diagnostics: vec![self.at(span, message)],
        })
    }
}

fn parse_value(loc: &Locator<'_>, raw: &Spanned<RawValue>) -> Result<Rational, FormatError> {
    parse_rational(&raw.0).or_else(|e| loc.fail(raw, format_args!("`{}`: {e}", raw.0)))
}

fn build_guard(
    loc: &Locator<'_>,
    clocks: &Arc<ClockSet>,
    raw: &Option<Spanned<RawGuard>>,
) -> Result<Guard, FormatError> {
    let Some(raw) = raw else {
        return Ok(Guard::tt(clocks));
    };
    let mut zones = Vec::with_capacity(raw.len());
    for zone in raw.iter() {
        let mut constraints = Vec::with_capacity(zone.len());
        for (term, op, value) in zone {
            let c = Constraint::parse(term, op, &value.0).or_else(|e| loc.fail(term, e))?;
            // the term must name declared clocks
            for name in std::iter::once(&c.left).chain(&c.right) {
                if clocks.index_of(name).is_none() {
                    return loc.fail(term, format_args!("unknown clock `{name}`"));
                }
            }
            constraints.push(c);
        }
        zones.push(constraints);
    }
    Guard::from_constraints(clocks, &zones).or_else(|e| loc.fail(raw, e))
}

fn parse_modality(loc: &Locator<'_>, raw: &Text) -> Result<Modality, FormatError> {
    match raw.as_str() {
        "O" | "obligation" => Ok(Modality::Obligation),
        "P" | "permission" => Ok(Modality::Permission),
        "F" | "prohibition" => Ok(Modality::Prohibition),
        other => loc.fail(
            raw,
            format_args!("unknown modality `{other}`, expected O, P or F"),
        ),
    }
}

struct NormTable {
    by_id: BTreeMap<String, NormId>,
    taken: HashSet<String>,
}

impl NormTable {
    fn add(
        &mut self,
        loc: &Locator<'_>,
        m: &mut Automaton,
        raw: &RawNorm,
    ) -> Result<NormId, FormatError> {
        let modality = parse_modality(loc, &raw.modality)?;
        let guard = build_guard(loc, m.clocks(), &raw.guard)?;
        let id = match &raw.id {
            Some(id) => id.get_ref().clone(),
            None => {
                let prefix = modality.letter().to_ascii_lowercase();
                let candidate = (1..)
                    .map(|k| format!("{prefix}{k}"))
                    .find(|c| !self.taken.contains(c))
                    .unwrap_or_default();
                // an equal norm already in the table keeps its id
                let probe = Norm::new(&candidate, modality, &raw.party, &raw.action, guard.clone());
                match m.norms().iter().find(|n| **n == probe) {
                    Some(existing) => existing.id.clone(),
                    None => candidate,
                }
            }
        };
        let norm = Norm::new(&id, modality, &raw.party, &raw.action, guard);
        let anchor: &Text = raw.id.as_ref().unwrap_or(&raw.modality);
        let index = m.add_norm(norm).or_else(|e| loc.fail(anchor, e))?;
        if m.norm(index).id != id {
            return loc.fail(
                anchor,
                format_args!("norm `{id}` is identical to norm `{}`", m.norm(index).id),
            );
        }
        self.taken.insert(id.clone());
        self.by_id.insert(id, index);
        Ok(index)
    }

    fn resolve(
        &mut self,
        loc: &Locator<'_>,
        m: &mut Automaton,
        entry: &Spanned<RawNormRef>,
    ) -> Result<NormId, FormatError> {
        match entry.get_ref() {
            RawNormRef::Id(id) => match self.by_id.get(id) {
                Some(&n) => Ok(n),
                None => loc.fail(entry, format_args!("unknown norm `{id}`")),
            },
            RawNormRef::Inline(raw) => {
                if let Some(id) = &raw.id {
                    if let Some(&n) = self.by_id.get(id.as_str()) {
                        let modality = parse_modality(loc, &raw.modality)?;
                        let guard = build_guard(loc, m.clocks(), &raw.guard)?;
                        let again = Norm::new(id, modality, &raw.party, &raw.action, guard);
                        if *m.norm(n) != again {
                            return loc.fail(
                                id,
                                format_args!("norm `{}` is defined twice differently", id.as_str()),
                            );
                        }
                        return Ok(n);
                    }
                }
                self.add(loc, m, raw)
            }
        }
    }
}

fn build_reset(
    loc: &Locator<'_>,
    clocks: &ClockSet,
    raw: &[Spanned<RawResetEntry>],
) -> Result<Reset, FormatError> {
    let mut zeroed = Vec::new();
    let mut valued = Vec::new();
    for entry in raw {
        let RawResetEntry(clock, value) = entry.get_ref();
        let Some(index) = clocks.index_of(clock) else {
            return loc.fail(entry, format_args!("unknown clock `{clock}`"));
        };
        match value {
            None => zeroed.push(index),
            Some(v) => {
                let v = parse_rational(&v.0).or_else(|e| loc.fail(entry, e))?;
                if v < Rational::from_integer(0) {
                    return loc.fail(entry, "reset values must be nonnegative");
                }
                valued.push((index, v));
            }
        }
    }
    Ok(Reset::with_values(
        zeroed
            .into_iter()
            .map(|c| (c, Rational::from_integer(0)))
            .chain(valued),
    ))
}

fn build_automaton(
    loc: &Locator<'_>,
    raw: RawAutomaton,
) -> Result<(Automaton, Vec<Spanned<RawTransition>>), FormatError> {
    if *raw.version != FORMAT_VERSION {
        return loc.fail(
            &raw.version,
            format_args!(
                "unsupported version {}, expected {FORMAT_VERSION}",
                *raw.version
            ),
        );
    }
    let clock_names: Vec<String> = raw.clocks.iter().map(|c| c.get_ref().clone()).collect();
    let clocks = ClockSet::new(clock_names).map_err(|e| FormatError {
        diagnostics: vec![loc.at_offset(
            raw.clocks
                .first()
                .map_or(raw.version.start(), |c| c.start()),
            e,
        )],
    })?;
    let names = |list: &[Text]| list.iter().map(|t| t.get_ref().clone()).collect::<Vec<_>>();
    let m = Automaton::new(clocks, names(&raw.parties), names(&raw.actions)).map_err(|e| {
        let anchor = raw
            .parties
            .first()
            .or(raw.actions.first())
            .map_or(raw.version.start(), |t| t.start());
        FormatError {
            diagnostics: vec![loc.at_offset(anchor, e)],
        }
    })?;
    let mut m = m;

    let mut table = NormTable {
        by_id: BTreeMap::new(),
        taken: raw
            .norms
            .iter()
            .chain(raw.states.iter().flat_map(|s| {
                s.pers
                    .iter()
                    .chain(&s.eph)
                    .filter_map(|e| match e.get_ref() {
                        RawNormRef::Inline(n) => Some(&**n),
                        RawNormRef::Id(_) => None,
                    })
            }))
            .filter_map(|n| n.id.as_ref().map(|i| i.get_ref().clone()))
            .collect(),
    };
    for norm in &raw.norms {
        if let Some(id) = &norm.id {
            if table.by_id.contains_key(id.as_str()) {
                return loc.fail(id, format_args!("norm `{}` declared twice", id.as_str()));
            }
        }
        table.add(loc, &mut m, norm)?;
    }

    for state in &raw.states {
        let q = m.add_state(&state.id).or_else(|e| loc.fail(&state.id, e))?;
        let mut pers = NormSet::new();
        for entry in &state.pers {
            pers.insert(table.resolve(loc, &mut m, entry)?);
        }
        let mut eph = NormSet::new();
        for entry in &state.eph {
            eph.insert(table.resolve(loc, &mut m, entry)?);
        }
        m.set_labelling(q, pers, eph)
            .or_else(|e| loc.fail(&state.id, e))?;
    }
    let state_ref = |m: &Automaton, id: &Text| {
        m.state_index(id).map_or_else(
            || loc.fail(id, format_args!("unknown state `{}`", id.as_str())),
            Ok,
        )
    };
    if raw.states.is_empty() {
        return loc.fail(&raw.version, "the automaton has no states");
    }
    // without an explicit initial state the first one is used
    if let Some(initial) = &raw.initial {
        let q = state_ref(&m, initial)?;
        m.set_initial(q).or_else(|e| loc.fail(initial, e))?;
    }

    for t in &raw.transitions {
        let source = state_ref(&m, &t.from)?;
        let target = state_ref(&m, &t.to)?;
        let guard = build_guard(loc, m.clocks(), &t.guard)?;
        let reset = build_reset(loc, m.clocks(), &t.reset)?;
        let label = if t.attempted {
            ActionLabel::attempted(&t.party, &t.action)
        } else {
            ActionLabel::new(&t.party, &t.action)
        };
        m.add_transition(Transition {
            source,
            label,
            guard,
            reset,
            target,
        })
        .or_else(|e| loc.fail(t, e))?;
    }
    Ok((m, raw.transitions))
}

/// Parses an automaton document without checking well-formedness.
pub fn parse_automaton_unchecked(text: &str) -> Result<Automaton, FormatError> {
    let raw: RawAutomaton = json_spanned_value::from_str(text)?;
    build_automaton(&Locator { text }, raw).map(|(m, _)| m)
}

/// Parses an automaton document and rejects it unless it is well-formed.
pub fn parse_automaton(text: &str) -> Result<Automaton, FormatError> {
    let raw: RawAutomaton = json_spanned_value::from_str(text)?;
    let loc = Locator { text };
    let (m, transitions) = build_automaton(&loc, raw)?;
    let report = validate_wellformed(&m);
    if report.is_ok() {
        return Ok(m);
    }
    let messages = report.describe(&m);
    let diagnostics = report
        .violations
        .iter()
        .zip(messages)
        .map(|(v, message)| {
            let at = match v {
                Violation::GlobalClockReset { transition } => *transition,
                Violation::Nondeterministic { second, .. } => *second,
            };
            loc.at(&transitions[at], message)
        })
        .collect();
    Err(FormatError { diagnostics })
}

/// Parses a standalone guard document (a list of zones) over `clocks`.
pub fn parse_guard(clocks: &Arc<ClockSet>, text: &str) -> Result<Guard, FormatError> {
    let raw: Spanned<RawGuard> = json_spanned_value::from_str(text)?;
    build_guard(&Locator { text }, clocks, &Some(raw))
}

/// Parses a trace document: an array of `{party, action, attempted, at}`.
/// Labels outside the automaton's alphabet are allowed.
pub fn parse_trace(text: &str) -> Result<TimedTrace, FormatError> {
    let raw: Vec<RawEvent> = json_spanned_value::from_str(text)?;
    let loc = Locator { text };
    let mut events = Vec::with_capacity(raw.len());
    let mut last: Option<Rational> = None;
    for e in &raw {
        let at = parse_value(&loc, &e.at)?;
        if at < Rational::from_integer(0) {
            return loc.fail(&e.at, "timestamps must be nonnegative");
        }
        if last.is_some_and(|l| at <= l) {
            return loc.fail(&e.at, "timestamps must be strictly increasing");
        }
        last = Some(at);
        for name in [&e.party, &e.action] {
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ':') {
                return loc.fail(name, format_args!("invalid name `{}`", name.as_str()));
            }
        }
        let label = if e.attempted {
            ActionLabel::attempted(&e.party, &e.action)
        } else {
            ActionLabel::new(&e.party, &e.action)
        };
        events.push(TimedEvent::new(label, at));
    }
    TimedTrace::new(events).map_err(|e| FormatError {
        diagnostics: vec![Diagnostic {
            line: 1,
            column: 1,
            message: e.to_string(),
        }],
    })
}

fn out_guard(g: &Guard) -> Vec<Vec<(String, String, String)>> {
    g.constraints()
        .into_iter()
        .map(|zone| {
            zone.into_iter()
                .map(|c| {
                    (
                        c.term(),
                        c.op.symbol().to_owned(),
                        format_rational(&c.value),
                    )
                })
                .collect()
        })
        .collect()
}

/// Guard as written in documents.
pub fn guard_to_json(g: &Guard) -> serde_json::Value {
    json!(out_guard(g))
}

fn out_reset(clocks: &ClockSet, reset: &Reset) -> Vec<serde_json::Value> {
    reset
        .entries()
        .map(|(c, v)| {
            if *v == Rational::from_integer(0) {
                json!(clocks.name(c))
            } else {
                json!([clocks.name(c), format_rational(v)])
            }
        })
        .collect()
}

fn out_norm(n: &Norm) -> serde_json::Value {
    let mut doc = json!({
        "id": n.id,
        "modality": n.modality.letter().to_string(),
        "party": n.party,
        "action": n.action,
    });
    if !n.guard.is_true() {
        doc["guard"] = guard_to_json(&n.guard);
    }
    doc
}

/// Document form of an automaton. Parsing it back yields an equal automaton.
pub fn automaton_to_json(m: &Automaton) -> serde_json::Value {
    let ids = |set: &NormSet| {
        set.iter()
            .map(|&n| m.norm(n).id.clone())
            .collect::<Vec<_>>()
    };
    let states: Vec<_> = m
        .states()
        .iter()
        .map(|s| json!({"id": s.id, "pers": ids(&s.pers), "eph": ids(&s.eph)}))
        .collect();
    let transitions: Vec<_> = m
        .transitions()
        .iter()
        .map(|t| {
            let mut doc = json!({
                "from": m.state(t.source).id,
                "party": t.label.party,
                "action": t.label.action,
            });
            if t.label.attempted {
                doc["attempted"] = json!(true);
            }
            if !t.guard.is_true() {
                doc["guard"] = guard_to_json(&t.guard);
            }
            if !t.reset.is_identity() {
                doc["reset"] = json!(out_reset(m.clocks(), &t.reset));
            }
            doc["to"] = json!(m.state(t.target).id);
            doc
        })
        .collect();
    let mut doc = json!({
        "version": FORMAT_VERSION,
        "clocks": m.clocks().user_clocks(),
        "parties": m.parties(),
        "actions": m.actions(),
        "norms": m.norms().iter().map(out_norm).collect::<Vec<_>>(),
    });
    if !m.states().is_empty() {
        doc["initial"] = json!(m.state(m.initial()).id);
    }
    doc["states"] = json!(states);
    doc["transitions"] = json!(transitions);
    doc
}

pub fn write_automaton(m: &Automaton) -> String {
    let mut text =
        serde_json::to_string_pretty(&automaton_to_json(m)).expect("json values serialize");
    text.push('\n');
    text
}

pub fn write_trace(trace: &TimedTrace) -> String {
    let events: Vec<_> = trace
        .events()
        .iter()
        .map(|e| {
            let mut doc = json!({"party": e.label.party, "action": e.label.action});
            if e.label.attempted {
                doc["attempted"] = json!(true);
            }
            doc["at"] = json!(format_rational(&e.at));
            doc
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&events).expect("json values serialize");
    text.push('\n');
    text
}

/// Valuation as a clock-name to value map.
pub fn valuation_to_json(clocks: &ClockSet, v: &Valuation) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = v
        .values()
        .iter()
        .enumerate()
        .map(|(i, x)| (clocks.name(i).to_owned(), json!(format_rational(x))))
        .collect();
    serde_json::Value::Object(map)
}

/// Machine-readable analysis report.
pub fn report_to_json(m: &Automaton, report: &AnalysisReport) -> serde_json::Value {
    let findings: Vec<_> = report
        .findings()
        .iter()
        .map(|f| {
            let (a, b) = f.pair;
            json!({
                "state": m.state(f.base).id,
                "flat_states": f.flat_states.iter().map(|s| s.id(m)).collect::<Vec<_>>(),
                "norms": [m.norm(a).id, m.norm(b).id],
                "pair": [m.norm(a).to_string(), m.norm(b).to_string()],
                "witness": guard_to_json(&f.witness),
                "witness_text": f.witness.to_string(),
                "sample": valuation_to_json(m.clocks(), &f.sample),
            })
        })
        .collect();
    let s = &report.stats;
    json!({
        "verdict": match report.verdict {
            Verdict::ConflictFree => "ConflictFree",
            Verdict::PotentialConflicts(_) => "PotentialConflicts",
        },
        "findings": findings,
        "stats": {
            "source_states": s.source_states,
            "source_transitions": s.source_transitions,
            "flat_states": s.flat_states,
            "flat_transitions": s.flat_transitions,
            "pruned_states": s.pruned_states,
            "pruned_transitions": s.pruned_transitions,
            "elapsed_ms": s.elapsed.as_secs_f64() * 1000.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
  "version": 1,
  "clocks": ["t"],
  "parties": ["A"],
  "actions": ["go", "stop"],
  "norms": [{"id": "o1", "modality": "O", "party": "A", "action": "stop", "guard": [[["t", "<=", "15"]]]}],
  "initial": "a",
  "states": [
    {"id": "a", "pers": ["o1"]},
    {"id": "b", "eph": [{"modality": "F", "party": "A", "action": "stop"}]}
  ],
  "transitions": [
    {"from": "a", "party": "A", "action": "go", "guard": [[["t", ">", "1/2"]]], "reset": ["t"], "to": "b"},
    {"from": "b", "party": "A", "action": "go", "reset": [["t", "2.5"]], "to": "a"}
  ]
}"#;

    #[test]
    fn parses_small_document() {
        let m = parse_automaton(SMALL).unwrap();
        assert_eq!(m.states().len(), 2);
        assert_eq!(m.norms().len(), 2);
        assert_eq!(m.norm(1).id, "f1");
        assert_eq!(m.transitions()[0].guard.to_string(), "t > 0.5");
        assert_eq!(
            m.transitions()[1].reset.entries().next().unwrap().1,
            &Rational::new(5, 2)
        );
    }

    #[test]
    fn round_trips() {
        let m = parse_automaton(SMALL).unwrap();
        let text = write_automaton(&m);
        let again = parse_automaton(&text).unwrap();
        assert_eq!(m, again);
        assert_eq!(text, write_automaton(&again));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_automaton("{\n  \"version\": 1,\n  oops\n}").unwrap_err();
        assert_eq!(err.diagnostics[0].line, 3);
    }

    #[test]
    fn semantic_errors_point_at_the_culprit() {
        let bad = SMALL.replace(r#""to": "b""#, r#""to": "nowhere""#);
        let err = parse_automaton(&bad).unwrap_err();
        assert_eq!(err.diagnostics[0].line, 13);
        assert!(err.diagnostics[0].message.contains("nowhere"));

        let bad = SMALL.replace(r#"["t", ">", "1/2"]"#, r#"["u", ">", "1/2"]"#);
        let err = parse_automaton(&bad).unwrap_err();
        assert!(err.diagnostics[0].message.contains("unknown clock `u`"));

        let bad = SMALL.replace(r#""modality": "F""#, r#""modality": "X""#);
        assert_eq!(parse_automaton(&bad).unwrap_err().diagnostics[0].line, 10);
    }

    #[test]
    fn global_clock_reset_is_rejected_at_the_transition() {
        let bad = SMALL.replace(r#""reset": ["t"]"#, r#""reset": ["gamma"]"#);
        let err = parse_automaton(&bad).unwrap_err();
        assert_eq!(err.diagnostics[0].line, 13);
        assert!(parse_automaton_unchecked(&bad).is_ok());
    }

    #[test]
    fn traces_parse_and_round_trip() {
        let trace = parse_trace(
            r#"[{"party": "A", "action": "go", "at": 1},
            {"party": "B", "action": "go", "attempted": true, "at": "2.5"}]"#,
        )
        .unwrap();
        assert_eq!(trace.len(), 2);
        assert!(trace.events()[1].label.attempted);
        assert_eq!(parse_trace(&write_trace(&trace)).unwrap(), trace);
        let err = parse_trace(
            r#"[{"party": "A", "action": "go", "at": 3},
            {"party": "A", "action": "go", "at": 3}]"#,
        )
        .unwrap_err();
        assert_eq!(err.diagnostics[0].line, 2);
        assert!(parse_trace(r#"[{"party": "A", "action": "go", "at": 1.5}]"#).is_err());
    }

    #[test]
    fn standalone_guards() {
        let clocks = Arc::new(ClockSet::new(["x", "y"]).unwrap());
        let g = parse_guard(&clocks, r#"[[["x-y", "<", "1"], ["x", ">=", 2]], []]"#).unwrap();
        assert_eq!(g.zones().len(), 1);
        assert!(parse_guard(&clocks, "[]").unwrap().is_false());
        assert!(parse_guard(&clocks, "[[]]").unwrap().is_true());
    }
}
