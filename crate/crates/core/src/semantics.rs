//! Operational semantics over configurations: the deontic step, the
//! temporal step, their composition, and the runtime conflict check.

use std::fmt;

use thiserror::Error;

use crate::model::{active, vio, ActionLabel, Automaton, Modality, NormId, NormSet, StateId};
use crate::rational::{self, Rational};
use crate::zone::{Valuation, ZoneError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("event at {at} precedes the current time {now}")]
    EventInPast { at: String, now: String },
    #[error("event {index} has timestamp {at}, which is not after the previous one")]
    NotIncreasing { index: usize, at: String },
    #[error("event {index} has a negative timestamp {at}")]
    NegativeTimestamp { index: usize, at: String },
    #[error("more than one transition from `{state}` fires on {label}")]
    Ambiguous { state: String, label: String },
    #[error(transparent)]
    Zone(#[from] ZoneError),
}

/// Runtime snapshot `(q, v, P, E)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub valuation: Valuation,
    pub persistent: NormSet,
    pub ephemeral: NormSet,
}

impl Configuration {
    /// `(q0, λc·0, pers(q0), eph(q0))`.
    pub fn initial(m: &Automaton) -> Configuration {
        let q0 = m.state(m.initial());
        Configuration {
            state: m.initial(),
            valuation: Valuation::zero(m.clocks().len()),
            persistent: q0.pers.clone(),
            ephemeral: q0.eph.clone(),
        }
    }

    /// `P ∪ E`.
    pub fn active_norms(&self) -> NormSet {
        self.persistent.union(&self.ephemeral).copied().collect()
    }

    pub fn describe(&self, m: &Automaton) -> String {
        format!(
            "{} {} P={} E={}",
            m.state(self.state).id,
            self.valuation.display(m.clocks()),
            m.norm_set_ids(&self.persistent),
            m.norm_set_ids(&self.ephemeral)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimedEvent {
    pub label: ActionLabel,
    /// Absolute time on the global clock.
    pub at: Rational,
}

impl TimedEvent {
    pub fn new(label: ActionLabel, at: Rational) -> TimedEvent {
        TimedEvent { label, at }
    }
}

impl fmt::Display for TimedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.label, rational::Display(&self.at))
    }
}

/// Finite event sequence with strictly increasing, nonnegative timestamps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimedTrace {
    events: Vec<TimedEvent>,
}

impl TimedTrace {
    pub fn new(events: Vec<TimedEvent>) -> Result<TimedTrace, SemanticsError> {
        for (index, e) in events.iter().enumerate() {
            if !rational::is_nonnegative(&e.at) {
                return Err(SemanticsError::NegativeTimestamp {
                    index,
                    at: rational::format_rational(&e.at),
                });
            }
            if index > 0 && events[index - 1].at >= e.at {
                return Err(SemanticsError::NotIncreasing {
                    index,
                    at: rational::format_rational(&e.at),
                });
            }
        }
        Ok(TimedTrace { events })
    }

    pub fn events(&self) -> &[TimedEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Result of the deontic half of a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeonticOutcome {
    Next(Configuration),
    /// Every active norm violated by the event.
    Violated(Vec<NormId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Next {
        configuration: Configuration,
        conflict: Option<(NormId, NormId)>,
    },
    Violated {
        norms: Vec<NormId>,
        event: TimedEvent,
    },
}

impl StepOutcome {
    pub fn configuration(&self) -> Option<&Configuration> {
        match self {
            StepOutcome::Next { configuration, .. } => Some(configuration),
            StepOutcome::Violated { .. } => None,
        }
    }

    pub fn conflict(&self) -> Option<(NormId, NormId)> {
        match self {
            StepOutcome::Next { conflict, .. } => *conflict,
            StepOutcome::Violated { .. } => None,
        }
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, StepOutcome::Violated { .. })
    }
}

fn delay(c: &Configuration, e: &TimedEvent) -> Result<Valuation, SemanticsError> {
    let now = c.valuation.global_time();
    if e.at < now {
        return Err(SemanticsError::EventInPast {
            at: rational::format_rational(&e.at),
            now: rational::format_rational(&now),
        });
    }
    Ok(c.valuation.shift(&(e.at - now))?)
}

/// Norm step: `⊥` if some active norm is violated at the shifted valuation,
/// otherwise both norm sets are filtered through `active`. The valuation
/// itself is left unshifted.
pub fn deontic_step(
    m: &Automaton,
    c: &Configuration,
    e: &TimedEvent,
) -> Result<DeonticOutcome, SemanticsError> {
    let shifted = delay(c, e)?;
    let violated: Vec<NormId> = c
        .active_norms()
        .into_iter()
        .filter(|&n| vio(m.norm(n), &e.label, &shifted))
        .collect();
    if !violated.is_empty() {
        return Ok(DeonticOutcome::Violated(violated));
    }
    Ok(DeonticOutcome::Next(Configuration {
        state: c.state,
        valuation: c.valuation.clone(),
        persistent: active(m.norms(), &c.persistent, &e.label, &shifted),
        ephemeral: active(m.norms(), &c.ephemeral, &e.label, &shifted),
    }))
}

/// Timed step: take the enabled transition on the event's label, or stay.
pub fn temporal_step(
    m: &Automaton,
    c: &Configuration,
    e: &TimedEvent,
) -> Result<Configuration, SemanticsError> {
    let shifted = delay(c, e)?;
    let mut firing = m
        .outgoing(c.state)
        .filter(|t| t.label == e.label && t.guard.contains(&shifted));
    let Some(taken) = firing.next() else {
        return Ok(Configuration {
            state: c.state,
            valuation: shifted,
            persistent: c.persistent.clone(),
            ephemeral: c.ephemeral.clone(),
        });
    };
    if firing.any(|t| t.target != taken.target || t.reset != taken.reset) {
        return Err(SemanticsError::Ambiguous {
            state: m.state(c.state).id.clone(),
            label: e.label.to_string(),
        });
    }
    let target = m.state(taken.target);
    Ok(Configuration {
        state: taken.target,
        valuation: shifted.override_with(&taken.reset)?,
        persistent: c.persistent.union(&target.pers).copied().collect(),
        ephemeral: target.eph.clone(),
    })
}

/// Deontic step, then temporal step, then the conflict check on the
/// resulting configuration.
pub fn step(
    m: &Automaton,
    c: &Configuration,
    e: &TimedEvent,
) -> Result<StepOutcome, SemanticsError> {
    let after_norms = match deontic_step(m, c, e)? {
        DeonticOutcome::Violated(norms) => {
            return Ok(StepOutcome::Violated {
                norms,
                event: e.clone(),
            })
        }
        DeonticOutcome::Next(next) => next,
    };
    let configuration = temporal_step(m, &after_norms, e)?;
    let conflict = conflict_at(m, &configuration.active_norms(), &configuration.valuation);
    Ok(StepOutcome::Next {
        configuration,
        conflict,
    })
}

/// First (by norm index) obligation/prohibition or permission/prohibition
/// pair over the same `p:a` whose guards both hold at `v`.
pub fn conflict_at(m: &Automaton, set: &NormSet, v: &Valuation) -> Option<(NormId, NormId)> {
    let live: Vec<NormId> = set
        .iter()
        .copied()
        .filter(|&n| m.norm(n).guard.contains(v))
        .collect();
    for &a in &live {
        let na = m.norm(a);
        if na.modality == Modality::Prohibition {
            continue;
        }
        for &b in &live {
            let nb = m.norm(b);
            if nb.modality == Modality::Prohibition && na.same_subject(nb) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Outcome of running a trace from the initial configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub initial: Configuration,
    pub initial_conflict: Option<(NormId, NormId)>,
    /// One outcome per consumed event; stops at the first violation.
    pub steps: Vec<StepOutcome>,
}

impl RunReport {
    /// Index of the violating event and the violated norms.
    pub fn violation(&self) -> Option<(usize, &[NormId])> {
        self.steps.iter().enumerate().find_map(|(i, s)| match s {
            StepOutcome::Violated { norms, .. } => Some((i, norms.as_slice())),
            StepOutcome::Next { .. } => None,
        })
    }

    /// Conflicting configurations: position 0 is the initial configuration,
    /// position `k` the configuration after the `k`-th event.
    pub fn conflicts(&self) -> Vec<(usize, (NormId, NormId))> {
        let mut out: Vec<_> = self.initial_conflict.map(|p| (0, p)).into_iter().collect();
        out.extend(
            self.steps
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.conflict().map(|p| (i + 1, p))),
        );
        out
    }

    pub fn has_conflict(&self) -> bool {
        self.initial_conflict.is_some() || self.steps.iter().any(|s| s.conflict().is_some())
    }

    /// The last reached configuration (before any violation).
    pub fn last_configuration(&self) -> &Configuration {
        self.steps
            .iter()
            .rev()
            .find_map(StepOutcome::configuration)
            .unwrap_or(&self.initial)
    }
}

/// Runs `trace` from `conf₀`, halting at the first violation.
pub fn run_trace(m: &Automaton, trace: &TimedTrace) -> Result<RunReport, SemanticsError> {
    let initial = Configuration::initial(m);
    let initial_conflict = conflict_at(m, &initial.active_norms(), &initial.valuation);
    let mut steps = Vec::with_capacity(trace.len());
    let mut current = initial.clone();
    for e in trace.events() {
        let outcome = step(m, &current, e)?;
        match &outcome {
            StepOutcome::Next { configuration, .. } => current = configuration.clone(),
            StepOutcome::Violated { .. } => {
                steps.push(outcome);
                break;
            }
        }
        steps.push(outcome);
    }
    Ok(RunReport {
        initial,
        initial_conflict,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Norm, Transition};
    use crate::rational::int;
    use crate::zone::{ClockSet, Comparator, Constraint, Guard, Reset};

    struct Fixture {
        m: Automaton,
        q2: StateId,
        q3: StateId,
        obligation: NormId,
        forbid_release: NormId,
    }

    fn fixture() -> Fixture {
        let clocks = ClockSet::new(["t"]).unwrap();
        let mut m = Automaton::new(
            clocks,
            ["A", "B", "C"],
            ["get", "release", "request", "start", "other"],
        )
        .unwrap();
        let q2 = m.add_state("q2").unwrap();
        let q3 = m.add_state("q3").unwrap();
        let q4 = m.add_state("q4").unwrap();
        let upto15 = Guard::conjunction(
            m.clocks(),
            &[Constraint::clock("t", Comparator::Le, int(15))],
        )
        .unwrap();
        let obligation = m
            .add_persistent(q3, Norm::obligation("o", "A", "release", upto15))
            .unwrap();
        let forbid_release = m
            .add_ephemeral(q4, Norm::prohibition("f", "A", "release", m.tt()))
            .unwrap();
        let tt = m.tt();
        for (source, party, action, reset, target) in [
            (q2, "B", "request", Reset::to_zero([1]), q3),
            (q3, "A", "start", Reset::identity(), q4),
            (q3, "A", "release", Reset::identity(), q2),
        ] {
            m.add_transition(Transition {
                source,
                label: ActionLabel::new(party, action),
                guard: tt.clone(),
                reset,
                target,
            })
            .unwrap();
        }
        Fixture {
            m,
            q2,
            q3,
            obligation,
            forbid_release,
        }
    }

    fn at_q3(f: &Fixture, time: i64) -> Configuration {
        Configuration {
            state: f.q3,
            valuation: Valuation::new(vec![int(time), int(0)]).unwrap(),
            persistent: NormSet::from([f.obligation]),
            ephemeral: NormSet::new(),
        }
    }

    fn ev(party: &str, action: &str, at: i64) -> TimedEvent {
        TimedEvent::new(ActionLabel::new(party, action), int(at))
    }

    #[test]
    fn late_event_violates_obligation() {
        let f = fixture();
        let out = deontic_step(&f.m, &at_q3(&f, 0), &ev("A", "start", 16)).unwrap();
        assert_eq!(out, DeonticOutcome::Violated(vec![f.obligation]));
    }

    #[test]
    fn timely_release_discharges_without_shifting() {
        let f = fixture();
        let c = at_q3(&f, 0);
        let DeonticOutcome::Next(next) = deontic_step(&f.m, &c, &ev("A", "release", 9)).unwrap()
        else {
            panic!("unexpected violation");
        };
        assert!(next.persistent.is_empty());
        assert_eq!(next.valuation, c.valuation);
    }

    #[test]
    fn no_norms_no_change() {
        let f = fixture();
        let c = Configuration::initial(&f.m);
        assert_eq!(
            deontic_step(&f.m, &c, &ev("A", "get", 3)).unwrap(),
            DeonticOutcome::Next(c.clone())
        );
    }

    #[test]
    fn request_resets_clock_and_adds_obligation() {
        let f = fixture();
        let c = Configuration::initial(&f.m);
        assert_eq!(c.state, f.q2);
        let next = temporal_step(&f.m, &c, &ev("B", "request", 4)).unwrap();
        assert_eq!(next.state, f.q3);
        assert_eq!(
            next.valuation,
            Valuation::new(vec![int(4), int(0)]).unwrap()
        );
        assert_eq!(next.persistent, NormSet::from([f.obligation]));
    }

    #[test]
    fn unmatched_and_attempted_events_stay() {
        let f = fixture();
        let c = at_q3(&f, 2);
        let stay = temporal_step(&f.m, &c, &ev("C", "other", 5)).unwrap();
        assert_eq!(stay.state, f.q3);
        assert_eq!(
            stay.valuation,
            Valuation::new(vec![int(5), int(3)]).unwrap()
        );
        let attempt = TimedEvent::new(ActionLabel::attempted("A", "release"), int(5));
        assert_eq!(temporal_step(&f.m, &c, &attempt).unwrap().state, f.q3);
    }

    #[test]
    fn event_in_the_past_is_rejected() {
        let f = fixture();
        assert!(matches!(
            step(&f.m, &at_q3(&f, 10), &ev("A", "start", 9)),
            Err(SemanticsError::EventInPast { .. })
        ));
        // zero delay is fine
        assert!(step(&f.m, &at_q3(&f, 10), &ev("A", "start", 10)).is_ok());
    }

    #[test]
    fn conflict_needs_both_windows_open() {
        let f = fixture();
        let both = NormSet::from([f.obligation, f.forbid_release]);
        let v = |t| Valuation::new(vec![int(t), int(t)]).unwrap();
        assert_eq!(
            conflict_at(&f.m, &both, &v(3)),
            Some((f.obligation, f.forbid_release))
        );
        assert_eq!(conflict_at(&f.m, &both, &v(20)), None);
        assert_eq!(
            conflict_at(&f.m, &NormSet::from([f.obligation]), &v(3)),
            None
        );
    }

    #[test]
    fn start_in_q3_flags_conflict() {
        let f = fixture();
        let c = at_q3(&f, 0);
        let out = step(&f.m, &c, &ev("A", "start", 3)).unwrap();
        assert_eq!(out.conflict(), Some((f.obligation, f.forbid_release)));
    }

    #[test]
    fn trace_must_increase() {
        assert!(TimedTrace::new(vec![ev("A", "get", 1), ev("A", "get", 1)]).is_err());
        assert!(TimedTrace::new(vec![ev("A", "get", 0), ev("A", "get", 1)]).is_ok());
    }

    #[test]
    fn run_halts_on_violation() {
        let f = fixture();
        let trace = TimedTrace::new(vec![
            ev("B", "request", 2),
            ev("A", "start", 3),
            ev("A", "release", 4),
            ev("A", "get", 5),
        ])
        .unwrap();
        let report = run_trace(&f.m, &trace).unwrap();
        assert_eq!(report.steps.len(), 3);
        assert_eq!(report.violation(), Some((2, &[f.forbid_release][..])));
        assert_eq!(
            report.conflicts(),
            vec![(2, (f.obligation, f.forbid_release))]
        );
    }
}
