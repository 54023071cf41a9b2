//! Timed contract automata: syntax, well-formedness and the per-norm
//! violation/satisfaction table.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::zone::{ClockSet, Guard, Reset, Valuation, ZoneError, GLOBAL_CLOCK};

/// Index of a norm in an automaton's norm table.
pub type NormId = usize;

/// Index of a state in an automaton.
pub type StateId = usize;

/// Norm sets are extensional; members are norm-table indices.
pub type NormSet = BTreeSet<NormId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("unknown party `{0}`")]
    UnknownParty(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{0}` declared twice")]
    Duplicate(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("norm id `{0}` is used for two different norms")]
    ConflictingNormId(String),
    #[error("unknown norm #{0}")]
    UnknownNorm(NormId),
    #[error("automaton has no states")]
    NoStates,
    #[error(transparent)]
    Zone(#[from] ZoneError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Obligation,
    Permission,
    Prohibition,
}

impl Modality {
    pub fn letter(self) -> char {
        match self {
            Modality::Obligation => 'O',
            Modality::Permission => 'P',
            Modality::Prohibition => 'F',
        }
    }
}

/// `party:action`, possibly the attempted variant `party:ā`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel {
    pub party: String,
    pub action: String,
    pub attempted: bool,
}

impl ActionLabel {
    pub fn new(party: &str, action: &str) -> ActionLabel {
        ActionLabel {
            party: party.to_owned(),
            action: action.to_owned(),
            attempted: false,
        }
    }

    pub fn attempted(party: &str, action: &str) -> ActionLabel {
        ActionLabel {
            attempted: true,
            ..ActionLabel::new(party, action)
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.attempted {
            write!(f, "{}:~{}", self.party, self.action)
        } else {
            write!(f, "{}:{}", self.party, self.action)
        }
    }
}

/// A deontic atom `O_τ(p:a)`, `P_τ(p:a)` or `F_τ(p:a)`.
///
/// Equality is structural (modality, party, action, guard); the id only
/// names the norm in reports.
#[derive(Debug, Clone)]
pub struct Norm {
    pub id: String,
    pub modality: Modality,
    pub party: String,
    pub action: String,
    pub guard: Guard,
    // valuations from which the window can still be met
    open: Guard,
}

impl Norm {
    pub fn new(id: &str, modality: Modality, party: &str, action: &str, guard: Guard) -> Norm {
        let open = guard.time_predecessor();
        Norm {
            id: id.to_owned(),
            modality,
            party: party.to_owned(),
            action: action.to_owned(),
            guard,
            open,
        }
    }

    pub fn obligation(id: &str, party: &str, action: &str, guard: Guard) -> Norm {
        Norm::new(id, Modality::Obligation, party, action, guard)
    }

    pub fn permission(id: &str, party: &str, action: &str, guard: Guard) -> Norm {
        Norm::new(id, Modality::Permission, party, action, guard)
    }

    pub fn prohibition(id: &str, party: &str, action: &str, guard: Guard) -> Norm {
        Norm::new(id, Modality::Prohibition, party, action, guard)
    }

    /// The norm's window has permanently closed at `v`.
    pub fn exceeded_at(&self, v: &Valuation) -> bool {
        !self.open.contains(v)
    }

    /// Time predecessor of the guard.
    pub fn open_window(&self) -> &Guard {
        &self.open
    }

    /// Performed (non-attempted) `p:a` matching this norm.
    pub fn performed_by(&self, label: &ActionLabel) -> bool {
        !label.attempted && self.is_over(&label.party, &label.action)
    }

    /// Attempted `p:ā` matching this norm.
    pub fn attempted_by(&self, label: &ActionLabel) -> bool {
        label.attempted && self.is_over(&label.party, &label.action)
    }

    pub fn is_over(&self, party: &str, action: &str) -> bool {
        self.party == party && self.action == action
    }

    pub fn same_subject(&self, other: &Norm) -> bool {
        self.party == other.party && self.action == other.action
    }
}

impl PartialEq for Norm {
    fn eq(&self, other: &Self) -> bool {
        self.modality == other.modality
            && self.party == other.party
            && self.action == other.action
            && self.guard == other.guard
    }
}

impl Eq for Norm {}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.modality.letter())?;
        if !self.guard.is_true() {
            write!(f, "[{}]", self.guard)?;
        }
        write!(f, "({}:{})", self.party, self.action)
    }
}

/// `vio(n)(label, v)`.
pub fn vio(n: &Norm, label: &ActionLabel, v: &Valuation) -> bool {
    match n.modality {
        Modality::Permission => n.attempted_by(label) && n.guard.contains(v),
        Modality::Prohibition => n.performed_by(label) && n.guard.contains(v),
        Modality::Obligation => n.exceeded_at(v),
    }
}

/// `sat(n)(label, v)`.
pub fn sat(n: &Norm, label: &ActionLabel, v: &Valuation) -> bool {
    match n.modality {
        Modality::Obligation => n.performed_by(label) && n.guard.contains(v),
        Modality::Permission | Modality::Prohibition => n.exceeded_at(v),
    }
}

/// The members of `set` not satisfied by `label` at `v`.
pub fn active(norms: &[Norm], set: &NormSet, label: &ActionLabel, v: &Valuation) -> NormSet {
    set.iter()
        .copied()
        .filter(|&n| !sat(&norms[n], label, v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: String,
    pub pers: NormSet,
    pub eph: NormSet,
}

impl State {
    /// `pers(q) ∪ eph(q)`.
    pub fn labelling(&self) -> NormSet {
        self.pers.union(&self.eph).copied().collect()
    }
}

/// `source --label | guard ↦ reset--> target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub label: ActionLabel,
    pub guard: Guard,
    pub reset: Reset,
    pub target: StateId,
}

fn check_state_id(name: &str) -> Result<(), ModelError> {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || c == '"')
    {
        Err(ModelError::InvalidIdentifier(name.to_owned()))
    } else {
        Ok(())
    }
}

fn check_identifier(name: &str) -> Result<(), ModelError> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''));
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidIdentifier(name.to_owned()))
    }
}

/// `⟨Q, q0, →, pers, eph⟩` over declared clocks, parties and actions.
#[derive(Debug, Clone)]
pub struct Automaton {
    clocks: Arc<ClockSet>,
    parties: Vec<String>,
    actions: Vec<String>,
    norms: Vec<Norm>,
    states: Vec<State>,
    initial: StateId,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl Automaton {
    pub fn new<P, A>(clocks: ClockSet, parties: P, actions: A) -> Result<Automaton, ModelError>
    where
        P: IntoIterator,
        P::Item: Into<String>,
        A: IntoIterator,
        A::Item: Into<String>,
    {
        let collect = |items: Vec<String>| -> Result<Vec<String>, ModelError> {
            let mut seen = BTreeSet::new();
            for item in &items {
                check_identifier(item)?;
                if !seen.insert(item.clone()) {
                    return Err(ModelError::Duplicate(item.clone()));
                }
            }
            Ok(items)
        };
        Ok(Automaton {
            clocks: Arc::new(clocks),
            parties: collect(parties.into_iter().map(Into::into).collect())?,
            actions: collect(actions.into_iter().map(Into::into).collect())?,
            norms: Vec::new(),
            states: Vec::new(),
            initial: 0,
            transitions: Vec::new(),
            outgoing: Vec::new(),
        })
    }

    /// Same clocks, alphabet and norm table; no states or transitions.
    pub(crate) fn empty_like(&self) -> Automaton {
        Automaton {
            clocks: self.clocks.clone(),
            parties: self.parties.clone(),
            actions: self.actions.clone(),
            norms: self.norms.clone(),
            states: Vec::new(),
            initial: 0,
            transitions: Vec::new(),
            outgoing: Vec::new(),
        }
    }

    pub fn clocks(&self) -> &Arc<ClockSet> {
        &self.clocks
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn norms(&self) -> &[Norm] {
        &self.norms
    }

    pub fn norm(&self, id: NormId) -> &Norm {
        &self.norms[id]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions leaving `state`, in declaration order.
    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = &Transition> + '_ {
        self.outgoing[state].iter().map(|&t| &self.transitions[t])
    }

    pub fn state_index(&self, id: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.id == id)
    }

    pub fn tt(&self) -> Guard {
        Guard::tt(&self.clocks)
    }

    /// Every non-attempted label `p:a` of the declared alphabet.
    pub fn alphabet(&self) -> Vec<ActionLabel> {
        self.parties
            .iter()
            .flat_map(|p| self.actions.iter().map(move |a| ActionLabel::new(p, a)))
            .collect()
    }

    /// The alphabet together with every attempted variant.
    pub fn alphabet_with_attempts(&self) -> Vec<ActionLabel> {
        let mut labels = Vec::new();
        for label in self.alphabet() {
            labels.push(ActionLabel {
                attempted: true,
                ..label.clone()
            });
            labels.push(label);
        }
        labels
    }

    pub fn add_state(&mut self, id: &str) -> Result<StateId, ModelError> {
        check_state_id(id)?;
        if self.state_index(id).is_some() {
            return Err(ModelError::DuplicateState(id.to_owned()));
        }
        self.states.push(State {
            id: id.to_owned(),
            pers: NormSet::new(),
            eph: NormSet::new(),
        });
        self.outgoing.push(Vec::new());
        Ok(self.states.len() - 1)
    }

    pub fn set_initial(&mut self, state: StateId) -> Result<(), ModelError> {
        if state >= self.states.len() {
            return Err(ModelError::UnknownState(format!("#{state}")));
        }
        self.initial = state;
        Ok(())
    }

    fn check_subject(&self, party: &str, action: &str) -> Result<(), ModelError> {
        if !self.parties.iter().any(|p| p == party) {
            return Err(ModelError::UnknownParty(party.to_owned()));
        }
        if !self.actions.iter().any(|a| a == action) {
            return Err(ModelError::UnknownAction(action.to_owned()));
        }
        Ok(())
    }

    /// Interns a norm; structurally equal norms share one entry.
    pub fn add_norm(&mut self, norm: Norm) -> Result<NormId, ModelError> {
        self.check_subject(&norm.party, &norm.action)?;
        if norm.guard.clocks() != &self.clocks {
            return Err(ZoneError::ClockMismatch.into());
        }
        check_identifier(&norm.id)?;
        if let Some(existing) = self.norms.iter().position(|n| *n == norm) {
            return Ok(existing);
        }
        if self.norms.iter().any(|n| n.id == norm.id) {
            return Err(ModelError::ConflictingNormId(norm.id));
        }
        self.norms.push(norm);
        Ok(self.norms.len() - 1)
    }

    pub fn add_persistent(&mut self, state: StateId, norm: Norm) -> Result<NormId, ModelError> {
        let id = self.add_norm(norm)?;
        self.state_mut(state)?.pers.insert(id);
        Ok(id)
    }

    pub fn add_ephemeral(&mut self, state: StateId, norm: Norm) -> Result<NormId, ModelError> {
        let id = self.add_norm(norm)?;
        self.state_mut(state)?.eph.insert(id);
        Ok(id)
    }

    /// Assigns norm sets to a state directly, by norm index.
    pub fn set_labelling(
        &mut self,
        state: StateId,
        pers: NormSet,
        eph: NormSet,
    ) -> Result<(), ModelError> {
        if let Some(&bad) = pers.iter().chain(&eph).find(|&&n| n >= self.norms.len()) {
            return Err(ModelError::UnknownNorm(bad));
        }
        let s = self.state_mut(state)?;
        s.pers = pers;
        s.eph = eph;
        Ok(())
    }

    fn state_mut(&mut self, state: StateId) -> Result<&mut State, ModelError> {
        self.states
            .get_mut(state)
            .ok_or_else(|| ModelError::UnknownState(format!("#{state}")))
    }

    pub fn add_transition(&mut self, transition: Transition) -> Result<usize, ModelError> {
        for s in [transition.source, transition.target] {
            if s >= self.states.len() {
                return Err(ModelError::UnknownState(format!("#{s}")));
            }
        }
        self.check_subject(&transition.label.party, &transition.label.action)?;
        if transition.guard.clocks() != &self.clocks {
            return Err(ZoneError::ClockMismatch.into());
        }
        if let Some(c) = transition.reset.clocks().find(|&c| c >= self.clocks.len()) {
            return Err(ZoneError::UnknownClock(format!("#{c}")).into());
        }
        self.outgoing[transition.source].push(self.transitions.len());
        self.transitions.push(transition);
        Ok(self.transitions.len() - 1)
    }

    /// Union of `pers(q)` over all states.
    pub fn all_persistent(&self) -> NormSet {
        self.states
            .iter()
            .flat_map(|s| s.pers.iter().copied())
            .collect()
    }

    /// Renders a norm set as `{id, id}`.
    pub fn norm_set_ids(&self, set: &NormSet) -> String {
        let ids: Vec<&str> = set.iter().map(|&n| self.norms[n].id.as_str()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

impl PartialEq for Automaton {
    fn eq(&self, other: &Self) -> bool {
        self.clocks == other.clocks
            && self.parties == other.parties
            && self.actions == other.actions
            && self.norms.len() == other.norms.len()
            && self
                .norms
                .iter()
                .zip(&other.norms)
                .all(|(a, b)| a == b && a.id == b.id)
            && self.states == other.states
            && self.initial == other.initial
            && self.transitions == other.transitions
    }
}

/// A breach of well-formedness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Transition resets the global clock.
    GlobalClockReset { transition: usize },
    /// Two transitions from one state on one label may both fire at some
    /// valuation and disagree on target or reset.
    Nondeterministic { first: usize, second: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WellFormedReport {
    pub violations: Vec<Violation>,
}

impl WellFormedReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, m: &Automaton) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| match *v {
                Violation::GlobalClockReset { transition } => {
                    let t = &m.transitions[transition];
                    format!(
                        "transition #{transition} ({} -{}-> {}) resets the global clock `{GLOBAL_CLOCK}`",
                        m.states[t.source].id, t.label, m.states[t.target].id
                    )
                }
                Violation::Nondeterministic { first, second } => {
                    let (a, b) = (&m.transitions[first], &m.transitions[second]);
                    format!(
                        "transitions #{first} and #{second} from `{}` on {} overlap on `{}` and lead to different outcomes",
                        m.states[a.source].id,
                        a.label,
                        a.guard.and(&b.guard).map(|g| g.to_string()).unwrap_or_default()
                    )
                }
            })
            .collect()
    }
}

/// Checks that the global clock is never reset and that same-label
/// transitions from a state are either guard-disjoint or identical in
/// target and reset.
pub fn validate_wellformed(m: &Automaton) -> WellFormedReport {
    let mut report = WellFormedReport::default();
    for (i, t) in m.transitions.iter().enumerate() {
        if t.reset.touches_global() {
            report
                .violations
                .push(Violation::GlobalClockReset { transition: i });
        }
    }
    report.violations.extend(nondeterministic_pairs(m));
    report
}

pub(crate) fn nondeterministic_pairs(m: &Automaton) -> Vec<Violation> {
    let mut found = Vec::new();
    for outgoing in &m.outgoing {
        for (k, &i) in outgoing.iter().enumerate() {
            for &j in &outgoing[k + 1..] {
                let (a, b) = (&m.transitions[i], &m.transitions[j]);
                if a.label != b.label || (a.target == b.target && a.reset == b.reset) {
                    continue;
                }
                let overlap = a.guard.zones().iter().any(|za| {
                    b.guard
                        .zones()
                        .iter()
                        .any(|zb| !za.intersect(zb).is_empty())
                });
                if overlap {
                    found.push(Violation::Nondeterministic {
                        first: i,
                        second: j,
                    });
                }
            }
        }
    }
    found
}

/// States reachable from the initial state along transitions, ignoring
/// guards.
pub fn reachable_states(m: &Automaton) -> BTreeSet<StateId> {
    let mut seen = BTreeSet::new();
    if m.states.is_empty() {
        return seen;
    }
    let mut queue = VecDeque::from([m.initial]);
    seen.insert(m.initial);
    while let Some(q) = queue.pop_front() {
        for t in m.outgoing(q) {
            if seen.insert(t.target) {
                queue.push_back(t.target);
            }
        }
    }
    seen
}
