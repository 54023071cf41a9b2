//! Persistent-to-ephemeral flattening.
//!
//! The flattened automaton tracks the still-active ephemeral and persistent
//! norms in its states, `(q, E, P)`, and labels each of them with `E ∪ P` as
//! ephemeral norms. Every original transition is split by which norms a
//! firing discharges, and every state gets explicit self-loops for the
//! events that take no original transition, so norm bookkeeping never
//! depends on the stay rule.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{
    nondeterministic_pairs, validate_wellformed, ActionLabel, Automaton, Modality, ModelError,
    Norm, NormId, NormSet, StateId, Transition,
};
use crate::zone::{Guard, Reset, ZoneError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("automaton is not well-formed: {}", .0.join("; "))]
    IllFormed(Vec<String>),
    #[error("obligation `{norm}` cannot be discharged by {label}")]
    ForeignObligation { norm: String, label: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Zone(#[from] ZoneError),
}

/// State `(q, E, P)` of the flattened automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlatState {
    pub base: StateId,
    pub eph: NormSet,
    pub pers: NormSet,
}

impl FlatState {
    /// `eph⁺((q, E, P)) = E ∪ P`.
    pub fn labelling(&self) -> NormSet {
        self.eph.union(&self.pers).copied().collect()
    }

    /// Synthesized state id, e.g. `q3|E={}|P={o1}`.
    pub fn id(&self, m: &Automaton) -> String {
        format!(
            "{}|E={}|P={}",
            m.state(self.base).id,
            m.norm_set_ids(&self.eph),
            m.norm_set_ids(&self.pers)
        )
    }
}

/// A flattened automaton: no persistent norms, every state paired with the
/// [`FlatState`] it stands for. Norm indices agree with the source automaton.
#[derive(Debug, Clone)]
pub struct FlattenedAutomaton {
    pub automaton: Automaton,
    pub flat_states: Vec<FlatState>,
}

impl FlattenedAutomaton {
    pub fn flat_state(&self, state: StateId) -> &FlatState {
        &self.flat_states[state]
    }

    pub fn state_of(&self, flat: &FlatState) -> Option<StateId> {
        self.flat_states.iter().position(|f| f == flat)
    }

    /// Number of flat states built on `base`.
    pub fn variants_of(&self, base: StateId) -> usize {
        self.flat_states.iter().filter(|f| f.base == base).count()
    }

    pub fn state_count(&self) -> usize {
        self.flat_states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.automaton.transitions().len()
    }
}

/// Timing condition under which a norm is discharged: the guard itself for
/// obligations, and "the window has closed for good" for permissions and
/// prohibitions.
pub fn tc(n: &Norm) -> Guard {
    match n.modality {
        Modality::Obligation => n.guard.clone(),
        Modality::Permission | Modality::Prohibition => n.open_window().not(),
    }
}

/// Every subset of `set` that an event on `label` could leave active: all
/// subsets that keep the obligations the label cannot discharge. Subsets
/// come out in a fixed order (by bitmask over the optional norms, sorted by
/// index).
pub fn active_alpha(norms: &[Norm], set: &NormSet, label: &ActionLabel) -> Vec<NormSet> {
    let (mandatory, optional): (Vec<NormId>, Vec<NormId>) = set.iter().copied().partition(|&n| {
        let norm = &norms[n];
        norm.modality == Modality::Obligation && !norm.performed_by(label)
    });
    let mut family = Vec::with_capacity(1 << optional.len());
    for mask in 0u64..(1u64 << optional.len()) {
        let mut subset: NormSet = mandatory.iter().copied().collect();
        subset.extend(
            optional
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &n)| n),
        );
        family.push(subset);
    }
    family
}

/// Precomputed `tc(n)` and `¬tc(n)` for a norm table.
struct TimingTable {
    tc: Vec<Guard>,
    not_tc: Vec<Guard>,
}

impl TimingTable {
    fn new(norms: &[Norm]) -> TimingTable {
        let tc: Vec<Guard> = norms.iter().map(tc).collect();
        let not_tc = tc.iter().map(Guard::not).collect();
        TimingTable { tc, not_tc }
    }

    fn condition(
        &self,
        norms: &[Norm],
        label: &ActionLabel,
        discharged: &NormSet,
        kept: &NormSet,
        base: Guard,
    ) -> Result<Guard, FlattenError> {
        let mut guard = base;
        for &n in discharged {
            let norm = &norms[n];
            if norm.modality == Modality::Obligation && !norm.performed_by(label) {
                return Err(FlattenError::ForeignObligation {
                    norm: norm.id.clone(),
                    label: label.to_string(),
                });
            }
            guard = guard.and(&self.tc[n])?;
        }
        for &n in kept {
            let norm = &norms[n];
            if norm.modality != Modality::Obligation || norm.performed_by(label) {
                guard = guard.and(&self.not_tc[n])?;
            }
            if guard.is_false() {
                break;
            }
        }
        Ok(guard)
    }
}

/// `T(label, discharged, kept)`: every norm in `discharged` is satisfied by
/// the event and every norm in `kept` that the event could satisfy is not.
pub fn timing_condition(
    m: &Automaton,
    label: &ActionLabel,
    discharged: &NormSet,
    kept: &NormSet,
) -> Result<Guard, FlattenError> {
    TimingTable::new(m.norms()).condition(m.norms(), label, discharged, kept, m.tt())
}

/// One original transition, with same-outcome duplicates merged.
struct Edge {
    label: ActionLabel,
    guard: Guard,
    reset: Reset,
    target: StateId,
}

fn merged_edges(m: &Automaton, state: StateId) -> Result<Vec<Edge>, ZoneError> {
    let mut edges: Vec<Edge> = Vec::new();
    for t in m.outgoing(state) {
        match edges
            .iter_mut()
            .find(|e| e.label == t.label && e.target == t.target && e.reset == t.reset)
        {
            Some(e) => e.guard = e.guard.or(&t.guard)?,
            None => edges.push(Edge {
                label: t.label.clone(),
                guard: t.guard.clone(),
                reset: t.reset.clone(),
                target: t.target,
            }),
        }
    }
    Ok(edges)
}

struct Builder<'a> {
    source: &'a Automaton,
    out: Automaton,
    index: HashMap<FlatState, StateId>,
    flat_states: Vec<FlatState>,
    queue: VecDeque<StateId>,
}

impl Builder<'_> {
    fn intern(&mut self, flat: FlatState) -> Result<StateId, FlattenError> {
        if let Some(&id) = self.index.get(&flat) {
            return Ok(id);
        }
        let id = self.out.add_state(&flat.id(self.source))?;
        self.out
            .set_labelling(id, NormSet::new(), flat.labelling())?;
        self.index.insert(flat.clone(), id);
        self.flat_states.push(flat);
        self.queue.push_back(id);
        Ok(id)
    }
}

/// Builds the flattened automaton, expanding only flat states reached from
/// `(q0, eph(q0), pers(q0))`. Transitions with unsatisfiable guards are kept;
/// see [`prune_unsat`].
pub fn flatten(m: &Automaton) -> Result<FlattenedAutomaton, FlattenError> {
    let report = validate_wellformed(m);
    if !report.is_ok() {
        return Err(FlattenError::IllFormed(report.describe(m)));
    }
    if m.states().is_empty() {
        return Err(ModelError::NoStates.into());
    }
    let norms = m.norms();
    let timing = TimingTable::new(norms);
    let edges = (0..m.states().len())
        .map(|q| merged_edges(m, q))
        .collect::<Result<Vec<_>, _>>()?;
    let labels = m.alphabet_with_attempts();
    // τ' per (state, label): no original transition fires
    let mut idle: HashMap<(StateId, usize), Guard> = HashMap::new();

    let mut b = Builder {
        source: m,
        out: m.empty_like(),
        index: HashMap::new(),
        flat_states: Vec::new(),
        queue: VecDeque::new(),
    };
    let q0 = m.state(m.initial());
    b.intern(FlatState {
        base: m.initial(),
        eph: q0.eph.clone(),
        pers: q0.pers.clone(),
    })?;

    while let Some(id) = b.queue.pop_front() {
        let FlatState { base, eph, pers } = b.flat_states[id].clone();

        for edge in &edges[base] {
            let target = m.state(edge.target);
            for kept in active_alpha(norms, &pers, &edge.label) {
                let discharged: NormSet = pers.difference(&kept).copied().collect();
                let guard =
                    timing.condition(norms, &edge.label, &discharged, &kept, edge.guard.clone())?;
                let to = b.intern(FlatState {
                    base: edge.target,
                    eph: target.eph.clone(),
                    pers: kept.union(&target.pers).copied().collect(),
                })?;
                b.out.add_transition(Transition {
                    source: id,
                    label: edge.label.clone(),
                    guard,
                    reset: edge.reset.clone(),
                    target: to,
                })?;
            }
        }

        for (li, label) in labels.iter().enumerate() {
            let stay = match idle.get(&(base, li)) {
                Some(g) => g.clone(),
                None => {
                    let mut fired = Guard::ff(m.clocks());
                    for e in edges[base].iter().filter(|e| &e.label == label) {
                        fired = fired.or(&e.guard)?;
                    }
                    let g = fired.not();
                    idle.insert((base, li), g.clone());
                    g
                }
            };
            for eph_kept in active_alpha(norms, &eph, label) {
                let eph_gone: NormSet = eph.difference(&eph_kept).copied().collect();
                let with_eph =
                    timing.condition(norms, label, &eph_gone, &eph_kept, stay.clone())?;
                for pers_kept in active_alpha(norms, &pers, label) {
                    let pers_gone: NormSet = pers.difference(&pers_kept).copied().collect();
                    let guard =
                        timing.condition(norms, label, &pers_gone, &pers_kept, with_eph.clone())?;
                    let to = b.intern(FlatState {
                        base,
                        eph: eph_kept.clone(),
                        pers: pers_kept,
                    })?;
                    b.out.add_transition(Transition {
                        source: id,
                        label: label.clone(),
                        guard,
                        reset: Reset::identity(),
                        target: to,
                    })?;
                }
            }
        }
    }

    Ok(FlattenedAutomaton {
        automaton: b.out,
        flat_states: b.flat_states,
    })
}

/// Guard under which an event on `label` violates none of `active`.
fn no_violation(
    norms: &[Norm],
    negated: &[Guard],
    active: &NormSet,
    label: &ActionLabel,
    tt: Guard,
) -> Result<Guard, ZoneError> {
    let mut guard = tt;
    for &n in active {
        let norm = &norms[n];
        guard = match norm.modality {
            Modality::Obligation => guard.and(norm.open_window())?,
            Modality::Prohibition if norm.performed_by(label) => guard.and(&negated[n])?,
            Modality::Permission if norm.attempted_by(label) => guard.and(&negated[n])?,
            _ => guard,
        };
        if guard.is_false() {
            break;
        }
    }
    Ok(guard)
}

/// Removes transitions that can never fire in a non-violating run, then
/// the states no longer reachable.
///
/// Each guard is first restricted to the instants at which the event does
/// not violate a norm active in the source state; an event violating one
/// ends the run before the transition is taken, so this changes no
/// behaviour. Transitions whose restricted guard is empty are dropped.
pub fn prune_unsat(mf: &FlattenedAutomaton) -> Result<FlattenedAutomaton, FlattenError> {
    let m = &mf.automaton;
    let norms = m.norms();
    let negated: Vec<Guard> = norms.iter().map(|n| n.guard.not()).collect();
    let mut safe: HashMap<(StateId, ActionLabel), Guard> = HashMap::new();
    let mut kept: Vec<Transition> = Vec::new();
    for t in m.transitions() {
        let key = (t.source, t.label.clone());
        let allowed = match safe.get(&key) {
            Some(g) => g.clone(),
            None => {
                let g = no_violation(norms, &negated, &m.state(t.source).eph, &t.label, m.tt())?;
                safe.insert(key, g.clone());
                g
            }
        };
        let guard = t.guard.and(&allowed)?;
        if !guard.is_false() {
            kept.push(Transition { guard, ..t.clone() });
        }
    }

    let mut reachable = vec![false; m.states().len()];
    let mut queue = VecDeque::from([m.initial()]);
    reachable[m.initial()] = true;
    let mut order = vec![m.initial()];
    while let Some(q) = queue.pop_front() {
        for t in kept.iter().filter(|t| t.source == q) {
            if !reachable[t.target] {
                reachable[t.target] = true;
                order.push(t.target);
                queue.push_back(t.target);
            }
        }
    }
    order.sort_unstable();

    let mut out = m.empty_like();
    let mut remap = vec![usize::MAX; m.states().len()];
    let mut flat_states = Vec::with_capacity(order.len());
    for &q in &order {
        let s = m.state(q);
        let id = out.add_state(&s.id)?;
        out.set_labelling(id, s.pers.clone(), s.eph.clone())?;
        remap[q] = id;
        flat_states.push(mf.flat_states[q].clone());
    }
    out.set_initial(remap[m.initial()])?;
    for t in kept.into_iter().filter(|t| reachable[t.source]) {
        out.add_transition(Transition {
            source: remap[t.source],
            target: remap[t.target],
            ..t
        })?;
    }
    Ok(FlattenedAutomaton {
        automaton: out,
        flat_states,
    })
}

/// Pairwise guard-disjointness per state and label, up to transitions with
/// identical target and reset.
pub fn check_determinism(m: &Automaton) -> bool {
    nondeterministic_pairs(m).is_empty()
}
