//! Seeded random instances and executable checks of the flattening and
//! analysis guarantees.
//!
//! Every check is a pure function of a seed, so a failure is reproduced by
//! rerunning its suite with `count = 1` from the reported seed.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{analyze, AnalysisOptions};
use crate::flatten::{
    active_alpha, check_determinism, flatten, prune_unsat, tc, timing_condition, FlatState,
    FlattenedAutomaton,
};
use crate::model::{active, sat, ActionLabel, Automaton, Modality, Norm, NormSet, Transition};
use crate::rational::{self, frac, int, Rational};
use crate::semantics::{
    run_trace, step, temporal_step, Configuration, StepOutcome, TimedEvent, TimedTrace,
};
use crate::zone::{
    exceeds, ClockSet, Comparator, Constraint, Guard, Reset, Valuation, GLOBAL_CLOCK,
};

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub max_states: usize,
    /// User clocks, besides the global one.
    pub max_clocks: usize,
    /// Norms in the whole automaton.
    pub max_norms: usize,
    pub max_norms_per_state: usize,
    /// Largest integer constant in guards.
    pub max_constant: i64,
    /// Actions per party; there are two parties.
    pub alphabet_size: usize,
    pub trace_length: usize,
    pub max_timestamp: i64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            max_states: 5,
            max_clocks: 2,
            max_norms: 4,
            max_norms_per_state: 3,
            max_constant: 10,
            alphabet_size: 2,
            trace_length: 8,
            max_timestamp: 40,
        }
    }
}

impl GenParams {
    pub fn with_seed(self, seed: u64) -> GenParams {
        GenParams { seed, ..self }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const PARTIES: [&str; 2] = ["A", "B"];

fn random_comparator<R: Rng>(rng: &mut R) -> Comparator {
    match rng.gen_range(0..10) {
        0 => Comparator::Eq,
        1 | 2 => Comparator::Lt,
        3..=5 => Comparator::Le,
        6 | 7 => Comparator::Ge,
        _ => Comparator::Gt,
    }
}

/// A random constraint over `clocks` (the global clock included).
fn random_constraint<R: Rng>(rng: &mut R, clocks: &ClockSet, max_constant: i64) -> Constraint {
    let names = clocks.names();
    let pick = |rng: &mut R| -> &str {
        if names.len() > 1 && rng.gen_bool(0.8) {
            &names[rng.gen_range(1..names.len())]
        } else {
            GLOBAL_CLOCK
        }
    };
    let op = random_comparator(rng);
    if names.len() > 1 && rng.gen_bool(0.2) {
        let left = pick(rng);
        let right = loop {
            let r = &names[rng.gen_range(0..names.len())];
            if r != left {
                break r;
            }
        };
        let value = int(rng.gen_range(-max_constant..=max_constant));
        Constraint::difference(left, right, op, value)
    } else {
        Constraint::clock(pick(rng), op, int(rng.gen_range(0..=max_constant)))
    }
}

/// A random guard in raw form: a union of conjunctions.
pub fn random_guard_constraints<R: Rng>(
    rng: &mut R,
    clocks: &ClockSet,
    max_constant: i64,
) -> Vec<Vec<Constraint>> {
    if rng.gen_bool(0.15) {
        return vec![Vec::new()];
    }
    let zones = if rng.gen_bool(0.8) { 1 } else { 2 };
    (0..zones)
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| random_constraint(rng, clocks, max_constant))
                .collect()
        })
        .collect()
}

fn random_guard<R: Rng>(rng: &mut R, clocks: &Arc<ClockSet>, max_constant: i64) -> Guard {
    let raw = random_guard_constraints(rng, clocks, max_constant);
    Guard::from_constraints(clocks, &raw).expect("generated constraints name declared clocks")
}

fn random_modality<R: Rng>(rng: &mut R) -> Modality {
    *[
        Modality::Obligation,
        Modality::Permission,
        Modality::Prohibition,
    ]
    .choose(rng)
    .expect("nonempty")
}

fn random_norm<R: Rng>(rng: &mut R, m: &Automaton, p: &GenParams, index: usize) -> Norm {
    let modality = random_modality(rng);
    let party = m.parties().choose(rng).expect("nonempty").clone();
    let action = m.actions().choose(rng).expect("nonempty").clone();
    let guard = random_guard(rng, m.clocks(), p.max_constant);
    let id = format!("{}{index}", modality.letter().to_ascii_lowercase());
    Norm::new(&id, modality, &party, &action, guard)
}

fn empty_automaton<R: Rng>(rng: &mut R, p: &GenParams) -> Automaton {
    let clocks: Vec<String> = (1..=rng.gen_range(1..=p.max_clocks.max(1)))
        .map(|i| format!("c{i}"))
        .collect();
    let actions: Vec<String> = (1..=p.alphabet_size.max(1))
        .map(|i| format!("a{i}"))
        .collect();
    Automaton::new(
        ClockSet::new(clocks).expect("valid clock names"),
        PARTIES,
        actions,
    )
    .expect("valid alphabet")
}

/// Disjoint guards splitting the values of one clock at one or two cuts,
/// each optionally narrowed by a constraint on another clock.
fn partition<R: Rng>(rng: &mut R, m: &Automaton, max_constant: i64) -> Vec<Guard> {
    let clocks = m.clocks();
    let names = clocks.names();
    let x = &names[rng.gen_range(0..names.len())];
    let mut cuts = vec![rng.gen_range(0..=max_constant)];
    if rng.gen_bool(0.5) {
        let c = rng.gen_range(0..=max_constant);
        if c != cuts[0] {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut pieces: Vec<Vec<Constraint>> = Vec::new();
    let mut lower: Option<Constraint> = None;
    for &c in &cuts {
        let closed_below = rng.gen_bool(0.5);
        let (upper, next) = if closed_below {
            (Comparator::Le, Comparator::Gt)
        } else {
            (Comparator::Lt, Comparator::Ge)
        };
        let mut piece: Vec<Constraint> = lower.take().into_iter().collect();
        piece.push(Constraint::clock(x, upper, int(c)));
        pieces.push(piece);
        lower = Some(Constraint::clock(x, next, int(c)));
    }
    pieces.push(lower.into_iter().collect());
    pieces
        .into_iter()
        .map(|mut piece| {
            if rng.gen_bool(0.25) {
                piece.push(random_constraint(rng, clocks, max_constant));
            }
            Guard::conjunction(clocks, &piece).expect("declared clocks")
        })
        .collect()
}

/// A random well-formed automaton, reproducible from `p.seed`.
pub fn gen_automaton(p: &GenParams) -> Automaton {
    let mut rng = rng_for(p.seed, 1);
    let mut m = empty_automaton(&mut rng, p);
    let states = rng.gen_range(1..=p.max_states.max(1));
    for q in 0..states {
        m.add_state(&format!("q{q}")).expect("fresh state id");
    }

    let norms = rng.gen_range(0..=p.max_norms);
    let mut per_state = vec![0usize; states];
    for i in 0..norms {
        let q = rng.gen_range(0..states);
        if per_state[q] >= p.max_norms_per_state {
            continue;
        }
        let norm = random_norm(&mut rng, &m, p, i);
        if m.norms().contains(&norm) {
            continue;
        }
        per_state[q] += 1;
        if rng.gen_bool(0.5) {
            m.add_persistent(q, norm).expect("declared subject");
        } else {
            m.add_ephemeral(q, norm).expect("declared subject");
        }
    }

    let labels = m.alphabet();
    for q in 0..states {
        let mut used = labels.clone();
        used.shuffle(&mut rng);
        used.truncate(rng.gen_range(1..=3.min(labels.len())));
        for label in used {
            let guards = if rng.gen_bool(0.35) {
                vec![if rng.gen_bool(0.5) {
                    m.tt()
                } else {
                    random_guard(&mut rng, m.clocks(), p.max_constant)
                }]
            } else {
                partition(&mut rng, &m, p.max_constant)
            };
            // the generator favours moving on, so later states get visited
            let mut pieces_kept = 0;
            let count = guards.len();
            for (i, guard) in guards.into_iter().enumerate() {
                if pieces_kept > 0 && rng.gen_bool(0.3) && i + 1 < count {
                    continue;
                }
                pieces_kept += 1;
                let target = if rng.gen_bool(0.6) {
                    (q + 1) % states
                } else {
                    rng.gen_range(0..states)
                };
                let reset = Reset::to_zero((1..m.clocks().len()).filter(|_| rng.gen_bool(0.3)));
                m.add_transition(Transition {
                    source: q,
                    label: label.clone(),
                    guard,
                    reset,
                    target,
                })
                .expect("declared states and labels");
            }
        }
    }
    m
}

/// A random timed trace for `m`, reproducible from `p.seed`. Events mostly
/// follow transitions enabled at the chosen instant; some are arbitrary
/// alphabet labels and some are attempts.
pub fn gen_trace(m: &Automaton, p: &GenParams) -> TimedTrace {
    let mut rng = rng_for(p.seed, 2);
    let alphabet = m.alphabet();
    let length = rng.gen_range(0..=p.trace_length);
    let mut config = Configuration::initial(m);
    let mut now = Rational::from_integer(0);
    let mut events = Vec::with_capacity(length);
    for i in 0..length {
        let half_steps = if rng.gen_bool(0.1) {
            rng.gen_range(1..=2 * (p.max_constant + 1))
        } else {
            rng.gen_range(1..=p.max_constant.max(1))
        };
        let delta = if i == 0 && rng.gen_bool(0.2) {
            int(0)
        } else {
            frac(half_steps, 2)
        };
        if now + delta > int(p.max_timestamp) && i > 0 {
            break;
        }
        now += delta;
        let shifted = config
            .valuation
            .shift(&(now - config.valuation.global_time()))
            .expect("time moves forward");
        let enabled: Vec<&ActionLabel> = m
            .outgoing(config.state)
            .filter(|t| t.guard.contains(&shifted))
            .map(|t| &t.label)
            .collect();
        let roll: f64 = rng.gen();
        let label = if roll < 0.15 {
            let l = alphabet.choose(&mut rng).expect("nonempty alphabet");
            ActionLabel::attempted(&l.party, &l.action)
        } else if roll < 0.4 || enabled.is_empty() {
            alphabet
                .choose(&mut rng)
                .expect("nonempty alphabet")
                .clone()
        } else {
            (*enabled.choose(&mut rng).expect("nonempty")).clone()
        };
        let event = TimedEvent::new(label, now);
        if let Ok(next) = temporal_step(m, &config, &event) {
            config = next;
        }
        events.push(event);
    }
    TimedTrace::new(events).expect("timestamps strictly increase")
}

/// Seed of the `index`-th trace generated for the automaton of `seed`.
pub fn trace_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_add(1))
}

/// Runs `m` and `mf` in lockstep over `ts` and describes the first step at
/// which they stop corresponding.
pub fn lockstep_mismatch(
    m: &Automaton,
    mf: &FlattenedAutomaton,
    ts: &TimedTrace,
) -> Option<String> {
    let m_plus = &mf.automaton;
    let mut c = Configuration::initial(m);
    let mut cf = Configuration::initial(m_plus);
    let correspond = |c: &Configuration, cf: &Configuration| -> Option<String> {
        let expected = FlatState {
            base: c.state,
            eph: c.ephemeral.clone(),
            pers: c.persistent.clone(),
        };
        if mf.flat_state(cf.state) != &expected {
            return Some(format!(
                "flat state {} does not match {}",
                mf.flat_state(cf.state).id(m),
                expected.id(m)
            ));
        }
        if c.valuation != cf.valuation {
            return Some("valuations differ".into());
        }
        if !cf.persistent.is_empty() {
            return Some("flattened run has persistent norms".into());
        }
        if cf.ephemeral != c.active_norms() {
            return Some("active norm sets differ".into());
        }
        None
    };
    if let Some(why) = correspond(&c, &cf) {
        return Some(format!("initially: {why}"));
    }
    for (i, e) in ts.events().iter().enumerate() {
        let (a, b) = match (step(m, &c, e), step(m_plus, &cf, e)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(err), _) | (_, Err(err)) => return Some(format!("event {}: {err}", i + 1)),
        };
        match (a, b) {
            (StepOutcome::Violated { .. }, StepOutcome::Violated { .. }) => return None,
            (
                StepOutcome::Next {
                    configuration: next,
                    conflict: ka,
                },
                StepOutcome::Next {
                    configuration: next_f,
                    conflict: kb,
                },
            ) => {
                if let Some(why) = correspond(&next, &next_f) {
                    return Some(format!("after event {}: {why}", i + 1));
                }
                if ka != kb {
                    return Some(format!("after event {}: conflict flags differ", i + 1));
                }
                c = next;
                cf = next_f;
            }
            (a, _) => {
                let which = if a.is_violation() {
                    "source"
                } else {
                    "flattened"
                };
                return Some(format!(
                    "after event {}: only the {which} run is violated",
                    i + 1
                ));
            }
        }
    }
    None
}

/// Configuration correspondence between `m` and its flattening, pruned and
/// unpruned, along `ts`.
pub fn check_correspondence(m: &Automaton, ts: &TimedTrace) -> bool {
    let Ok(full) = flatten(m) else {
        return false;
    };
    let Ok(pruned) = prune_unsat(&full) else {
        return false;
    };
    lockstep_mismatch(m, &full, ts).is_none() && lockstep_mismatch(m, &pruned, ts).is_none()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Soundness {
    /// Analysis reported potential conflicts; nothing to check.
    Vacuous,
    /// Analysis reported no conflicts and no sampled run found one.
    Held,
    /// A sampled run reached a conflict despite a conflict-free verdict.
    Refuted { trace: TimedTrace },
}

/// Probes a conflict-free verdict with `traces` random runs.
pub fn probe_soundness(m: &Automaton, traces: usize, p: &GenParams) -> Soundness {
    match analyze(m, AnalysisOptions::default()) {
        Ok(report) if report.is_conflict_free() => {}
        _ => return Soundness::Vacuous,
    }
    for j in 0..traces as u64 {
        let ts = gen_trace(m, &p.with_seed(trace_seed(p.seed, j)));
        if run_trace(m, &ts).map_or(true, |r| r.has_conflict()) {
            return Soundness::Refuted { trace: ts };
        }
    }
    Soundness::Held
}

pub fn check_soundness(m: &Automaton, traces: usize, p: &GenParams) -> bool {
    !matches!(probe_soundness(m, traces, p), Soundness::Refuted { .. })
}

/// Admissible delays of one conjunction at `v`, as an interval of `δ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct DelayInterval {
    lo: Rational,
    lo_strict: bool,
    hi: Option<(Rational, bool)>,
}

impl DelayInterval {
    fn any() -> DelayInterval {
        DelayInterval {
            lo: int(0),
            lo_strict: false,
            hi: None,
        }
    }

    fn raise(&mut self, lo: Rational, strict: bool) {
        if lo > self.lo || (lo == self.lo && strict) {
            self.lo = lo;
            self.lo_strict = strict;
        }
    }

    fn cap(&mut self, hi: Rational, strict: bool) {
        match self.hi {
            Some((h, s)) if h < hi || (h == hi && (s || !strict)) => {}
            _ => self.hi = Some((hi, strict)),
        }
    }

    fn witness(&self) -> Option<Rational> {
        match self.hi {
            None if self.lo_strict => Some(self.lo + int(1)),
            None => Some(self.lo),
            Some((hi, hi_strict)) => {
                if hi < self.lo || (hi == self.lo && (hi_strict || self.lo_strict)) {
                    None
                } else if self.lo_strict || hi_strict {
                    Some(rational::midpoint(&self.lo, &hi))
                } else {
                    Some(self.lo)
                }
            }
        }
    }
}

/// A delay `δ ≥ 0` with `v + δ` satisfying the raw guard `zones`, solved
/// constraint by constraint; `None` if there is none.
pub fn delta_interval_oracle_raw(
    clocks: &ClockSet,
    zones: &[Vec<Constraint>],
    v: &Valuation,
) -> Option<Rational> {
    zones.iter().find_map(|zone| {
        let mut interval = DelayInterval::any();
        for c in zone {
            let value_of = |name: &str| clocks.index_of(name).map(|i| v.get(i));
            let x = value_of(&c.left)?;
            match &c.right {
                // the difference does not move with time
                Some(r) => {
                    let y = value_of(r)?;
                    if !c.op.holds(&(x - y), &c.value) {
                        return None;
                    }
                }
                None => {
                    let d = c.value - x;
                    match c.op {
                        Comparator::Lt => interval.cap(d, true),
                        Comparator::Le => interval.cap(d, false),
                        Comparator::Eq => {
                            interval.raise(d, false);
                            interval.cap(d, false);
                        }
                        Comparator::Ge => interval.raise(d, false),
                        Comparator::Gt => interval.raise(d, true),
                    }
                }
            }
        }
        interval.witness()
    })
}

/// [`delta_interval_oracle_raw`] on the constraints of a guard.
pub fn delta_interval_oracle(g: &Guard, v: &Valuation) -> Option<Rational> {
    delta_interval_oracle_raw(g.clocks(), &g.constraints(), v)
}

fn holds_raw(clocks: &ClockSet, zones: &[Vec<Constraint>], v: &Valuation) -> bool {
    zones.iter().any(|zone| {
        zone.iter()
            .all(|c| c.holds(clocks, v).expect("declared clocks"))
    })
}

/// All valuations whose coordinates lie on `{0, 1/den, …, max}`.
fn grid(dims: usize, den: i64, max: i64) -> Vec<Valuation> {
    let steps = max * den;
    let mut points = vec![Vec::with_capacity(dims)];
    for _ in 0..dims {
        points = points
            .into_iter()
            .flat_map(|p: Vec<Rational>| {
                (0..=steps).map(move |k| {
                    let mut q = p.clone();
                    q.push(frac(k, den));
                    q
                })
            })
            .collect();
    }
    points
        .into_iter()
        .map(|p| Valuation::new(p).expect("nonnegative"))
        .collect()
}

fn random_valuation<R: Rng>(rng: &mut R, dims: usize, max_constant: i64) -> Valuation {
    Valuation::new(
        (0..dims)
            .map(|_| frac(rng.gen_range(0..=2 * (max_constant + 1)), 2))
            .collect(),
    )
    .expect("nonnegative")
}

/// A single state labelled with random norms, for the single-state checks.
fn norm_pool(p: &GenParams) -> (Automaton, NormSet, ChaCha8Rng) {
    let mut rng = rng_for(p.seed, 3);
    let mut m = empty_automaton(&mut rng, p);
    let q = m.add_state("q").expect("fresh");
    let k = rng.gen_range(0..=p.max_norms.max(1));
    let mut set = NormSet::new();
    for i in 0..k {
        let norm = random_norm(&mut rng, &m, p, i);
        if let Ok(n) = m.add_ephemeral(q, norm) {
            set.insert(n);
        }
    }
    (m, set, rng)
}

fn random_label<R: Rng>(rng: &mut R, m: &Automaton) -> ActionLabel {
    m.alphabet_with_attempts()
        .choose(rng)
        .expect("nonempty")
        .clone()
}

/// `active(N, (p:a, v)) ∈ active_α(N, p:a)`.
pub fn check_active_membership(p: &GenParams) -> Result<(), String> {
    let (m, set, mut rng) = norm_pool(p);
    for _ in 0..8 {
        let label = random_label(&mut rng, &m);
        let v = random_valuation(&mut rng, m.clocks().len(), p.max_constant);
        let concrete = active(m.norms(), &set, &label, &v);
        if !active_alpha(m.norms(), &set, &label).contains(&concrete) {
            return Err(format!(
                "active set {} after {label} at {} is not in the family",
                m.norm_set_ids(&concrete),
                v.display(m.clocks())
            ));
        }
    }
    Ok(())
}

/// Timing conditions of distinct members of `active_α` are disjoint.
pub fn check_subset_exclusivity(p: &GenParams) -> Result<(), String> {
    let (m, set, mut rng) = norm_pool(p);
    let label = random_label(&mut rng, &m);
    let family = active_alpha(m.norms(), &set, &label);
    let guards = family
        .iter()
        .map(|kept| {
            let gone: NormSet = set.difference(kept).copied().collect();
            timing_condition(&m, &label, &gone, kept).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (i, a) in guards.iter().enumerate() {
        for (j, b) in guards.iter().enumerate().skip(i + 1) {
            let both = a.and(b).map_err(|e| e.to_string())?;
            if !both.is_false() {
                return Err(format!(
                    "T for {} and {} overlap on {both}",
                    m.norm_set_ids(&family[i]),
                    m.norm_set_ids(&family[j])
                ));
            }
        }
    }
    Ok(())
}

/// `sat(n, (p:a, v))` implies `tc(n)(v)`.
pub fn check_sat_implies_timing(p: &GenParams) -> Result<(), String> {
    let (m, _, mut rng) = norm_pool(p);
    for n in m.norms() {
        let condition = tc(n);
        for _ in 0..8 {
            let v = random_valuation(&mut rng, m.clocks().len(), p.max_constant);
            // also try labels the norm is about
            let label = if rng.gen_bool(0.5) {
                ActionLabel::new(&n.party, &n.action)
            } else {
                random_label(&mut rng, &m)
            };
            if sat(n, &label, &v) && !condition.contains(&v) {
                return Err(format!(
                    "{n} is satisfied by {label} at {} outside tc",
                    v.display(m.clocks())
                ));
            }
        }
    }
    Ok(())
}

/// Every flattening is deterministic, before and after pruning.
pub fn check_flatten_determinism(p: &GenParams) -> Result<(), String> {
    let m = gen_automaton(p);
    let full = flatten(&m).map_err(|e| e.to_string())?;
    if !check_determinism(&full.automaton) {
        return Err("flattening is nondeterministic".into());
    }
    let pruned = prune_unsat(&full).map_err(|e| e.to_string())?;
    if !check_determinism(&pruned.automaton) {
        return Err("pruned flattening is nondeterministic".into());
    }
    Ok(())
}

pub fn check_correspondence_instance(p: &GenParams, traces: usize) -> Result<(), String> {
    let m = gen_automaton(p);
    let full = flatten(&m).map_err(|e| e.to_string())?;
    let pruned = prune_unsat(&full).map_err(|e| e.to_string())?;
    for j in 0..traces as u64 {
        let ts = gen_trace(&m, &p.with_seed(trace_seed(p.seed, j)));
        for (which, mf) in [("unpruned", &full), ("pruned", &pruned)] {
            if let Some(why) = lockstep_mismatch(&m, mf, &ts) {
                return Err(format!("trace {j} ({which}): {why}"));
            }
        }
    }
    Ok(())
}

/// Zone operations against direct constraint evaluation and the delay
/// oracle, on one pair of random guards.
pub fn check_zones(p: &GenParams) -> Result<(), String> {
    let mut rng = rng_for(p.seed, 4);
    let clocks = Arc::new(ClockSet::new(["t"]).expect("valid"));
    let raw_g = random_guard_constraints(&mut rng, &clocks, p.max_constant);
    let raw_h = random_guard_constraints(&mut rng, &clocks, p.max_constant);
    let g = Guard::from_constraints(&clocks, &raw_g).map_err(|e| e.to_string())?;
    let h = Guard::from_constraints(&clocks, &raw_h).map_err(|e| e.to_string())?;
    let and = g.and(&h).map_err(|e| e.to_string())?;
    let or = g.or(&h).map_err(|e| e.to_string())?;
    let not = g.not();
    let down = g.time_predecessor();
    let dims = clocks.len();
    let fail = |what: &str, v: &Valuation| {
        Err(format!(
            "{what} disagrees at {} for g = {g}, h = {h}",
            v.display(&clocks)
        ))
    };

    for v in grid(dims, 2, p.max_constant + 1) {
        let in_g = holds_raw(&clocks, &raw_g, &v);
        let in_h = holds_raw(&clocks, &raw_h, &v);
        if g.contains(&v) != in_g {
            return fail("contains", &v);
        }
        if and.contains(&v) != (in_g && in_h) {
            return fail("and", &v);
        }
        if or.contains(&v) != (in_g || in_h) {
            return fail("or", &v);
        }
        if not.contains(&v) != !in_g {
            return fail("not", &v);
        }
        let delay = delta_interval_oracle_raw(&clocks, &raw_g, &v);
        if let Some(d) = delay {
            let later = v.shift(&d).map_err(|e| e.to_string())?;
            if !holds_raw(&clocks, &raw_g, &later) {
                return fail("delay oracle witness", &v);
            }
        }
        if down.contains(&v) != delay.is_some() {
            return fail("time predecessor", &v);
        }
        if exceeds(&v, &g) != delay.is_none() {
            return fail("exceeds", &v);
        }
    }

    // a nonempty zone over n clocks with integer constants has a point on
    // the 1/(n+1) grid within n times the largest constant
    let fine = grid(dims, dims as i64 + 1, dims as i64 * (p.max_constant + 1));
    for (what, guard, raw) in [
        ("g", &g, vec![&raw_g]),
        ("g and h", &and, vec![&raw_g, &raw_h]),
    ] {
        let inhabited = fine
            .iter()
            .any(|v| raw.iter().all(|r| holds_raw(&clocks, r, v)));
        if guard.is_false() == inhabited {
            return Err(format!(
                "emptiness of {what} disagrees for g = {g}, h = {h}"
            ));
        }
        if let Some(s) = guard.sample() {
            if !raw.iter().all(|r| holds_raw(&clocks, r, &s)) {
                return Err(format!("sample of {what} lies outside it"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    ActiveMembership,
    SubsetExclusivity,
    SatImpliesTiming,
    Determinism,
    Correspondence,
    Soundness,
    Zones,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::ActiveMembership,
        Suite::SubsetExclusivity,
        Suite::SatImpliesTiming,
        Suite::Determinism,
        Suite::Correspondence,
        Suite::Soundness,
        Suite::Zones,
    ];

    /// Name accepted by `tca fuzz --suite`.
    pub fn name(self) -> &'static str {
        match self {
            Suite::ActiveMembership => "lemma1",
            Suite::SubsetExclusivity => "lemma2",
            Suite::SatImpliesTiming => "lemma3",
            Suite::Determinism => "determinism",
            Suite::Correspondence => "theorem1",
            Suite::Soundness => "soundness",
            Suite::Zones => "zones",
        }
    }

    /// Traces per automaton used by default.
    pub fn default_traces(self) -> usize {
        match self {
            Suite::Correspondence => 50,
            Suite::Soundness => 1000,
            _ => 0,
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Suite, String> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    /// Soundness instances skipped because analysis found potential conflicts.
    pub vacuous: usize,
    pub first_failure: Option<(u64, String)>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} passed, {} failed",
            self.suite, self.passed, self.failed
        )?;
        if self.suite == Suite::Soundness {
            write!(f, ", {} vacuous", self.vacuous)?;
        }
        if let Some((seed, why)) = &self.first_failure {
            write!(f, "; first failure at seed {seed}: {why}")?;
        }
        Ok(())
    }
}

/// Runs `count` instances of `suite` with seeds `seed, seed + 1, …`. For
/// soundness, `count` conflict-free automata are probed; automata with
/// potential conflicts are skipped and counted as vacuous.
pub fn run_suite(
    suite: Suite,
    seed: u64,
    count: usize,
    traces: usize,
    params: &GenParams,
) -> SuiteReport {
    let mut report = SuiteReport {
        suite,
        passed: 0,
        failed: 0,
        vacuous: 0,
        first_failure: None,
    };
    let record = |report: &mut SuiteReport, s: u64, outcome: Result<(), String>| match outcome {
        Ok(()) => report.passed += 1,
        Err(why) => {
            report.failed += 1;
            report.first_failure.get_or_insert((s, why));
        }
    };
    let mut s = seed;
    let budget = count.saturating_mul(200).max(1000);
    let mut tried = 0;
    while report.passed + report.failed < count {
        if suite == Suite::Soundness && tried >= budget {
            break;
        }
        tried += 1;
        let p = params.with_seed(s);
        let outcome = match suite {
            Suite::ActiveMembership => check_active_membership(&p),
            Suite::SubsetExclusivity => check_subset_exclusivity(&p),
            Suite::SatImpliesTiming => check_sat_implies_timing(&p),
            Suite::Determinism => check_flatten_determinism(&p),
            Suite::Correspondence => check_correspondence_instance(&p, traces),
            Suite::Zones => check_zones(&p),
            Suite::Soundness => {
                let m = gen_automaton(&p);
                match probe_soundness(&m, traces, &p) {
                    Soundness::Vacuous => {
                        report.vacuous += 1;
                        s = s.wrapping_add(1);
                        continue;
                    }
                    Soundness::Held => Ok(()),
                    Soundness::Refuted { trace } => {
                        Err(format!("conflict on a {}-event trace", trace.len()))
                    }
                }
            }
        };
        record(&mut report, s, outcome);
        s = s.wrapping_add(1);
    }
    report
}
