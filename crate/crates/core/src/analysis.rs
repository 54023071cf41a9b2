//! Sound conflict analysis over the flattened automaton.
//!
//! A flat state has a local conflict when some obligation or permission
//! and some prohibition over the same `p:a` in `E ∪ P` can hold at the same
//! valuation. If no reachable flat state has one, no run of the source
//! automaton reaches a conflicting configuration. The converse does not
//! hold, so findings are only potential conflicts.

use std::time::{Duration, Instant};

use crate::flatten::{flatten, prune_unsat, FlatState, FlattenError, FlattenedAutomaton};
use crate::model::{Automaton, Modality, Norm, NormId, NormSet, StateId};
use crate::zone::{Guard, Valuation, ZoneError};

/// A clashing norm pair with its joint window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalConflict {
    /// Obligation or permission first, prohibition second.
    pub pair: (NormId, NormId),
    pub witness: Guard,
    pub sample: Valuation,
}

/// Every (O, F) and (P, F) pair of `set` over the same `p:a` whose guards
/// intersect, ordered by norm index.
pub fn local_conflict(norms: &[Norm], set: &NormSet) -> Result<Vec<LocalConflict>, ZoneError> {
    let mut found = Vec::new();
    for &a in set {
        let na = &norms[a];
        if na.modality == Modality::Prohibition {
            continue;
        }
        for &b in set {
            let nb = &norms[b];
            if nb.modality != Modality::Prohibition || !na.same_subject(nb) {
                continue;
            }
            let witness = na.guard.and(&nb.guard)?;
            if let Some(sample) = witness.sample() {
                found.push(LocalConflict {
                    pair: (a, b),
                    witness,
                    sample,
                });
            }
        }
    }
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictFinding {
    /// State of the source automaton.
    pub base: StateId,
    /// Flat states over `base` exhibiting the pair, sorted.
    pub flat_states: Vec<FlatState>,
    pub pair: (NormId, NormId),
    /// Union of the witnesses over `flat_states`.
    pub witness: Guard,
    pub sample: Valuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub prune: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { prune: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AnalysisStats {
    pub source_states: usize,
    pub source_transitions: usize,
    pub flat_states: usize,
    pub flat_transitions: usize,
    /// Sizes after pruning; equal to the unpruned sizes when pruning is off.
    pub pruned_states: usize,
    pub pruned_transitions: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    ConflictFree,
    PotentialConflicts(Vec<ConflictFinding>),
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub verdict: Verdict,
    pub stats: AnalysisStats,
    /// The automaton the findings refer to, pruned if requested.
    pub flattened: FlattenedAutomaton,
}

impl AnalysisReport {
    pub fn is_conflict_free(&self) -> bool {
        self.verdict == Verdict::ConflictFree
    }

    pub fn findings(&self) -> &[ConflictFinding] {
        match &self.verdict {
            Verdict::ConflictFree => &[],
            Verdict::PotentialConflicts(f) => f,
        }
    }
}

/// Runs `local_conflict` on every reachable flat state of `flatten(m)`.
pub fn analyze(m: &Automaton, options: AnalysisOptions) -> Result<AnalysisReport, FlattenError> {
    let start = Instant::now();
    let full = flatten(m)?;
    let mut stats = AnalysisStats {
        source_states: m.states().len(),
        source_transitions: m.transitions().len(),
        flat_states: full.state_count(),
        flat_transitions: full.transition_count(),
        ..AnalysisStats::default()
    };
    let flattened = if options.prune {
        prune_unsat(&full)?
    } else {
        full
    };
    stats.pruned_states = flattened.state_count();
    stats.pruned_transitions = flattened.transition_count();

    let mut findings: Vec<ConflictFinding> = Vec::new();
    for flat in &flattened.flat_states {
        for local in local_conflict(m.norms(), &flat.labelling())? {
            match findings
                .iter_mut()
                .find(|f| f.base == flat.base && f.pair == local.pair)
            {
                Some(f) => {
                    f.flat_states.push(flat.clone());
                    f.witness = f.witness.or(&local.witness)?;
                }
                None => findings.push(ConflictFinding {
                    base: flat.base,
                    flat_states: vec![flat.clone()],
                    pair: local.pair,
                    witness: local.witness,
                    sample: local.sample,
                }),
            }
        }
    }
    for f in &mut findings {
        f.flat_states.sort();
        if let Some(sample) = f.witness.sample() {
            f.sample = sample;
        }
    }
    findings.sort_by_key(|f| (f.base, f.pair));
    stats.elapsed = start.elapsed();

    let verdict = if findings.is_empty() {
        Verdict::ConflictFree
    } else {
        Verdict::PotentialConflicts(findings)
    };
    Ok(AnalysisReport {
        verdict,
        stats,
        flattened,
    })
}
