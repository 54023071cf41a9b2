//! Difference bound matrices over rational constants.
//!
//! A [`Zone`] over `n` clocks is an `(n + 1) x (n + 1)` matrix whose entry
//! `(i, j)` bounds `x_i - x_j`. Index 0 is the constant-zero reference, so
//! clock `c` of a [`ClockSet`](super::ClockSet) lives at matrix index `c + 1`.
//! Zones are kept in canonical (shortest-path closed) form at all times and
//! always include `x >= 0` for every clock.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;

use super::Valuation;
use crate::rational::{self, midpoint, Rational};

/// Upper bound on a clock difference: `x_i - x_j < value`, `<= value`, or
/// unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite { value: Rational, strict: bool },
    Infinite,
}

impl Bound {
    pub fn le(value: Rational) -> Bound {
        Bound::Finite {
            value,
            strict: false,
        }
    }

    pub fn lt(value: Rational) -> Bound {
        Bound::Finite {
            value,
            strict: true,
        }
    }

    pub fn le_zero() -> Bound {
        Bound::le(Rational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite { .. })
    }

    /// For `x_i - x_j ≺ m`, the bound on `x_j - x_i` describing its
    /// complement. `None` for the infinite bound, whose complement is empty.
    pub fn complement(self) -> Option<Bound> {
        match self {
            Bound::Finite { value, strict } => Some(Bound::Finite {
                value: -value,
                strict: !strict,
            }),
            Bound::Infinite => None,
        }
    }

    /// Whether `diff` satisfies this bound.
    pub fn admits(&self, diff: &Rational) -> bool {
        match self {
            Bound::Finite {
                value,
                strict: true,
            } => diff < value,
            Bound::Finite {
                value,
                strict: false,
            } => diff <= value,
            Bound::Infinite => true,
        }
    }
}

/// Bound on the sum of two differences.
impl std::ops::Add for Bound {
    type Output = Bound;

    fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (
                Bound::Finite {
                    value: a,
                    strict: s,
                },
                Bound::Finite {
                    value: b,
                    strict: t,
                },
            ) => Bound::Finite {
                value: a + b,
                strict: s || t,
            },
            _ => Bound::Infinite,
        }
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Infinite, Bound::Infinite) => Ordering::Equal,
            (Bound::Infinite, _) => Ordering::Greater,
            (_, Bound::Infinite) => Ordering::Less,
            (
                Bound::Finite {
                    value: a,
                    strict: s,
                },
                Bound::Finite {
                    value: b,
                    strict: t,
                },
            ) => a.cmp(b).then_with(|| match (s, t) {
                (true, false) => Ordering::Less,
                (false, true) => Ordering::Greater,
                _ => Ordering::Equal,
            }),
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite { value, strict } => {
                let op = if *strict { "<" } else { "<=" };
                write!(f, "{op} {}", rational::Display(value))
            }
            Bound::Infinite => f.write_str("< inf"),
        }
    }
}

/// One matrix entry read as a constraint: `x_plus - x_minus ≺ bound`, with
/// index 0 denoting the constant zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub plus: usize,
    pub minus: usize,
    pub bound: Bound,
}

impl Atom {
    /// Evaluates the atom at a valuation (matrix indices, 0 = zero).
    pub fn holds(&self, v: &Valuation) -> bool {
        let value = |i: usize| {
            if i == 0 {
                Rational::zero()
            } else {
                v.get(i - 1)
            }
        };
        self.bound.admits(&(value(self.plus) - value(self.minus)))
    }
}

/// Convex set of clock valuations in canonical DBM form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Zone {
    dim: usize,
    m: Vec<Bound>,
}

impl Zone {
    /// All valuations with nonnegative clocks.
    pub fn universe(clocks: usize) -> Zone {
        let dim = clocks + 1;
        let mut m = vec![Bound::Infinite; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = Bound::le_zero();
            m[i] = Bound::le_zero();
        }
        Zone { dim, m }
    }

    /// The canonical empty zone.
    pub fn empty(clocks: usize) -> Zone {
        let dim = clocks + 1;
        Zone {
            dim,
            m: vec![Bound::lt(Rational::zero()); dim * dim],
        }
    }

    /// Intersection of the universe with the given atoms.
    pub fn from_atoms(clocks: usize, atoms: &[Atom]) -> Zone {
        let mut zone = Zone::universe(clocks);
        for atom in atoms {
            zone.tighten(atom.plus, atom.minus, atom.bound);
        }
        zone.close();
        zone
    }

    /// Number of clocks (excluding the zero reference).
    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    /// Matrix entry `(i, j)`, bounding `x_i - x_j`.
    pub fn bound(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.m[i * self.dim + j] = b;
    }

    fn tighten(&mut self, i: usize, j: usize, b: Bound) {
        if b < self.bound(i, j) {
            self.set(i, j, b);
        }
    }

    /// Floyd-Warshall closure; a negative cycle collapses to the canonical
    /// empty zone.
    fn close(&mut self) {
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.m[i * n + k];
                if !ik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let through = ik + self.m[k * n + j];
                    if through < self.m[i * n + j] {
                        self.m[i * n + j] = through;
                    }
                }
            }
        }
        if (0..n).any(|i| self.m[i * n + i] < Bound::le_zero()) {
            *self = Zone::empty(self.clocks());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.m[0] < Bound::le_zero()
    }

    /// Whether this zone admits every nonnegative valuation.
    pub fn is_universe(&self) -> bool {
        *self == Zone::universe(self.clocks())
    }

    pub fn intersect(&self, other: &Zone) -> Zone {
        debug_assert_eq!(self.dim, other.dim);
        if self.is_empty() || other.is_empty() {
            return Zone::empty(self.clocks());
        }
        let mut zone = self.clone();
        for (mine, theirs) in zone.m.iter_mut().zip(&other.m) {
            if theirs < mine {
                *mine = *theirs;
            }
        }
        zone.close();
        zone
    }

    pub fn contains(&self, v: &Valuation) -> bool {
        if self.is_empty() || v.len() != self.clocks() {
            return false;
        }
        let value = |i: usize| {
            if i == 0 {
                Rational::zero()
            } else {
                v.get(i - 1)
            }
        };
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && !self.bound(i, j).admits(&(value(i) - value(j))) {
                    return false;
                }
            }
        }
        true
    }

    /// Inclusion test on canonical forms.
    pub fn is_subset_of(&self, other: &Zone) -> bool {
        if self.is_empty() {
            return true;
        }
        if other.is_empty() {
            return false;
        }
        self.m.iter().zip(&other.m).all(|(a, b)| a <= b)
    }

    /// Time predecessors: every valuation that reaches this zone after some
    /// nonnegative delay. Lower bounds are relaxed down to the tightest
    /// difference constraint that still applies.
    pub fn down(&self) -> Zone {
        if self.is_empty() {
            return self.clone();
        }
        let mut zone = self.clone();
        for i in 1..self.dim {
            let mut lower = Bound::le_zero();
            for j in 1..self.dim {
                let b = zone.bound(j, i);
                if b < lower {
                    lower = b;
                }
            }
            zone.set(0, i, lower);
        }
        zone.close();
        zone
    }

    /// Every finite off-diagonal entry as an atom.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut atoms = Vec::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let bound = self.bound(i, j);
                if i != j && bound.is_finite() {
                    atoms.push(Atom {
                        plus: i,
                        minus: j,
                        bound,
                    });
                }
            }
        }
        atoms
    }

    /// A smallest-effort irredundant set of atoms whose intersection with the
    /// universe equals this zone. Empty for the universe itself.
    pub fn minimal_atoms(&self) -> Vec<Atom> {
        if self.is_empty() {
            return vec![Atom {
                plus: 0,
                minus: 0,
                bound: Bound::lt(Rational::zero()),
            }];
        }
        let universe = Zone::universe(self.clocks());
        let mut kept: Vec<Atom> = self
            .atoms()
            .into_iter()
            .filter(|a| a.bound < universe.bound(a.plus, a.minus))
            .collect();
        let mut idx = 0;
        while idx < kept.len() {
            let mut without = kept.clone();
            without.remove(idx);
            if Zone::from_atoms(self.clocks(), &without) == *self {
                kept = without;
            } else {
                idx += 1;
            }
        }
        kept
    }

    /// Complement relative to the nonnegative universe, as a union of zones.
    pub fn complement(&self) -> Vec<Zone> {
        if self.is_empty() {
            return vec![Zone::universe(self.clocks())];
        }
        self.minimal_atoms()
            .into_iter()
            .filter_map(|atom| {
                let bound = atom.bound.complement()?;
                let zone = Zone::from_atoms(
                    self.clocks(),
                    &[Atom {
                        plus: atom.minus,
                        minus: atom.plus,
                        bound,
                    }],
                );
                (!zone.is_empty()).then_some(zone)
            })
            .collect()
    }

    /// A deterministic member: clocks are fixed in order at their least
    /// admissible value, stepping off strict lower bounds by ½ (or to the
    /// midpoint when the interval is narrower).
    pub fn sample(&self) -> Option<Valuation> {
        if self.is_empty() {
            return None;
        }
        let mut zone = self.clone();
        let mut values = Vec::with_capacity(self.clocks());
        for c in 1..self.dim {
            let (lower, strict_lower) = match zone.bound(0, c) {
                Bound::Finite { value, strict } => (-value, strict),
                Bound::Infinite => unreachable!("clocks are bounded below by zero"),
            };
            let value = if !strict_lower {
                lower
            } else {
                let nudged = lower + rational::frac(1, 2);
                match zone.bound(c, 0) {
                    Bound::Finite { value: upper, .. } => nudged.min(midpoint(&lower, &upper)),
                    Bound::Infinite => nudged,
                }
            };
            zone.tighten(c, 0, Bound::le(value));
            zone.tighten(0, c, Bound::le(-value));
            zone.close();
            debug_assert!(!zone.is_empty());
            values.push(value);
        }
        Some(Valuation::new_unchecked(values))
    }
}
