//! Clock constraint algebra.
//!
//! Timing predicates are [`Guard`]s: finite unions of canonical [`Zone`]s
//! over a shared [`ClockSet`]. The set is closed under conjunction,
//! disjunction, complement and time-predecessor, which is everything the
//! norm semantics and the flattening need.

mod dbm;
mod guard;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

pub use dbm::{Atom, Bound, Zone};
pub use guard::{exceeds, zone_from_constraints, Comparator, Constraint, Guard};

use crate::rational::{self, ParseRationalError, Rational};

/// Name of the never-reset global clock present in every clock set.
pub const GLOBAL_CLOCK: &str = "gamma";

/// Clock index of [`GLOBAL_CLOCK`].
pub const GLOBAL: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZoneError {
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("clock `{0}` declared twice")]
    DuplicateClock(String),
    #[error("invalid clock name `{0}`")]
    InvalidClockName(String),
    #[error("unknown comparator `{0}`")]
    UnknownComparator(String),
    #[error("invalid constraint term `{0}`")]
    InvalidTerm(String),
    #[error("guards are over different clock sets")]
    ClockMismatch,
    #[error("negative time shift {0}")]
    NegativeDelay(String),
    #[error("negative clock value {0}")]
    NegativeClock(String),
    #[error("the global clock cannot be reset")]
    GlobalClockReset,
    #[error("valuation has {found} clocks, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Ordered clock names; index 0 is always the global clock.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClockSet {
    names: Vec<String>,
}

impl ClockSet {
    /// Builds a clock set from the user clocks; the global clock is added
    /// in front.
    pub fn new<I, S>(clocks: I) -> Result<ClockSet, ZoneError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names = vec![GLOBAL_CLOCK.to_owned()];
        for clock in clocks {
            let clock = clock.into();
            if !is_identifier(&clock) {
                return Err(ZoneError::InvalidClockName(clock));
            }
            if names.contains(&clock) {
                return Err(ZoneError::DuplicateClock(clock));
            }
            names.push(clock);
        }
        Ok(ClockSet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Declared clocks other than the global one.
    pub fn user_clocks(&self) -> &[String] {
        &self.names[1..]
    }
}

/// Total assignment of nonnegative rational values to the clocks of a
/// [`ClockSet`], by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    values: Vec<Rational>,
}

impl Valuation {
    pub fn zero(clocks: usize) -> Valuation {
        Valuation {
            values: vec![Rational::zero(); clocks],
        }
    }

    pub fn new(values: Vec<Rational>) -> Result<Valuation, ZoneError> {
        if let Some(bad) = values.iter().find(|v| !rational::is_nonnegative(v)) {
            return Err(ZoneError::NegativeClock(rational::format_rational(bad)));
        }
        Ok(Valuation { values })
    }

    pub(crate) fn new_unchecked(values: Vec<Rational>) -> Valuation {
        Valuation { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, clock: usize) -> Rational {
        self.values[clock]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Value of the global clock, i.e. elapsed time.
    pub fn global_time(&self) -> Rational {
        self.values[GLOBAL]
    }

    /// Advances every clock by `delta`.
    pub fn shift(&self, delta: &Rational) -> Result<Valuation, ZoneError> {
        if !rational::is_nonnegative(delta) {
            return Err(ZoneError::NegativeDelay(rational::format_rational(delta)));
        }
        Ok(Valuation {
            values: self.values.iter().map(|v| v + delta).collect(),
        })
    }

    /// Overrides the clocks mapped by `reset`, keeping the rest.
    pub fn override_with(&self, reset: &Reset) -> Result<Valuation, ZoneError> {
        if reset.touches_global() {
            return Err(ZoneError::GlobalClockReset);
        }
        let mut values = self.values.clone();
        for (&clock, value) in &reset.values {
            match values.get_mut(clock) {
                Some(slot) => *slot = *value,
                None => return Err(ZoneError::UnknownClock(format!("#{clock}"))),
            }
        }
        Ok(Valuation { values })
    }

    pub fn display<'a>(&'a self, clocks: &'a ClockSet) -> impl fmt::Display + 'a {
        ValuationDisplay {
            valuation: self,
            clocks,
        }
    }
}

struct ValuationDisplay<'a> {
    valuation: &'a Valuation,
    clocks: &'a ClockSet,
}

impl fmt::Display for ValuationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, value) in self.valuation.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", self.clocks.name(i), rational::Display(value))?;
        }
        f.write_str("}")
    }
}

/// Partial clock assignment applied when a transition is taken. The empty
/// reset is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reset {
    values: BTreeMap<usize, Rational>,
}

impl Reset {
    pub fn identity() -> Reset {
        Reset::default()
    }

    /// Resets each listed clock to zero.
    pub fn to_zero<I: IntoIterator<Item = usize>>(clocks: I) -> Reset {
        Reset {
            values: clocks.into_iter().map(|c| (c, Rational::zero())).collect(),
        }
    }

    /// Sets each listed clock to its value; later entries win.
    pub fn with_values<I: IntoIterator<Item = (usize, Rational)>>(entries: I) -> Reset {
        Reset {
            values: entries.into_iter().collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.values.is_empty()
    }

    pub fn touches_global(&self) -> bool {
        self.values.contains_key(&GLOBAL)
    }

    pub fn clocks(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.values.iter().map(|(c, v)| (*c, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn v(values: &[i64]) -> Valuation {
        Valuation::new(values.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn clock_set_puts_global_first() {
        let clocks = ClockSet::new(["t", "u"]).unwrap();
        assert_eq!(clocks.names(), ["gamma", "t", "u"]);
        assert_eq!(clocks.index_of("u"), Some(2));
        assert_eq!(
            ClockSet::new(["t", "t"]).unwrap_err(),
            ZoneError::DuplicateClock("t".into())
        );
        assert!(ClockSet::new(["gamma"]).is_err());
        assert!(ClockSet::new(["c1-c2"]).is_err());
    }

    #[test]
    fn shift_adds_to_every_clock() {
        assert_eq!(v(&[0, 0]).shift(&int(5)).unwrap(), v(&[5, 5]));
        assert_eq!(v(&[3, 1]).shift(&int(0)).unwrap(), v(&[3, 1]));
        let twice = v(&[1, 0]).shift(&int(2)).unwrap().shift(&int(3)).unwrap();
        assert_eq!(twice, v(&[1, 0]).shift(&int(5)).unwrap());
        assert!(matches!(
            v(&[0]).shift(&frac(-1, 2)),
            Err(ZoneError::NegativeDelay(_))
        ));
    }

    #[test]
    fn override_resets_listed_clocks() {
        // {gamma: 9, t: 9} with reset(t)
        let reset = Reset::to_zero([1]);
        assert_eq!(v(&[9, 9]).override_with(&reset).unwrap(), v(&[9, 0]));
        assert_eq!(
            v(&[9, 9]).override_with(&Reset::identity()).unwrap(),
            v(&[9, 9])
        );
        let once = v(&[4, 7]).override_with(&reset).unwrap();
        assert_eq!(once.override_with(&reset).unwrap(), once);
        assert_eq!(
            v(&[9, 9]).override_with(&Reset::to_zero([GLOBAL])),
            Err(ZoneError::GlobalClockReset)
        );
    }

    #[test]
    fn valuation_rejects_negative_values() {
        assert!(Valuation::new(vec![int(-1)]).is_err());
    }
}
