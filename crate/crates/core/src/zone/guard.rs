use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{Atom, Bound, ClockSet, Valuation, Zone, ZoneError};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }

    /// `lhs ⋈ rhs`.
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Gt => lhs > rhs,
        }
    }
}

impl FromStr for Comparator {
    type Err = ZoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "<" => Comparator::Lt,
            "<=" | "≤" => Comparator::Le,
            "=" | "==" => Comparator::Eq,
            ">=" | "≥" => Comparator::Ge,
            ">" => Comparator::Gt,
            other => return Err(ZoneError::UnknownComparator(other.to_owned())),
        })
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Atomic comparison `left ⋈ value` or `left - right ⋈ value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub left: String,
    pub right: Option<String>,
    pub op: Comparator,
    pub value: Rational,
}

impl Constraint {
    pub fn clock(clock: &str, op: Comparator, value: Rational) -> Constraint {
        Constraint {
            left: clock.to_owned(),
            right: None,
            op,
            value,
        }
    }

    pub fn difference(left: &str, right: &str, op: Comparator, value: Rational) -> Constraint {
        Constraint {
            left: left.to_owned(),
            right: Some(right.to_owned()),
            op,
            value,
        }
    }

    /// Parses the three string fields of a serialized constraint:
    /// a term (`"t"` or `"c1-c2"`), a comparator and a decimal constant.
    pub fn parse(term: &str, op: &str, value: &str) -> Result<Constraint, ZoneError> {
        let op = op.parse()?;
        let value = rational::parse_rational(value)?;
        let (left, right) = match term.split_once('-') {
            Some((l, r)) => (l.trim(), Some(r.trim())),
            None => (term.trim(), None),
        };
        let valid = |s: &str| super::is_identifier(s);
        if !valid(left) || right.is_some_and(|r| !valid(r)) {
            return Err(ZoneError::InvalidTerm(term.to_owned()));
        }
        Ok(Constraint {
            left: left.to_owned(),
            right: right.map(str::to_owned),
            op,
            value,
        })
    }

    /// The term as written in serialized form.
    pub fn term(&self) -> String {
        match &self.right {
            Some(r) => format!("{}-{}", self.left, r),
            None => self.left.clone(),
        }
    }

    fn atoms(&self, clocks: &ClockSet) -> Result<Vec<Atom>, ZoneError> {
        let index = |name: &str| {
            clocks
                .index_of(name)
                .map(|i| i + 1)
                .ok_or_else(|| ZoneError::UnknownClock(name.to_owned()))
        };
        let plus = index(&self.left)?;
        let minus = match &self.right {
            Some(r) => index(r)?,
            None => 0,
        };
        let upper = |bound| Atom { plus, minus, bound };
        let lower = |bound| Atom {
            plus: minus,
            minus: plus,
            bound,
        };
        let c = self.value;
        Ok(match self.op {
            Comparator::Lt => vec![upper(Bound::lt(c))],
            Comparator::Le => vec![upper(Bound::le(c))],
            Comparator::Eq => vec![upper(Bound::le(c)), lower(Bound::le(-c))],
            Comparator::Ge => vec![lower(Bound::le(-c))],
            Comparator::Gt => vec![lower(Bound::lt(-c))],
        })
    }

    /// Direct evaluation at a valuation, independent of any zone encoding.
    pub fn holds(&self, clocks: &ClockSet, v: &Valuation) -> Result<bool, ZoneError> {
        let value = |name: &str| {
            clocks
                .index_of(name)
                .map(|i| v.get(i))
                .ok_or_else(|| ZoneError::UnknownClock(name.to_owned()))
        };
        let mut lhs = value(&self.left)?;
        if let Some(r) = &self.right {
            lhs -= value(r)?;
        }
        Ok(self.op.holds(&lhs, &self.value))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.term(),
            self.op,
            rational::Display(&self.value)
        )
    }
}

/// Builds the canonical zone for a conjunction of constraints; always
/// intersected with nonnegativity of every clock.
pub fn zone_from_constraints(
    clocks: &ClockSet,
    constraints: &[Constraint],
) -> Result<Zone, ZoneError> {
    let mut atoms = Vec::new();
    for c in constraints {
        atoms.extend(c.atoms(clocks)?);
    }
    Ok(Zone::from_atoms(clocks.len(), &atoms))
}

fn atom_constraints(clocks: &ClockSet, atoms: &[Atom]) -> Vec<Constraint> {
    let name = |i: usize| clocks.name(i - 1);
    let mut used = vec![false; atoms.len()];
    let mut out = Vec::new();
    for (k, a) in atoms.iter().enumerate() {
        if used[k] {
            continue;
        }
        used[k] = true;
        let Bound::Finite { value, strict } = a.bound else {
            continue;
        };
        // x - y <= m paired with y - x <= -m is an equality.
        let partner = atoms.iter().enumerate().position(|(k2, b)| {
            !used[k2]
                && !strict
                && b.plus == a.minus
                && b.minus == a.plus
                && b.bound == Bound::le(-value)
        });
        if let Some(p) = partner {
            used[p] = true;
            let (plus, minus, value) = if a.plus == 0 {
                (a.minus, 0, -value)
            } else {
                (a.plus, a.minus, value)
            };
            out.push(Constraint {
                left: name(plus).to_owned(),
                right: (minus != 0).then(|| name(minus).to_owned()),
                op: Comparator::Eq,
                value,
            });
            continue;
        }
        let constraint = match (a.plus, a.minus) {
            (p, 0) => Constraint {
                left: name(p).to_owned(),
                right: None,
                op: if strict {
                    Comparator::Lt
                } else {
                    Comparator::Le
                },
                value,
            },
            (0, m) => Constraint {
                left: name(m).to_owned(),
                right: None,
                op: if strict {
                    Comparator::Gt
                } else {
                    Comparator::Ge
                },
                value: -value,
            },
            (p, m) => Constraint {
                left: name(p).to_owned(),
                right: Some(name(m).to_owned()),
                op: if strict {
                    Comparator::Lt
                } else {
                    Comparator::Le
                },
                value,
            },
        };
        out.push(constraint);
    }
    out
}

/// Finite union of zones over one clock set. No member is empty; the empty
/// union is `false`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    clocks: Arc<ClockSet>,
    zones: Vec<Zone>,
}

impl Guard {
    pub fn tt(clocks: &Arc<ClockSet>) -> Guard {
        Guard {
            clocks: clocks.clone(),
            zones: vec![Zone::universe(clocks.len())],
        }
    }

    pub fn ff(clocks: &Arc<ClockSet>) -> Guard {
        Guard {
            clocks: clocks.clone(),
            zones: Vec::new(),
        }
    }

    /// Union of the given zones, dropping empty and subsumed members.
    pub fn from_zones(clocks: &Arc<ClockSet>, zones: Vec<Zone>) -> Guard {
        Guard {
            clocks: clocks.clone(),
            zones: reduce(zones),
        }
    }

    /// Disjunction of conjunctions of constraints.
    pub fn from_constraints(
        clocks: &Arc<ClockSet>,
        zones: &[Vec<Constraint>],
    ) -> Result<Guard, ZoneError> {
        let zones = zones
            .iter()
            .map(|cs| zone_from_constraints(clocks, cs))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Guard::from_zones(clocks, zones))
    }

    /// Single-zone guard from a conjunction.
    pub fn conjunction(
        clocks: &Arc<ClockSet>,
        constraints: &[Constraint],
    ) -> Result<Guard, ZoneError> {
        Guard::from_constraints(clocks, &[constraints.to_vec()])
    }

    pub fn clocks(&self) -> &Arc<ClockSet> {
        &self.clocks
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn is_false(&self) -> bool {
        self.zones.is_empty()
    }

    /// Semantic validity: every nonnegative valuation satisfies the guard.
    pub fn is_true(&self) -> bool {
        self.zones.iter().any(Zone::is_universe) || self.not().is_false()
    }

    fn check_clocks(&self, other: &Guard) -> Result<(), ZoneError> {
        if Arc::ptr_eq(&self.clocks, &other.clocks) || self.clocks == other.clocks {
            Ok(())
        } else {
            Err(ZoneError::ClockMismatch)
        }
    }

    pub fn and(&self, other: &Guard) -> Result<Guard, ZoneError> {
        self.check_clocks(other)?;
        let mut zones = Vec::with_capacity(self.zones.len() * other.zones.len());
        for a in &self.zones {
            for b in &other.zones {
                zones.push(a.intersect(b));
            }
        }
        Ok(Guard::from_zones(&self.clocks, zones))
    }

    pub fn or(&self, other: &Guard) -> Result<Guard, ZoneError> {
        self.check_clocks(other)?;
        let zones = self.zones.iter().chain(&other.zones).cloned().collect();
        Ok(Guard::from_zones(&self.clocks, zones))
    }

    /// Complement within the nonnegative valuations: each zone is negated
    /// into a union of half-spaces and the results are conjoined.
    pub fn not(&self) -> Guard {
        let mut acc = vec![Zone::universe(self.clocks.len())];
        for zone in &self.zones {
            let complement = zone.complement();
            let mut next = Vec::with_capacity(acc.len() * complement.len());
            for a in &acc {
                for c in &complement {
                    next.push(a.intersect(c));
                }
            }
            acc = reduce(next);
            if acc.is_empty() {
                break;
            }
        }
        Guard {
            clocks: self.clocks.clone(),
            zones: acc,
        }
    }

    /// `{v | ∃δ ≥ 0 · v + δ ∈ self}`.
    pub fn time_predecessor(&self) -> Guard {
        Guard::from_zones(&self.clocks, self.zones.iter().map(Zone::down).collect())
    }

    pub fn contains(&self, v: &Valuation) -> bool {
        self.zones.iter().any(|z| z.contains(v))
    }

    /// `v ≫ self`: no delay from `v` ever satisfies the guard.
    pub fn exceeded_by(&self, v: &Valuation) -> bool {
        !self.time_predecessor().contains(v)
    }

    /// Semantic equality, via emptiness of both differences.
    pub fn equivalent(&self, other: &Guard) -> Result<bool, ZoneError> {
        Ok(self.and(&other.not())?.is_false() && other.and(&self.not())?.is_false())
    }

    pub fn sample(&self) -> Option<Valuation> {
        self.zones.first().and_then(Zone::sample)
    }

    /// Irredundant constraint lists, one per zone.
    pub fn constraints(&self) -> Vec<Vec<Constraint>> {
        self.zones
            .iter()
            .map(|z| atom_constraints(&self.clocks, &z.minimal_atoms()))
            .collect()
    }
}

/// `v ≫ g`.
pub fn exceeds(v: &Valuation, g: &Guard) -> bool {
    g.exceeded_by(v)
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zones = self.constraints();
        if zones.is_empty() {
            return f.write_str("false");
        }
        for (i, zone) in zones.iter().enumerate() {
            if i > 0 {
                f.write_str(" || ")?;
            }
            if zone.is_empty() {
                f.write_str("true")?;
                continue;
            }
            let parens = zones.len() > 1 && zone.len() > 1;
            if parens {
                f.write_str("(")?;
            }
            for (j, c) in zone.iter().enumerate() {
                if j > 0 {
                    f.write_str(" && ")?;
                }
                write!(f, "{c}")?;
            }
            if parens {
                f.write_str(")")?;
            }
        }
        Ok(())
    }
}

/// Drops empty zones and zones contained in another member.
fn reduce(zones: Vec<Zone>) -> Vec<Zone> {
    let zones: Vec<Zone> = zones.into_iter().filter(|z| !z.is_empty()).collect();
    let mut kept: Vec<Zone> = Vec::with_capacity(zones.len());
    for (i, z) in zones.iter().enumerate() {
        let subsumed = zones
            .iter()
            .enumerate()
            .any(|(j, other)| j != i && z.is_subset_of(other) && (!other.is_subset_of(z) || j < i));
        if !subsumed {
            kept.push(z.clone());
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::zone::GLOBAL_CLOCK;

    fn clocks() -> Arc<ClockSet> {
        Arc::new(ClockSet::new(["t"]).unwrap())
    }

    fn g(cs: &[(&str, &str, &str)]) -> Guard {
        let cs: Vec<Constraint> = cs
            .iter()
            .map(|(t, o, v)| Constraint::parse(t, o, v).unwrap())
            .collect();
        Guard::conjunction(&clocks(), &cs).unwrap()
    }

    fn at(t: Rational) -> Valuation {
        Valuation::new(vec![int(100), t]).unwrap()
    }

    #[test]
    fn parses_terms() {
        let c = Constraint::parse("c1-c2", "<", "-3").unwrap();
        assert_eq!(c.left, "c1");
        assert_eq!(c.right.as_deref(), Some("c2"));
        assert_eq!(c.value, int(-3));
        assert!(Constraint::parse("t", "!=", "3").is_err());
        assert!(Constraint::parse("t-", "<", "3").is_err());
        assert!(Constraint::parse("t", "<", "x").is_err());
    }

    #[test]
    fn unknown_clock_is_an_error() {
        let c = Constraint::parse("u", "<", "3").unwrap();
        assert_eq!(
            zone_from_constraints(&clocks(), &[c]),
            Err(ZoneError::UnknownClock("u".into()))
        );
    }

    #[test]
    fn zone_from_constraints_examples() {
        let upto15 =
            zone_from_constraints(&clocks(), &[Constraint::parse("t", "<=", "15").unwrap()])
                .unwrap();
        assert!(upto15.contains(&at(int(15))));
        assert!(!upto15.contains(&at(frac(31, 2))));
        assert!(zone_from_constraints(&clocks(), &[]).unwrap().is_universe());
        let contradiction = g(&[("t", "<=", "2"), ("t", ">=", "5")]);
        assert!(contradiction.is_false());
    }

    #[test]
    fn and_or_identities() {
        let c = clocks();
        let upto15 = g(&[("t", "<=", "15")]);
        assert_eq!(Guard::tt(&c).and(&upto15).unwrap(), upto15);
        assert!(upto15.and(&g(&[("t", ">", "15")])).unwrap().is_false());
        assert_eq!(Guard::ff(&c).or(&upto15).unwrap(), upto15);
        let cover = g(&[("t", "<=", "5")]).or(&g(&[("t", ">=", "3")])).unwrap();
        assert!(cover.is_true());
        assert_eq!(upto15.or(&upto15).unwrap(), upto15);
    }

    #[test]
    fn clock_mismatch_rejected() {
        let other = Arc::new(ClockSet::new(["u"]).unwrap());
        assert_eq!(
            Guard::tt(&clocks()).and(&Guard::tt(&other)),
            Err(ZoneError::ClockMismatch)
        );
    }

    #[test]
    fn negation_examples() {
        let c = clocks();
        assert!(Guard::tt(&c).not().is_false());
        assert!(Guard::ff(&c).not().is_true());
        let upto15 = g(&[("t", "<=", "15")]);
        assert_eq!(upto15.not(), g(&[("t", ">", "15")]));
        assert_eq!(upto15.not().not(), upto15);
    }

    #[test]
    fn time_predecessor_examples() {
        let upto15 = g(&[("t", "<=", "15")]);
        assert_eq!(upto15.time_predecessor(), upto15);
        assert!(g(&[("t", ">=", "5")]).time_predecessor().is_true());
        assert!(upto15.exceeded_by(&at(int(20))));
        assert!(!upto15.exceeded_by(&at(int(3))));
        assert!(!Guard::tt(&clocks()).exceeded_by(&at(int(1000))));
    }

    #[test]
    fn contains_boundaries() {
        let upto15 = g(&[("t", "<=", "15")]);
        assert!(Guard::tt(&clocks()).contains(&at(int(7))));
        assert!(upto15.contains(&at(int(15))));
        assert!(!upto15.contains(&at(frac(31, 2))));
    }

    #[test]
    fn renders_minimal_constraints() {
        let c = clocks();
        assert_eq!(g(&[("t", "<=", "15")]).to_string(), "t <= 15");
        assert_eq!(Guard::tt(&c).to_string(), "true");
        assert_eq!(Guard::ff(&c).to_string(), "false");
        assert_eq!(g(&[("t", "=", "4")]).to_string(), "t = 4");
        let two = g(&[("t", "<", "1")])
            .or(&g(&[("t", ">", "2"), (GLOBAL_CLOCK, "<=", "9")]))
            .unwrap();
        assert_eq!(two.to_string(), "t < 1 || (t > 2 && gamma <= 9)");
    }

    #[test]
    fn equality_and_difference_rendering() {
        let c = Arc::new(ClockSet::new(["c1", "c2"]).unwrap());
        let guard = Guard::conjunction(
            &c,
            &[
                Constraint::parse("c1", "<=", "2").unwrap(),
                Constraint::parse("c2", ">=", "5").unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(
            guard.time_predecessor().to_string(),
            "c1 <= 2 && c1-c2 <= -3"
        );
    }
}
