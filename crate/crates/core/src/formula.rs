//! Time-indexed propositional formulas.
//!
//! Atoms are pairs `name@t` where `name` is a variable symbol and `t` a time
//! point in `[0, N]`. The printer emits a fully parenthesized canonical form
//! that the parser in [`crate::parse`] reads back to the same tree, so the
//! printed text doubles as a structural identity key.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A time point.
pub type Time = u32;

/// Default upper bound on the vocabulary size accepted by [`models`].
pub const DEFAULT_MODEL_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedAtom {
    pub name: String,
    pub time: Time,
}

impl TimedAtom {
    pub fn new(name: impl Into<String>, time: Time) -> Self {
        TimedAtom {
            name: name.into(),
            time,
        }
    }

    /// Node label used by graph exports: `name_t`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.name, self.time)
    }
}

impl fmt::Display for TimedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.time)
    }
}

/// Returns true if `name` matches `[A-Za-z][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Atom(TimedAtom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>, time: Time) -> Self {
        Formula::Atom(TimedAtom::new(name, time))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `Top` when empty.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Negation that removes a leading double negation: `negated(!p) = p`.
    pub fn negated(&self) -> Formula {
        match self {
            Formula::Not(inner) => (**inner).clone(),
            other => Formula::not(other.clone()),
        }
    }

    pub fn vars(&self) -> BTreeSet<TimedAtom> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.insert(a.clone());
        });
        out
    }

    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            if !out.contains(&a.name) {
                out.insert(a.name.clone());
            }
        });
        out
    }

    /// Largest time index occurring in the formula, `None` for variable-free formulas.
    pub fn max_time(&self) -> Option<Time> {
        let mut max = None;
        self.visit_atoms(&mut |a| max = Some(max.map_or(a.time, |m: Time| m.max(a.time))));
        max
    }

    pub fn min_time(&self) -> Option<Time> {
        let mut min = None;
        self.visit_atoms(&mut |a| min = Some(min.map_or(a.time, |m: Time| m.min(a.time))));
        min
    }

    /// True if every atom is indexed no later than `t`.
    pub fn is_until(&self, t: Time) -> bool {
        self.max_time().is_none_or(|m| m <= t)
    }

    pub fn is_variable_free(&self) -> bool {
        self.max_time().is_none()
    }

    pub fn visit_atoms<F: FnMut(&TimedAtom)>(&self, f: &mut F) {
        match self {
            Formula::Top | Formula::Bottom => {}
            Formula::Atom(a) => f(a),
            Formula::Not(x) => x.visit_atoms(f),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    /// Evaluate under a valuation function over atoms.
    pub fn eval_with<F: Fn(&TimedAtom) -> bool + Copy>(&self, value: F) -> bool {
        match self {
            Formula::Top => true,
            Formula::Bottom => false,
            Formula::Atom(a) => value(a),
            Formula::Not(x) => !x.eval_with(value),
            Formula::And(a, b) => a.eval_with(value) && b.eval_with(value),
            Formula::Or(a, b) => a.eval_with(value) || b.eval_with(value),
            Formula::Implies(a, b) => !a.eval_with(value) || b.eval_with(value),
            Formula::Iff(a, b) => a.eval_with(value) == b.eval_with(value),
        }
    }

    /// Canonical printed form, the identity key for facts and rules.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => write!(f, "true"),
            Formula::Bottom => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!{x}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

/// A literal over a timed atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: TimedAtom,
    pub positive: bool,
}

impl Literal {
    pub fn new(atom: TimedAtom, positive: bool) -> Self {
        Literal { atom, positive }
    }

    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Formula::not(a)
        }
    }

    pub fn complement(&self) -> Literal {
        Literal::new(self.atom.clone(), !self.positive)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "!{}", self.atom)
        }
    }
}

/// A total assignment over a declared finite vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation {
    assignment: BTreeMap<TimedAtom, bool>,
}

impl Interpretation {
    pub fn new(assignment: BTreeMap<TimedAtom, bool>) -> Self {
        Interpretation { assignment }
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &TimedAtom> {
        self.assignment.keys()
    }

    pub fn get(&self, atom: &TimedAtom) -> Option<bool> {
        self.assignment.get(atom).copied()
    }

    /// `None` when the formula mentions an atom outside the vocabulary.
    pub fn satisfies(&self, f: &Formula) -> Option<bool> {
        if f.vars().iter().any(|a| !self.assignment.contains_key(a)) {
            return None;
        }
        Some(f.eval_with(|a| self.assignment[a]))
    }

    /// The literals made true, in vocabulary order.
    pub fn literals(&self) -> Vec<Literal> {
        self.assignment
            .iter()
            .map(|(a, v)| Literal::new(a.clone(), *v))
            .collect()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> = self.literals().iter().map(|l| l.to_string()).collect();
        write!(f, "({})", lits.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("vocabulary of {size} atoms exceeds the enumeration cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("formula mentions {0} which is outside the vocabulary")]
    OutsideVocabulary(TimedAtom),
}

/// Enumerate `Mod(φ)` over `vocab` by truth table. Desk-scale only.
pub fn models(
    phi: &Formula,
    vocab: &BTreeSet<TimedAtom>,
    cap: usize,
) -> Result<Vec<Interpretation>, ModelError> {
    if let Some(a) = phi.vars().into_iter().find(|a| !vocab.contains(a)) {
        return Err(ModelError::OutsideVocabulary(a));
    }
    if vocab.len() > cap {
        return Err(ModelError::CapExceeded {
            size: vocab.len(),
            cap,
        });
    }
    let atoms: Vec<&TimedAtom> = vocab.iter().collect();
    let index: BTreeMap<&TimedAtom, usize> =
        atoms.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << atoms.len()) {
        let holds = phi.eval_with(|a| bits >> index[a] & 1 == 1);
        if holds {
            let assignment = atoms
                .iter()
                .enumerate()
                .map(|(i, a)| ((*a).clone(), bits >> i & 1 == 1))
                .collect();
            out.push(Interpretation::new(assignment));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a0() -> Formula {
        Formula::atom("a", 0)
    }
    fn b0() -> Formula {
        Formula::atom("b", 0)
    }

    #[test]
    fn single_model() {
        let phi = Formula::and(a0(), Formula::not(b0()));
        let vocab = phi.vars();
        let ms = models(&phi, &vocab, DEFAULT_MODEL_CAP).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].get(&TimedAtom::new("a", 0)), Some(true));
        assert_eq!(ms[0].get(&TimedAtom::new("b", 0)), Some(false));
    }

    #[test]
    fn top_has_every_interpretation() {
        let vocab: BTreeSet<_> = [TimedAtom::new("a", 0)].into();
        assert_eq!(models(&Formula::Top, &vocab, 24).unwrap().len(), 2);
    }

    #[test]
    fn contradiction_has_no_model() {
        let phi = Formula::and(a0(), Formula::not(a0()));
        assert!(models(&phi, &phi.vars(), 24).unwrap().is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let vocab: BTreeSet<_> = (0..5).map(|t| TimedAtom::new("a", t)).collect();
        assert_eq!(
            models(&Formula::Top, &vocab, 4),
            Err(ModelError::CapExceeded { size: 5, cap: 4 })
        );
    }

    #[test]
    fn vocabulary_must_cover_formula() {
        let err = models(&a0(), &BTreeSet::new(), 24).unwrap_err();
        assert_eq!(err, ModelError::OutsideVocabulary(TimedAtom::new("a", 0)));
    }

    #[test]
    fn negated_strips_one_negation() {
        assert_eq!(Formula::not(a0()).negated(), a0());
        assert_eq!(a0().negated(), Formula::not(a0()));
    }

    #[test]
    fn accessors() {
        let phi = Formula::or(Formula::atom("p", 2), Formula::not(Formula::atom("q", 0)));
        assert_eq!(phi.max_time(), Some(2));
        assert_eq!(phi.min_time(), Some(0));
        assert!(phi.is_until(2));
        assert!(!phi.is_until(1));
        assert_eq!(phi.names(), ["p".to_string(), "q".to_string()].into());
        assert!(Formula::Top.is_until(0));
    }

    #[test]
    fn identifier_grammar() {
        assert!(is_identifier("visible"));
        assert!(is_identifier("A_2"));
        assert!(!is_identifier("2a"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }
}
