//! The listener: an epistemic state `(F, B_L, B_Δ)` of facts, strict rules
//! and default rules, with the awareness closure and the curiosity,
//! suspense and surprise detectors.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::cnf::is_consistent;
use crate::defaults::{stratify, DefaultRule, StratifiedBase};
use crate::error::ReasoningError;
use crate::formula::{Formula, Literal, Time, TimedAtom};
use crate::lex::{LexLimits, LexQuery};
use crate::parse::{ParseError, Schema};

#[derive(Debug, Clone)]
pub struct EpistemicState {
    facts: Vec<Formula>,
    strict: Vec<Formula>,
    defaults: Vec<DefaultRule>,
    horizon: Time,
    limits: LexLimits,
    strata: OnceLock<Result<StratifiedBase, ReasoningError>>,
}

/// Which part of each component survives a time restriction. `None` keeps
/// only the variable-free members (the restriction "until -1").
type Cut = Option<Time>;

fn keep(f: &Formula, cut: Cut) -> bool {
    match cut {
        Some(t) => f.is_until(t),
        None => f.is_variable_free(),
    }
}

impl EpistemicState {
    pub fn new(
        facts: Vec<Formula>,
        strict: Vec<Formula>,
        defaults: Vec<DefaultRule>,
        horizon: Time,
    ) -> Self {
        EpistemicState {
            facts,
            strict,
            defaults,
            horizon,
            limits: LexLimits::default(),
            strata: OnceLock::new(),
        }
    }

    pub fn with_limits(mut self, limits: LexLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn facts(&self) -> &[Formula] {
        &self.facts
    }

    pub fn strict_rules(&self) -> &[Formula] {
        &self.strict
    }

    pub fn defaults(&self) -> &[DefaultRule] {
        &self.defaults
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn limits(&self) -> LexLimits {
        self.limits
    }

    /// Same rules, one more fact. The cached stratification is carried over.
    pub fn with_fact(&self, fact: Formula) -> Self {
        let mut next = self.clone();
        next.facts.push(fact);
        next
    }

    fn restricted(&self, facts: Cut, strict: Cut, defaults: Cut) -> Self {
        EpistemicState {
            facts: self
                .facts
                .iter()
                .filter(|f| keep(f, facts))
                .cloned()
                .collect(),
            strict: self
                .strict
                .iter()
                .filter(|f| keep(f, strict))
                .cloned()
                .collect(),
            defaults: self
                .defaults
                .iter()
                .filter(|r| keep(&r.strict(), defaults))
                .cloned()
                .collect(),
            horizon: self.horizon,
            limits: self.limits,
            strata: OnceLock::new(),
        }
    }

    /// `B|≤t`: every component keeps the members whose atoms are all indexed ≤ t.
    pub fn until(&self, t: Time) -> Self {
        if t >= self.horizon {
            return self.clone();
        }
        self.restricted(Some(t), Some(t), Some(t))
    }

    /// `B|≤t-1`; at `t = 0` only variable-free members remain.
    pub fn strictly_before(&self, t: Time) -> Self {
        let cut = t.checked_sub(1);
        self.restricted(cut, cut, cut)
    }

    pub fn stratification(&self) -> Result<&StratifiedBase, ReasoningError> {
        self.strata
            .get_or_init(|| stratify(&self.defaults))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `F ∪ B_L`.
    pub fn knowledge(&self) -> Vec<Formula> {
        self.facts
            .iter()
            .chain(self.strict.iter())
            .cloned()
            .collect()
    }

    pub fn knowledge_consistent(&self) -> bool {
        is_consistent(self.facts.iter().chain(self.strict.iter()))
    }

    /// `F ∪ B_L` is consistent and `B_Δ` admits a System Z stratification.
    pub fn is_well_formed(&self) -> bool {
        self.knowledge_consistent() && self.stratification().is_ok()
    }

    /// Least fixpoint of the awareness closure, seeded by the names in `F`.
    pub fn aware_names(&self) -> BTreeSet<String> {
        let mut aware: BTreeSet<String> = self.facts.iter().flat_map(Formula::names).collect();
        let groups: Vec<BTreeSet<String>> = self
            .strict
            .iter()
            .map(Formula::names)
            .chain(self.defaults.iter().map(DefaultRule::names))
            .collect();
        loop {
            let before = aware.len();
            for g in &groups {
                if g.iter().any(|n| aware.contains(n)) {
                    aware.extend(g.iter().cloned());
                }
            }
            if aware.len() == before {
                return aware;
            }
        }
    }

    pub fn aware_of(&self, phi: &Formula) -> bool {
        let aware = self.aware_names();
        phi.names().iter().all(|n| aware.contains(n))
    }

    /// Compile the preferred-subbase family for premise `α`. `None` when
    /// `{α} ∪ F ∪ B_L` is inconsistent, in which case nothing is entailed.
    pub fn query(&self, premise: &Formula) -> Result<Option<LexQuery>, ReasoningError> {
        if !self.knowledge_consistent() {
            warn!("facts and strict rules are jointly inconsistent; no inference is drawn");
            return Ok(None);
        }
        let base = self.stratification()?;
        let mut context = Vec::with_capacity(1 + self.facts.len() + self.strict.len());
        context.push(premise.clone());
        context.extend(self.knowledge());
        match LexQuery::new(base, &context, self.limits) {
            Ok(q) => Ok(Some(q)),
            Err(ReasoningError::InconsistentContext) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// `α ⊨_B β`.
    pub fn entails(&self, premise: &Formula, conclusion: &Formula) -> Result<bool, ReasoningError> {
        Ok(match self.query(premise)? {
            Some(mut q) => q.entails(conclusion),
            None => false,
        })
    }

    /// `⊨_B φ`, i.e. `⊤ ⊨_B φ`.
    pub fn believes(&self, phi: &Formula) -> Result<bool, ReasoningError> {
        self.entails(&Formula::Top, phi)
    }

    /// Neither `⊨_B φ` nor `⊨_B ¬φ`, for a well-formed state.
    fn undecided(&self, phi: &Formula) -> Result<bool, ReasoningError> {
        match self.query(&Formula::Top)? {
            Some(mut q) => Ok(!q.entails(phi) && !q.entails(&phi.negated())),
            None => Ok(false),
        }
    }

    /// Curious about `φ` at `t`: `B|≤t` is well-formed, aware of `φ`, and
    /// derives neither `φ` nor `¬φ`.
    pub fn curious(&self, phi: &Formula, t: Time) -> Result<bool, ReasoningError> {
        let view = self.until(t);
        if !view.is_well_formed() || !view.aware_of(phi) {
            return Ok(false);
        }
        view.undecided(phi)
    }

    /// Surprised at `t` about `φ`: `φ ∈ F|≤t`, `B|≤t` well-formed, and
    /// `(F|≤t-1, B_L|≤t, B_Δ|≤t)` believed `¬φ`.
    pub fn surprised(&self, phi: &Formula, t: Time) -> Result<bool, ReasoningError> {
        if !phi.is_until(t) || !self.facts.contains(phi) {
            return Ok(false);
        }
        if !self.until(t).is_well_formed() {
            return Ok(false);
        }
        let prior = self.restricted(t.checked_sub(1), Some(t), Some(t));
        prior.believes(&phi.negated())
    }

    /// The first suspense witness in search order, if any.
    pub fn suspense(
        &self,
        query: &FluentQuery,
        t: Time,
        search: &WitnessSearchConfig,
    ) -> Result<Option<SuspenseWitness>, ReasoningError> {
        let Some(candidates) = self.suspense_candidates(query, t, search)? else {
            return Ok(None);
        };
        candidates
            .par_iter()
            .map(|psi| self.check_witness(query, t, psi))
            .find_first(|r| !matches!(r, Ok(None)))
            .unwrap_or(Ok(None))
    }

    /// Every admissible witness within the search space, in search order.
    pub fn suspense_witnesses(
        &self,
        query: &FluentQuery,
        t: Time,
        search: &WitnessSearchConfig,
    ) -> Result<Vec<SuspenseWitness>, ReasoningError> {
        let Some(candidates) = self.suspense_candidates(query, t, search)? else {
            return Ok(Vec::new());
        };
        let checked: Result<Vec<_>, _> = candidates
            .par_iter()
            .map(|psi| self.check_witness(query, t, psi))
            .collect();
        Ok(checked?.into_iter().flatten().collect())
    }

    /// Check one candidate disclosure `ψ` against clauses 2 and 3 of suspense.
    pub fn check_witness(
        &self,
        query: &FluentQuery,
        t: Time,
        psi: &[Literal],
    ) -> Result<Option<SuspenseWitness>, ReasoningError> {
        let psi_formula = Formula::conjunction(psi.iter().map(Literal::to_formula));
        let past = self.facts.iter().filter(|f| f.is_until(t));
        if !is_consistent(
            past.chain(self.strict.iter())
                .chain(std::iter::once(&psi_formula)),
        ) {
            return Ok(None);
        }
        let told = self.with_fact(psi_formula.clone());
        let Some(mut q) = told.query(&Formula::Top)? else {
            return Ok(None);
        };
        for later in t + 1..=self.horizon {
            let target = query.instantiate(later);
            let polarity = if q.entails(&target) {
                Polarity::Holds
            } else if q.entails(&target.negated()) {
                Polarity::Fails
            } else {
                continue;
            };
            return Ok(Some(SuspenseWitness {
                psi: psi_formula,
                literals: psi.to_vec(),
                resolved_at: later,
                polarity,
            }));
        }
        Ok(None)
    }

    /// `None` when clause 1 (curiosity) fails.
    fn suspense_candidates(
        &self,
        query: &FluentQuery,
        t: Time,
        search: &WitnessSearchConfig,
    ) -> Result<Option<Vec<Vec<Literal>>>, ReasoningError> {
        if t >= self.horizon || !self.curious(&query.instantiate(t), t)? {
            return Ok(None);
        }
        // resolve B_Δ once so every B' shares it
        self.stratification()?;
        let names = self.until(t).aware_names();
        Ok(Some(witness_candidates(
            &names,
            t,
            self.horizon,
            search.max_conjuncts,
        )))
    }
}

/// Conjunctions of up to `max_size` literals over distinct atoms `v@t''` with
/// `v ∈ names` and `t < t'' ≤ horizon`, ordered by latest time index, then
/// size, then lexicographically.
pub fn witness_candidates(
    names: &BTreeSet<String>,
    t: Time,
    horizon: Time,
    max_size: usize,
) -> Vec<Vec<Literal>> {
    let atoms: Vec<TimedAtom> = names
        .iter()
        .flat_map(|n| (t + 1..=horizon).map(move |u| TimedAtom::new(n.clone(), u)))
        .collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    combine(&atoms, 0, max_size, &mut stack, &mut out);
    out.sort_by_cached_key(|c| {
        let latest = c.iter().map(|l: &Literal| l.atom.time).max().unwrap_or(0);
        let key: Vec<(TimedAtom, bool)> = c.iter().map(|l| (l.atom.clone(), !l.positive)).collect();
        (latest, c.len(), key)
    });
    out
}

fn combine(
    atoms: &[TimedAtom],
    from: usize,
    max_size: usize,
    stack: &mut Vec<Literal>,
    out: &mut Vec<Vec<Literal>>,
) {
    if stack.len() == max_size {
        return;
    }
    for i in from..atoms.len() {
        for positive in [true, false] {
            stack.push(Literal::new(atoms[i].clone(), positive));
            out.push(stack.clone());
            combine(atoms, i + 1, max_size, stack, out);
            stack.pop();
        }
    }
}

/// A formula over `V` with a symbolic time slot; bare names read as `name@t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentQuery {
    schema: Schema,
    horizon: Time,
}

impl FluentQuery {
    pub fn new(
        template: &str,
        names: Option<&BTreeSet<String>>,
        horizon: Time,
    ) -> Result<Self, ParseError> {
        let schema = Schema::formula(template, names)?;
        // every t in [0, N] must instantiate
        for t in 0..=horizon {
            schema.instantiate(t, horizon)?;
        }
        Ok(FluentQuery { schema, horizon })
    }

    pub fn template(&self) -> &str {
        self.schema.source()
    }

    pub fn instantiate(&self, t: Time) -> Formula {
        self.schema
            .instantiate(t, self.horizon)
            .expect("validated at construction")
    }
}

impl fmt::Display for FluentQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.schema.source())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessSearchConfig {
    /// Maximum number of literals in a candidate disclosure.
    pub max_conjuncts: usize,
}

impl Default for WitnessSearchConfig {
    fn default() -> Self {
        WitnessSearchConfig { max_conjuncts: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// `φ_{t'}` became entailed.
    Holds,
    /// `¬φ_{t'}` became entailed.
    Fails,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuspenseWitness {
    pub psi: Formula,
    pub literals: Vec<Literal>,
    pub resolved_at: Time,
    pub polarity: Polarity,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse, parse_rule_parts, Vocabulary};

    fn f(s: &str) -> Formula {
        parse(s, 2).unwrap()
    }

    fn rule(s: &str) -> DefaultRule {
        let (a, b) = parse_rule_parts(s, Vocabulary::horizon(2)).unwrap();
        DefaultRule::new(a, b).unwrap()
    }

    fn persistence(name: &str, horizon: Time) -> Vec<DefaultRule> {
        (0..horizon)
            .flat_map(|t| {
                [
                    rule(&format!("{name}@{t} ~> {name}@{}", t + 1)),
                    rule(&format!("!{name}@{t} ~> !{name}@{}", t + 1)),
                ]
            })
            .collect()
    }

    #[test]
    fn until_filters_by_latest_index() {
        let b = EpistemicState::new(
            vec![f("p@0"), f("p@2")],
            vec![f("p@0 -> q@1"), f("true")],
            persistence("p", 2),
            2,
        );
        let at0 = b.until(0);
        assert_eq!(at0.facts(), &[f("p@0")]);
        assert_eq!(at0.strict_rules(), &[f("true")]);
        assert!(at0.defaults().is_empty());
        assert_eq!(b.until(1).defaults().len(), 2);
        assert_eq!(b.until(2).facts().len(), 2);
        let before0 = b.strictly_before(0);
        assert!(before0.facts().is_empty());
        assert_eq!(before0.strict_rules(), &[f("true")]);
    }

    #[test]
    fn awareness_seed_and_closure() {
        let seed_only = EpistemicState::new(vec![f("p@0")], vec![], vec![], 2);
        assert_eq!(seed_only.aware_names(), ["p".to_string()].into());
        let closed = EpistemicState::new(
            vec![f("p@0")],
            vec![f("p@0 -> q@1"), f("r@0 | s@0")],
            vec![rule("q@0 ~> u@1")],
            2,
        );
        let names: Vec<String> = closed.aware_names().into_iter().collect();
        assert_eq!(names, ["p", "q", "u"]);
        assert!(closed.aware_of(&f("true")));
        assert!(!closed.aware_of(&f("r@0")));
        let empty = EpistemicState::new(vec![], vec![f("p@0 -> q@1")], vec![], 2);
        assert!(empty.aware_names().is_empty());
        assert!(!empty.aware_of(&f("p@0")));
    }

    #[test]
    fn inconsistent_knowledge_entails_nothing() {
        let b = EpistemicState::new(vec![f("p@0"), f("!p@0")], vec![], vec![], 2);
        assert!(!b.believes(&f("true")).unwrap());
        assert!(!b.believes(&f("p@0")).unwrap());
    }

    #[test]
    fn inconsistent_premise_entails_nothing() {
        let b = EpistemicState::new(vec![f("p@0")], vec![], persistence("p", 2), 2);
        assert!(!b.entails(&f("!p@0"), &f("true")).unwrap());
        assert!(b.entails(&f("true"), &f("p@2")).unwrap());
    }

    #[test]
    fn curiosity_needs_awareness_and_ignorance() {
        let b = EpistemicState::new(vec![f("p@0 | q@0")], vec![], vec![], 2);
        assert!(b.curious(&f("p@0"), 0).unwrap());
        assert!(!b.curious(&f("r@0"), 0).unwrap());
        let known = EpistemicState::new(vec![f("p@0")], vec![], vec![], 2);
        assert!(!known.curious(&f("p@0"), 0).unwrap());
    }

    #[test]
    fn surprise_against_persistence() {
        let b = EpistemicState::new(vec![f("!p@0"), f("p@1")], vec![], persistence("p", 2), 2);
        assert!(b.surprised(&f("p@1"), 1).unwrap());
        assert!(!b.surprised(&f("p@1"), 0).unwrap());
        assert!(!b.surprised(&f("p@2"), 2).unwrap());
        assert!(!b.surprised(&f("!p@0"), 0).unwrap());
    }

    #[test]
    fn candidate_order() {
        let names: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
        let cands = witness_candidates(&names, 0, 2, 2);
        // 4 atoms: 8 singletons + 6 pairs * 4 polarities
        assert_eq!(cands.len(), 8 + 24);
        let show = |c: &Vec<Literal>| {
            c.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" & ")
        };
        assert_eq!(show(&cands[0]), "a@1");
        assert_eq!(show(&cands[1]), "!a@1");
        assert_eq!(show(&cands[4]), "a@1 & b@1");
        assert!(cands.windows(2).all(|w| {
            let lt = |c: &Vec<Literal>| c.iter().map(|l| l.atom.time).max().unwrap();
            lt(&w[0]) <= lt(&w[1])
        }));
    }

    #[test]
    fn suspense_on_a_persistent_fluent() {
        // p is unknown at time 0; revealing p@1 settles p@1 and later points
        let b = EpistemicState::new(vec![f("p@0 | q@0")], vec![], persistence("p", 2), 2);
        let q = FluentQuery::new("p", None, 2).unwrap();
        let w = b
            .suspense(&q, 0, &WitnessSearchConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(w.psi, f("p@1"));
        assert_eq!(w.resolved_at, 1);
        assert_eq!(w.polarity, Polarity::Holds);
        assert!(b
            .suspense(&q, 2, &WitnessSearchConfig::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn fluent_query_must_fit_horizon() {
        assert!(FluentQuery::new("x@t+1", None, 2).is_err());
        assert_eq!(
            FluentQuery::new("!x", None, 2).unwrap().instantiate(1),
            f("!x@1")
        );
    }
}
