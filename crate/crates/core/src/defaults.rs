//! Default rules `α ~> β`, their material counterparts, tolerance and
//! System Z stratification.

use std::collections::HashSet;
use std::fmt;

use log::warn;
use thiserror::Error;

use crate::cnf::{is_consistent, SatContext};
use crate::error::ReasoningError;
use crate::formula::{Formula, Time, TimedAtom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("default rule `{rule}` has an unsatisfiable antecedent and can never fire")]
pub struct DeadRule {
    pub rule: String,
}

/// "When the antecedent holds, the consequent is more plausible than its negation."
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DefaultRule {
    antecedent: Formula,
    consequent: Formula,
}

impl DefaultRule {
    pub fn new(antecedent: Formula, consequent: Formula) -> Result<Self, DeadRule> {
        let rule = DefaultRule {
            antecedent,
            consequent,
        };
        if !is_consistent([&rule.antecedent]) {
            return Err(DeadRule {
                rule: rule.to_string(),
            });
        }
        Ok(rule)
    }

    pub fn antecedent(&self) -> &Formula {
        &self.antecedent
    }

    pub fn consequent(&self) -> &Formula {
        &self.consequent
    }

    /// The material counterpart `¬α ∨ β`.
    pub fn strict(&self) -> Formula {
        Formula::or(self.antecedent.negated(), self.consequent.clone())
    }

    pub fn vars(&self) -> std::collections::BTreeSet<TimedAtom> {
        let mut v = self.antecedent.vars();
        v.extend(self.consequent.vars());
        v
    }

    pub fn names(&self) -> std::collections::BTreeSet<String> {
        let mut n = self.antecedent.names();
        n.extend(self.consequent.names());
        n
    }

    pub fn is_until(&self, t: Time) -> bool {
        self.antecedent.is_until(t) && self.consequent.is_until(t)
    }

    pub fn is_variable_free(&self) -> bool {
        self.antecedent.is_variable_free() && self.consequent.is_variable_free()
    }

    /// The antecedent and consequent both hold.
    pub fn firing(&self) -> Formula {
        Formula::and(self.antecedent.clone(), self.consequent.clone())
    }
}

impl fmt::Display for DefaultRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~> {}", self.antecedent, self.consequent)
    }
}

/// `str(rules)`: the material implications of a rule set.
pub fn strict(rules: &[DefaultRule]) -> Vec<Formula> {
    rules.iter().map(DefaultRule::strict).collect()
}

/// Is `rule` tolerated by `others`, i.e. is `α ∧ β ∧ ⋀ str(others)` satisfiable?
pub fn tolerated(rule: &DefaultRule, others: &[DefaultRule]) -> bool {
    let firing = rule.firing();
    let strict = strict(others);
    is_consistent(std::iter::once(&firing).chain(strict.iter()))
}

/// A default base split into specificity strata. `strata()[0]` is the most
/// specific stratum Δ₁, the last one the least specific Δₙ.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StratifiedBase {
    strata: Vec<Vec<DefaultRule>>,
}

impl StratifiedBase {
    /// Wrap precomputed strata, most specific first. No tolerance check.
    pub fn from_strata(strata: Vec<Vec<DefaultRule>>) -> Self {
        StratifiedBase { strata }
    }

    pub fn n(&self) -> usize {
        self.strata.len()
    }

    pub fn strata(&self) -> &[Vec<DefaultRule>] {
        &self.strata
    }

    /// Stratum Δᵢ, 1-based.
    pub fn stratum(&self, i: usize) -> &[DefaultRule] {
        &self.strata[i - 1]
    }

    pub fn len(&self) -> usize {
        self.strata.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rules in flat order (Δ₁ first), each with its 0-based stratum index.
    pub fn flat(&self) -> Vec<(usize, &DefaultRule)> {
        self.strata
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |r| (i, r)))
            .collect()
    }

    /// Every rule of Δᵢ is tolerated by `(Δ₁ ∪ … ∪ Δᵢ) \ {r}`, i.e. by the rules
    /// still present when its layer was peeled.
    pub fn check_tolerance(&self) -> bool {
        (0..self.n()).all(|i| {
            let tail: Vec<DefaultRule> = self.strata[..=i].iter().flatten().cloned().collect();
            self.strata[i].iter().all(|r| {
                let others: Vec<DefaultRule> = tail.iter().filter(|o| *o != r).cloned().collect();
                tolerated(r, &others)
            })
        })
    }
}

/// Collapse structurally equal rules, keeping first occurrence.
pub fn dedup_rules(rules: &[DefaultRule]) -> Vec<DefaultRule> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(rules.len());
    for r in rules {
        if seen.insert(r.to_string()) {
            out.push(r.clone());
        } else {
            warn!("duplicate default rule `{r}` collapsed");
        }
    }
    out
}

/// System Z: repeatedly peel off the rules tolerated by everything that
/// remains. The first layer peeled is the least specific, so the layers are
/// reversed at the end to put the most specific stratum first.
pub fn stratify(rules: &[DefaultRule]) -> Result<StratifiedBase, ReasoningError> {
    let rules = dedup_rules(rules);
    let mut ctx = SatContext::new();
    let selectors: Vec<_> = rules.iter().map(|r| ctx.guard(&r.strict())).collect();
    let firings: Vec<_> = rules.iter().map(|r| ctx.literal(&r.firing())).collect();

    let mut remaining: Vec<usize> = (0..rules.len()).collect();
    let mut layers: Vec<Vec<DefaultRule>> = Vec::new();
    while !remaining.is_empty() {
        let active: Vec<_> = remaining.iter().map(|&i| selectors[i]).collect();
        let (layer, rest): (Vec<usize>, Vec<usize>) = remaining.iter().partition(|&&i| {
            let mut assumptions = active.clone();
            assumptions.push(firings[i]);
            ctx.solve(&assumptions)
        });
        if layer.is_empty() {
            return Err(ReasoningError::InconsistentDefaultBase {
                remaining: rest.iter().map(|&i| rules[i].to_string()).collect(),
            });
        }
        layers.push(layer.into_iter().map(|i| rules[i].clone()).collect());
        remaining = rest;
    }
    layers.reverse();
    Ok(StratifiedBase { strata: layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_rule_parts, Vocabulary};

    fn rule(s: &str) -> DefaultRule {
        let (a, b) = parse_rule_parts(s, Vocabulary::horizon(3)).unwrap();
        DefaultRule::new(a, b).unwrap()
    }

    #[test]
    fn strict_translation() {
        assert_eq!(
            rule("!box@0 ~> !box@1").strict().to_string(),
            "(box@0 | !box@1)"
        );
        assert!(strict(&[]).is_empty());
        let s: Vec<String> = strict(&[rule("a@0 ~> b@0"), rule("b@0 ~> c@0")])
            .iter()
            .map(|f| f.to_string())
            .collect();
        assert_eq!(s, ["(!a@0 | b@0)", "(!b@0 | c@0)"]);
    }

    #[test]
    fn dead_rules_are_rejected() {
        let (a, b) = parse_rule_parts("false ~> a@0", Vocabulary::horizon(3)).unwrap();
        assert!(DefaultRule::new(a, b).is_err());
        let (a, b) = parse_rule_parts("a@0 & !a@0 ~> b@0", Vocabulary::horizon(3)).unwrap();
        assert!(DefaultRule::new(a, b).is_err());
    }

    #[test]
    fn tolerance() {
        assert!(tolerated(&rule("a@0 ~> b@0"), &[]));
        let r = rule("C@0 & !visible@0 ~> visible@1");
        let exc = rule("C@0 & !visible@0 & empty@0 ~> !visible@1");
        assert!(tolerated(&r, std::slice::from_ref(&exc)));
        assert!(!tolerated(&exc, &[r]));
    }

    #[test]
    fn empty_base_has_no_strata() {
        let s = stratify(&[]).unwrap();
        assert_eq!(s.n(), 0);
        assert!(s.is_empty());
    }

    #[test]
    fn contradictory_pair_is_inconsistent() {
        let rs = [rule("a@0 ~> b@0"), rule("a@0 ~> !b@0")];
        assert!(!tolerated(&rs[0], &rs[1..]));
        assert!(!tolerated(&rs[1], &rs[..1]));
        let err = stratify(&rs).unwrap_err();
        assert!(
            matches!(err, ReasoningError::InconsistentDefaultBase { ref remaining } if remaining.len() == 2)
        );
    }

    #[test]
    fn penguin_style_specificity() {
        let rs = [rule("b@0 ~> f@0"), rule("p@0 ~> b@0"), rule("p@0 ~> !f@0")];
        let s = stratify(&rs).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.stratum(2), &[rs[0].clone()]);
        assert_eq!(s.stratum(1).len(), 2);
        assert!(s.check_tolerance());
    }

    #[test]
    fn duplicates_collapse() {
        let rs = [rule("a@0 ~> b@0"), rule("a@0 ~> b@0")];
        assert_eq!(stratify(&rs).unwrap().len(), 1);
    }
}
