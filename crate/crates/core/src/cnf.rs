//! Tseitin encoding of formulas into the CDCL solver, plus the classical
//! consistency and entailment tests built on it.

use std::collections::HashMap;

use crate::formula::{Formula, TimedAtom};
use crate::sat::{Lit, Solver, Var};

/// A solver together with the atom map and a cache of encoded subformulas.
///
/// Every subformula is given a definitional literal equivalent to it, so a
/// formula can be asserted, guarded by a selector, or assumed negated.
#[derive(Debug, Default)]
pub struct SatContext {
    solver: Solver,
    atoms: HashMap<TimedAtom, Var>,
    cache: HashMap<Formula, Lit>,
    top: Option<Lit>,
}

impl SatContext {
    pub fn new() -> Self {
        SatContext {
            solver: Solver::new(),
            ..Default::default()
        }
    }

    pub fn atom_var(&mut self, atom: &TimedAtom) -> Var {
        if let Some(v) = self.atoms.get(atom) {
            return *v;
        }
        let v = self.solver.new_var();
        self.atoms.insert(atom.clone(), v);
        v
    }

    fn top(&mut self) -> Lit {
        if let Some(t) = self.top {
            return t;
        }
        let t = Lit::positive(self.solver.new_var());
        self.solver.add_clause(&[t]);
        self.top = Some(t);
        t
    }

    /// A literal equivalent to `f`.
    pub fn literal(&mut self, f: &Formula) -> Lit {
        if let Some(l) = self.cache.get(f) {
            return *l;
        }
        let lit = match f {
            Formula::Top => self.top(),
            Formula::Bottom => !self.top(),
            Formula::Atom(a) => Lit::positive(self.atom_var(a)),
            Formula::Not(x) => !self.literal(x),
            Formula::And(a, b) => {
                let (a, b) = (self.literal(a), self.literal(b));
                let x = Lit::positive(self.solver.new_var());
                self.solver.add_clause(&[!x, a]);
                self.solver.add_clause(&[!x, b]);
                self.solver.add_clause(&[x, !a, !b]);
                x
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.literal(a), self.literal(b));
                self.disjunction(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.literal(a), self.literal(b));
                self.disjunction(!a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = (self.literal(a), self.literal(b));
                let x = Lit::positive(self.solver.new_var());
                self.solver.add_clause(&[!x, !a, b]);
                self.solver.add_clause(&[!x, a, !b]);
                self.solver.add_clause(&[x, a, b]);
                self.solver.add_clause(&[x, !a, !b]);
                x
            }
        };
        self.cache.insert(f.clone(), lit);
        lit
    }

    fn disjunction(&mut self, a: Lit, b: Lit) -> Lit {
        let x = Lit::positive(self.solver.new_var());
        self.solver.add_clause(&[!x, a, b]);
        self.solver.add_clause(&[x, !a]);
        self.solver.add_clause(&[x, !b]);
        x
    }

    /// Assert `f` at the root. Top-level conjunctions and disjunctions are
    /// split into clauses directly.
    pub fn assert(&mut self, f: &Formula) {
        match f {
            Formula::And(a, b) => {
                self.assert(a);
                self.assert(b);
            }
            Formula::Or(..) => {
                let mut parts = Vec::new();
                collect_disjuncts(f, &mut parts);
                let clause: Vec<Lit> = parts.into_iter().map(|p| self.literal(p)).collect();
                self.solver.add_clause(&clause);
            }
            _ => {
                let l = self.literal(f);
                self.solver.add_clause(&[l]);
            }
        }
    }

    /// A fresh selector `s` with `s -> f` asserted.
    pub fn guard(&mut self, f: &Formula) -> Lit {
        let s = Lit::positive(self.solver.new_var());
        let l = self.literal(f);
        self.solver.add_clause(&[!s, l]);
        s
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.solver.solve(assumptions)
    }

    /// Does the database together with `assumptions` classically entail `f`?
    pub fn entails_under(&mut self, assumptions: &[Lit], f: &Formula) -> bool {
        let l = self.literal(f);
        let mut all = assumptions.to_vec();
        all.push(!l);
        !self.solver.solve(&all)
    }

    /// Value of an atom in the last model, false for atoms never encoded.
    pub fn model_value(&self, atom: &TimedAtom) -> bool {
        self.atoms
            .get(atom)
            .is_some_and(|v| self.solver.model_value(*v))
    }
}

fn collect_disjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Or(a, b) => {
            collect_disjuncts(a, out);
            collect_disjuncts(b, out);
        }
        other => out.push(other),
    }
}

/// Is the conjunction of `formulas` satisfiable? The empty set is consistent.
pub fn is_consistent<'a, I>(formulas: I) -> bool
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut ctx = SatContext::new();
    for f in formulas {
        ctx.assert(f);
    }
    ctx.solve(&[])
}

/// Classical entailment: `premises ∪ {¬conclusion}` is unsatisfiable.
pub fn entails<'a, I>(premises: I, conclusion: &Formula) -> bool
where
    I: IntoIterator<Item = &'a Formula>,
{
    let mut ctx = SatContext::new();
    for f in premises {
        ctx.assert(f);
    }
    ctx.entails_under(&[], conclusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn f(s: &str) -> Formula {
        parse(s, 3).unwrap()
    }

    #[test]
    fn consistency_basics() {
        assert!(!is_consistent(&[f("a@0"), f("!a@0")]));
        assert!(is_consistent(&[]));
        assert!(is_consistent(&[f("a@0 | b@0"), f("!a@0")]));
        assert!(!is_consistent(&[f("false")]));
        assert!(is_consistent(&[f("true")]));
    }

    #[test]
    fn entailment_basics() {
        assert!(entails(&[f("a@0")], &f("a@0 | b@0")));
        assert!(!entails(&[], &f("a@0")));
        assert!(entails(&[], &f("a@0 | !a@0")));
        assert!(entails(&[f("false")], &f("a@0")));
    }

    #[test]
    fn frame_axiom_entailment() {
        // (¬visible₀ ∧ visible₁) → C₀ with ¬visible₀ and visible₁
        let premises = [
            f("!visible@0 & visible@1 -> C@0"),
            f("!visible@0"),
            f("visible@1"),
        ];
        assert!(entails(&premises, &f("C@0")));
    }

    #[test]
    fn iff_encoding() {
        assert!(entails(&[f("a@0 <-> b@0"), f("a@0")], &f("b@0")));
        assert!(entails(&[f("!(a@0 <-> b@0)"), f("a@0")], &f("!b@0")));
    }

    #[test]
    fn guards_are_optional() {
        let mut ctx = SatContext::new();
        ctx.assert(&f("a@0"));
        let s = ctx.guard(&f("!a@0"));
        assert!(ctx.solve(&[]));
        assert!(!ctx.solve(&[s]));
    }
}
