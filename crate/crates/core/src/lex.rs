//! Lexicographic inference over a stratified default base.
//!
//! A subbase `A` is preferred to `B` when, scanning strata from the most
//! specific one, the first stratum where they keep a different number of
//! rules favours `A`. Inference is skeptical: a conclusion must follow from
//! every preferred subbase consistent with the query context, so the whole
//! family is enumerated.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::cnf::SatContext;
use crate::defaults::{DefaultRule, StratifiedBase};
use crate::error::ReasoningError;
use crate::formula::Formula;
use crate::sat::Lit;

pub const DEFAULT_PARTIAL_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexLimits {
    /// Maximum number of partial selections retained after any stratum.
    pub max_partials: usize,
}

impl Default for LexLimits {
    fn default() -> Self {
        LexLimits {
            max_partials: DEFAULT_PARTIAL_CAP,
        }
    }
}

/// Per-stratum rule counts `[|A₁|, …, |Aₙ|]`. The derived order is the
/// lexicographic preference: `Greater` means preferred.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CardinalityVector(pub Vec<usize>);

/// A subset of a stratified base, as sorted flat rule indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subbase {
    members: Vec<usize>,
}

impl Subbase {
    pub fn from_indices(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Subbase { members }
    }

    /// Every rule of `base`.
    pub fn full(base: &StratifiedBase) -> Self {
        Subbase {
            members: (0..base.len()).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn cardinalities(&self, base: &StratifiedBase) -> CardinalityVector {
        let flat = base.flat();
        let mut counts = vec![0; base.n()];
        for &i in &self.members {
            counts[flat[i].0] += 1;
        }
        CardinalityVector(counts)
    }

    pub fn rules<'b>(&self, base: &'b StratifiedBase) -> Vec<&'b DefaultRule> {
        let flat = base.flat();
        self.members.iter().map(|&i| flat[i].1).collect()
    }

    /// Flat indices of `base` not in this subbase.
    pub fn dropped(&self, base: &StratifiedBase) -> Vec<usize> {
        (0..base.len()).filter(|i| !self.contains(*i)).collect()
    }
}

/// Compare two subbases of `base`: `Greater` iff `a` is lex-preferred to `b`.
pub fn lex_compare(a: &Subbase, b: &Subbase, base: &StratifiedBase) -> Ordering {
    a.cardinalities(base).cmp(&b.cardinalities(base))
}

/// All lex-preferred context-consistent subbases; they share one vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbaseFamily {
    members: Vec<Subbase>,
    vector: CardinalityVector,
}

impl SubbaseFamily {
    pub fn members(&self) -> &[Subbase] {
        &self.members
    }

    pub fn vector(&self) -> &CardinalityVector {
        &self.vector
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// One query context compiled against one base: the preferred family plus a
/// solver that answers entailment questions against it.
pub struct LexQuery {
    ctx: SatContext,
    selectors: Vec<Lit>,
    family: SubbaseFamily,
}

impl LexQuery {
    pub fn new(
        base: &StratifiedBase,
        context: &[Formula],
        limits: LexLimits,
    ) -> Result<Self, ReasoningError> {
        let mut ctx = SatContext::new();
        for f in context {
            ctx.assert(f);
        }
        if !ctx.solve(&[]) {
            return Err(ReasoningError::InconsistentContext);
        }
        let flat = base.flat();
        let selectors: Vec<Lit> = flat.iter().map(|(_, r)| ctx.guard(&r.strict())).collect();

        let mut search = Search {
            ctx: &mut ctx,
            selectors: &selectors,
            memo: HashMap::new(),
        };
        let mut partials: Vec<Vec<usize>> = vec![Vec::new()];
        let mut vector = Vec::with_capacity(base.n());
        let mut offset = 0;
        for stratum in base.strata() {
            let ids: Vec<usize> = (offset..offset + stratum.len()).collect();
            offset += stratum.len();
            let mut layer = Layer {
                ids: &ids,
                best: 0,
                found: Vec::new(),
            };
            for p in &partials {
                let mut chosen = p.clone();
                search.extend(&mut layer, p.len(), 0, &mut chosen);
            }
            if layer.found.len() > limits.max_partials {
                return Err(ReasoningError::ExplosionLimit {
                    cap: limits.max_partials,
                });
            }
            vector.push(layer.best);
            partials = layer.found;
        }

        let members = partials.into_iter().map(Subbase::from_indices).collect();
        Ok(LexQuery {
            ctx,
            selectors,
            family: SubbaseFamily {
                members,
                vector: CardinalityVector(vector),
            },
        })
    }

    pub fn family(&self) -> &SubbaseFamily {
        &self.family
    }

    pub fn into_family(self) -> SubbaseFamily {
        self.family
    }

    /// `str(A) ∪ context ⊨ f` for every preferred `A`.
    pub fn entails(&mut self, f: &Formula) -> bool {
        let members = self.family.members.clone();
        members.iter().all(|m| {
            let assumptions: Vec<Lit> = m.indices().iter().map(|&i| self.selectors[i]).collect();
            self.ctx.entails_under(&assumptions, f)
        })
    }
}

struct Search<'a> {
    ctx: &'a mut SatContext,
    selectors: &'a [Lit],
    memo: HashMap<Vec<usize>, bool>,
}

struct Layer<'a> {
    ids: &'a [usize],
    best: usize,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn consistent(&mut self, selection: &[usize]) -> bool {
        let mut key = selection.to_vec();
        key.sort_unstable();
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let assumptions: Vec<Lit> = key.iter().map(|&i| self.selectors[i]).collect();
        let v = self.ctx.solve(&assumptions);
        self.memo.insert(key, v);
        v
    }

    /// Include-first depth-first search over one stratum, keeping every
    /// consistent extension of maximum size seen so far.
    fn extend(
        &mut self,
        layer: &mut Layer<'_>,
        base_len: usize,
        pos: usize,
        chosen: &mut Vec<usize>,
    ) {
        let picked = chosen.len() - base_len;
        let remaining = layer.ids.len() - pos;
        if picked + remaining < layer.best {
            return;
        }
        if pos == layer.ids.len() {
            if picked > layer.best {
                layer.best = picked;
                layer.found.clear();
            }
            layer.found.push(chosen.clone());
            return;
        }
        chosen.push(layer.ids[pos]);
        if self.consistent(chosen) {
            self.extend(layer, base_len, pos + 1, chosen);
        }
        chosen.pop();
        self.extend(layer, base_len, pos + 1, chosen);
    }
}

/// Every lex-preferred subbase `A` with `str(A) ∪ context` consistent.
pub fn lex_preferred_subbases(
    base: &StratifiedBase,
    context: &[Formula],
    limits: LexLimits,
) -> Result<SubbaseFamily, ReasoningError> {
    LexQuery::new(base, context, limits).map(LexQuery::into_family)
}

/// `premises ⊨_Δ conclusion`: false when the premises are inconsistent.
pub fn lex_entails_from(
    base: &StratifiedBase,
    premises: &[Formula],
    conclusion: &Formula,
    limits: LexLimits,
) -> Result<bool, ReasoningError> {
    match LexQuery::new(base, premises, limits) {
        Ok(mut q) => Ok(q.entails(conclusion)),
        Err(ReasoningError::InconsistentContext) => Ok(false),
        Err(e) => Err(e),
    }
}

/// `α ⊨_Δ β`.
pub fn lex_entails(
    base: &StratifiedBase,
    alpha: &Formula,
    beta: &Formula,
    limits: LexLimits,
) -> Result<bool, ReasoningError> {
    lex_entails_from(base, std::slice::from_ref(alpha), beta, limits)
}
