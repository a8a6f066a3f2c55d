//! Test support: truth-table oracles that share no code with the solver
//! stack, and seeded generators for random bases and stories.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use narrative_tension::{DefaultRule, EpistemicState, Formula, Time, TimedAtom};
use rand::seq::SliceRandom;
use rand::Rng;

/// Direct recursive evaluation, deliberately not `Formula::eval_with`.
pub fn eval(f: &Formula, world: &BTreeMap<TimedAtom, bool>) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Atom(a) => world[a],
        Formula::Not(x) => !eval(x, world),
        Formula::And(x, y) => eval(x, world) && eval(y, world),
        Formula::Or(x, y) => eval(x, world) || eval(y, world),
        Formula::Implies(x, y) => !eval(x, world) || eval(y, world),
        Formula::Iff(x, y) => eval(x, world) == eval(y, world),
    }
}

/// Every world over a fixed atom set, with formulas compiled to model masks.
pub struct TruthTable {
    worlds: Vec<BTreeMap<TimedAtom, bool>>,
}

pub type Mask = Vec<bool>;

impl TruthTable {
    pub fn new(atoms: &BTreeSet<TimedAtom>) -> Self {
        assert!(atoms.len() <= 16, "truth table too large");
        let atoms: Vec<&TimedAtom> = atoms.iter().collect();
        let worlds = (0u32..1 << atoms.len())
            .map(|bits| {
                atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| ((*a).clone(), bits >> i & 1 == 1))
                    .collect()
            })
            .collect();
        TruthTable { worlds }
    }

    pub fn over<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut atoms = BTreeSet::new();
        for f in formulas {
            atoms.extend(f.vars());
        }
        TruthTable::new(&atoms)
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn mask(&self, f: &Formula) -> Mask {
        self.worlds.iter().map(|w| eval(f, w)).collect()
    }

    pub fn all(&self) -> Mask {
        vec![true; self.worlds.len()]
    }
}

pub fn and(a: &Mask, b: &Mask) -> Mask {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

pub fn any(m: &Mask) -> bool {
    m.iter().any(|x| *x)
}

pub fn subset(a: &Mask, b: &Mask) -> bool {
    a.iter().zip(b).all(|(x, y)| !*x || *y)
}

fn material(r: &DefaultRule) -> Formula {
    Formula::or(Formula::not(r.antecedent().clone()), r.consequent().clone())
}

fn rule_atoms(rules: &[DefaultRule]) -> BTreeSet<TimedAtom> {
    rules.iter().flat_map(DefaultRule::vars).collect()
}

/// System Z by brute force. Indices into `rules`, most specific stratum first;
/// `None` when some round tolerates nothing.
pub fn oracle_stratify(rules: &[DefaultRule]) -> Option<Vec<Vec<usize>>> {
    let table = TruthTable::new(&rule_atoms(rules));
    let strs: Vec<Mask> = rules.iter().map(|r| table.mask(&material(r))).collect();
    let fire: Vec<Mask> = rules
        .iter()
        .map(|r| {
            table.mask(&Formula::And(
                Box::new(r.antecedent().clone()),
                Box::new(r.consequent().clone()),
            ))
        })
        .collect();
    let mut remaining: Vec<usize> = (0..rules.len()).collect();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let all_str = remaining
            .iter()
            .fold(table.all(), |m, &j| and(&m, &strs[j]));
        let (layer, rest): (Vec<usize>, Vec<usize>) = remaining.iter().partition(|&&i| {
            // tolerance by all of `remaining` minus i; i's own str holds wherever it fires
            any(&and(&fire[i], &all_str))
        });
        if layer.is_empty() {
            return None;
        }
        layers.push(layer);
        remaining = rest;
    }
    layers.reverse();
    Some(layers)
}

pub struct LexOracle {
    /// Each preferred subbase as a set of rule display strings.
    pub preferred: BTreeSet<BTreeSet<String>>,
    pub vector: Vec<usize>,
    table: TruthTable,
    models: Vec<Mask>,
}

impl LexOracle {
    /// Enumerate all `2^|Δ|` subbases. `None` when the context is unsatisfiable.
    pub fn new(
        strata: &[Vec<DefaultRule>],
        context: &[Formula],
        extra: &[Formula],
    ) -> Option<Self> {
        let rules: Vec<(usize, &DefaultRule)> = strata
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |r| (i, r)))
            .collect();
        assert!(rules.len() <= 16);
        let mut atoms: BTreeSet<TimedAtom> = rules.iter().flat_map(|(_, r)| r.vars()).collect();
        for f in context.iter().chain(extra) {
            atoms.extend(f.vars());
        }
        let table = TruthTable::new(&atoms);
        let ctx = context
            .iter()
            .fold(table.all(), |m, f| and(&m, &table.mask(f)));
        if !any(&ctx) {
            return None;
        }
        let strs: Vec<Mask> = rules
            .iter()
            .map(|(_, r)| table.mask(&material(r)))
            .collect();
        let mut best: Option<Vec<usize>> = None;
        let mut winners: Vec<(u32, Mask)> = Vec::new();
        for subset in 0u32..1 << rules.len() {
            let mut m = ctx.clone();
            for (j, s) in strs.iter().enumerate() {
                if subset >> j & 1 == 1 {
                    m = and(&m, s);
                }
            }
            if !any(&m) {
                continue;
            }
            let mut vector = vec![0; strata.len()];
            for (j, (i, _)) in rules.iter().enumerate() {
                if subset >> j & 1 == 1 {
                    vector[*i] += 1;
                }
            }
            match &best {
                Some(b) if vector < *b => {}
                Some(b) if vector == *b => winners.push((subset, m)),
                _ => {
                    best = Some(vector);
                    winners = vec![(subset, m)];
                }
            }
        }
        let preferred = winners
            .iter()
            .map(|(s, _)| {
                (0..rules.len())
                    .filter(|j| s >> j & 1 == 1)
                    .map(|j| rules[j].1.to_string())
                    .collect()
            })
            .collect();
        Some(LexOracle {
            preferred,
            vector: best.unwrap_or_default(),
            table,
            models: winners.into_iter().map(|(_, m)| m).collect(),
        })
    }

    pub fn entails(&self, f: &Formula) -> bool {
        let target = self.table.mask(f);
        self.models.iter().all(|m| subset(m, &target))
    }
}

pub fn names(n: usize) -> Vec<String> {
    ["a", "b", "c", "d", "e", "f"][..n]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

pub fn literal<R: Rng>(rng: &mut R, names: &[String], t: Time) -> Formula {
    let a = Formula::atom(names.choose(rng).unwrap().clone(), t);
    if rng.gen() {
        a
    } else {
        Formula::not(a)
    }
}

/// A random formula over `name@t` atoms with times in `times`.
pub fn formula<R: Rng>(rng: &mut R, names: &[String], times: &[Time], depth: u32) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 3) {
        return match rng.gen_range(0..12) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => Formula::atom(
                names.choose(rng).unwrap().clone(),
                *times.choose(rng).unwrap(),
            ),
        };
    }
    let sub = |rng: &mut R| formula(rng, names, times, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::iff(sub(rng), sub(rng)),
    }
}

/// Conjunction of one or two literals over distinct atoms.
pub fn small_conjunction<R: Rng>(rng: &mut R, names: &[String], times: &[Time]) -> Formula {
    let t = *times.choose(rng).unwrap();
    let first = literal(rng, names, t);
    if rng.gen_bool(0.5) {
        return first;
    }
    let t2 = *times.choose(rng).unwrap();
    let second = literal(rng, names, t2);
    if first.vars() == second.vars() {
        first
    } else {
        Formula::and(first, second)
    }
}

/// Up to `n_rules` distinct random default rules over a timeless vocabulary
/// (everything at time 0). Small vocabularies may yield fewer.
pub fn static_base<R: Rng>(rng: &mut R, n_names: usize, n_rules: usize) -> Vec<DefaultRule> {
    base_over(rng, n_names, &[0], n_rules)
}

pub fn base_over<R: Rng>(
    rng: &mut R,
    n_names: usize,
    times: &[Time],
    n_rules: usize,
) -> Vec<DefaultRule> {
    let names = names(n_names);
    let mut out = Vec::new();
    for _ in 0..n_rules * 20 {
        if out.len() == n_rules {
            break;
        }
        let a = small_conjunction(rng, &names, times);
        let b = if rng.gen_bool(0.8) {
            let t = *times.choose(rng).unwrap();
            literal(rng, &names, t)
        } else {
            small_conjunction(rng, &names, times)
        };
        if let Ok(r) = DefaultRule::new(a, b) {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

/// Random small story: persistence defaults on some fluents, random
/// transition defaults, a little strict knowledge and a few facts.
pub fn story<R: Rng>(
    rng: &mut R,
    max_names: usize,
    max_horizon: Time,
    max_defaults: usize,
) -> EpistemicState {
    let names = names(rng.gen_range(1..=max_names));
    let horizon = rng.gen_range(1..=max_horizon);
    let times: Vec<Time> = (0..=horizon).collect();
    let mut defaults = Vec::new();
    for v in &names {
        if defaults.len() + 2 * horizon as usize > max_defaults || rng.gen_bool(0.4) {
            continue;
        }
        for t in 0..horizon {
            for positive in [true, false] {
                let lit = |u| {
                    let a = Formula::atom(v.clone(), u);
                    if positive {
                        a
                    } else {
                        Formula::not(a)
                    }
                };
                defaults.push(DefaultRule::new(lit(t), lit(t + 1)).unwrap());
            }
        }
    }
    let extra = rng.gen_range(0..=4usize).min(max_defaults - defaults.len());
    for _ in 0..extra {
        let t = rng.gen_range(0..horizon);
        let a = small_conjunction(rng, &names, &[t]);
        let b = literal(rng, &names, t + 1);
        if let Ok(r) = DefaultRule::new(a, b) {
            defaults.push(r);
        }
    }
    let strict = (0..rng.gen_range(0..=1))
        .map(|_| {
            let t = rng.gen_range(0..horizon);
            Formula::implies(literal(rng, &names, t), literal(rng, &names, t + 1))
        })
        .collect();
    let facts = if rng.gen_bool(0.2) {
        Vec::new()
    } else {
        (0..rng.gen_range(1..=3))
            .map(|_| {
                if rng.gen_bool(0.75) {
                    let t = *times.choose(rng).unwrap();
                    literal(rng, &names, t)
                } else {
                    formula(rng, &names, &times, 2)
                }
            })
            .collect()
    };
    EpistemicState::new(facts, strict, defaults, horizon)
}

/// Every `name@t` atom of a state's vocabulary.
pub fn vocabulary(b: &EpistemicState) -> BTreeSet<TimedAtom> {
    let mut names: BTreeSet<String> = b
        .facts()
        .iter()
        .chain(b.strict_rules())
        .flat_map(Formula::names)
        .collect();
    names.extend(b.defaults().iter().flat_map(DefaultRule::names));
    names
        .into_iter()
        .flat_map(|n| (0..=b.horizon()).map(move |t| TimedAtom::new(n.clone(), t)))
        .collect()
}

/// The box story's rules with the given facts, e.g. `&["!box@0", "box@1"]`.
pub fn box_state(facts: &[&str]) -> EpistemicState {
    let story = narrative_tension::Story::box_story();
    let parsed: Vec<Formula> = facts
        .iter()
        .map(|f| narrative_tension::parse(f, story.horizon).unwrap())
        .collect();
    story.state_with(parsed)
}

pub fn atom(name: &str, t: Time) -> TimedAtom {
    TimedAtom::new(name, t)
}

/// The hand-drawn graph of the box state restricted to time 1: all twelve
/// atoms at times 0 and 1 and the eight arcs of the drawing.
pub fn drawn_graph() -> narrative_tension::CausalGraph {
    let nodes = ["A", "E", "C", "box", "empty", "visible"]
        .iter()
        .flat_map(|n| [atom(n, 0), atom(n, 1)]);
    let edges = [
        ("A", "box"),
        ("E", "box"),
        ("empty", "visible"),
        ("box", "box"),
        ("empty", "empty"),
        ("visible", "visible"),
        ("box", "visible"),
        ("C", "visible"),
    ]
    .map(|(a, b)| (atom(a, 0), atom(b, 1)));
    narrative_tension::CausalGraph::from_parts(nodes, edges)
}
