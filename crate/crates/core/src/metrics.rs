//! Causal graphs over timed atoms and the curiosity, suspense and surprise
//! intensity measures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::EpistemicState;
use crate::cnf::SatContext;
use crate::error::ReasoningError;
use crate::formula::{Formula, Time, TimedAtom};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("node {0} is not in the causal graph")]
    NodeAbsent(TimedAtom),
    #[error("agent is not curious about {formula} at {time}")]
    NotCurious { formula: String, time: Time },
    #[error("agent is not surprised about {formula} at {time}")]
    NotSurprised { formula: String, time: Time },
    #[error("no default rule is violated by {0}")]
    NoViolatedRule(String),
    #[error("invalid suspense profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Reasoning(#[from] ReasoningError),
}

/// Which strict-rule edges to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFilterConfig {
    /// Drop premises inconsistent with `F ∪ B_L` and targets it already entails.
    pub non_vacuous: bool,
    /// Keep only edges from an earlier to a strictly later time point.
    pub forward_only: bool,
}

impl Default for EdgeFilterConfig {
    fn default() -> Self {
        EdgeFilterConfig {
            non_vacuous: true,
            forward_only: true,
        }
    }
}

impl EdgeFilterConfig {
    /// The unfiltered edge definition.
    pub fn raw() -> Self {
        EdgeFilterConfig {
            non_vacuous: false,
            forward_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CausalGraph {
    nodes: BTreeSet<TimedAtom>,
    edges: BTreeSet<(TimedAtom, TimedAtom)>,
}

impl CausalGraph {
    /// Build from explicit parts; self-loops are dropped and edge endpoints
    /// are added as nodes.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = TimedAtom>,
        edges: impl IntoIterator<Item = (TimedAtom, TimedAtom)>,
    ) -> Self {
        let mut g = CausalGraph {
            nodes: nodes.into_iter().collect(),
            edges: BTreeSet::new(),
        };
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, from: TimedAtom, to: TimedAtom) {
        if from == to {
            return;
        }
        self.nodes.insert(from.clone());
        self.nodes.insert(to.clone());
        self.edges.insert((from, to));
    }

    pub fn nodes(&self) -> &BTreeSet<TimedAtom> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(TimedAtom, TimedAtom)> {
        &self.edges
    }

    /// In-degree plus out-degree.
    pub fn degree(&self, v: &TimedAtom) -> Result<usize, MetricError> {
        if !self.nodes.contains(v) {
            return Err(MetricError::NodeAbsent(v.clone()));
        }
        Ok(self.edges.iter().filter(|(a, b)| a == v || b == v).count())
    }

    /// Sum of degrees over the atoms of `φ`; atoms outside the graph count 0.
    pub fn degree_sum(&self, phi: &Formula) -> usize {
        phi.vars().iter().map(|v| self.degree(v).unwrap_or(0)).sum()
    }

    pub fn is_subgraph_of(&self, other: &CausalGraph) -> bool {
        self.nodes.is_subset(&other.nodes) && self.edges.is_subset(&other.edges)
    }

    /// Graphviz text with nodes named `name_t` and edges in lexicographic order.
    pub fn to_dot(&self) -> String {
        let mut nodes: Vec<String> = self.nodes.iter().map(TimedAtom::label).collect();
        nodes.sort();
        let mut edges: Vec<(String, String)> = self
            .edges
            .iter()
            .map(|(a, b)| (a.label(), b.label()))
            .collect();
        edges.sort();
        let mut out = String::from("digraph causal {\n");
        for n in nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for (a, b) in edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

/// The causal graph induced by an epistemic state.
pub fn causal_graph(state: &EpistemicState, filter: EdgeFilterConfig) -> CausalGraph {
    let mut g = CausalGraph::default();
    for f in state.facts().iter().chain(state.strict_rules()) {
        g.nodes.extend(f.vars());
    }
    for r in state.defaults() {
        g.nodes.extend(r.vars());
        let sources = r.antecedent().vars();
        let targets = r.consequent().vars();
        for a in &sources {
            for b in &targets {
                g.add_edge(a.clone(), b.clone());
            }
        }
    }

    let mut ctx = SatContext::new();
    for f in state.knowledge() {
        ctx.assert(&f);
    }
    let nodes: Vec<TimedAtom> = g.nodes.iter().cloned().collect();
    // per node: (literal, premise consistent, literal already entailed) for both polarities
    let mut lits = Vec::with_capacity(nodes.len());
    for v in &nodes {
        let mut pair = Vec::with_capacity(2);
        for positive in [true, false] {
            let f = if positive {
                Formula::Atom(v.clone())
            } else {
                Formula::not(Formula::Atom(v.clone()))
            };
            let l = ctx.literal(&f);
            let consistent = ctx.solve(&[l]);
            let known = ctx.entails_under(&[], &f);
            pair.push((f, l, consistent, known));
        }
        lits.push(pair);
    }
    for (i, v) in nodes.iter().enumerate() {
        for (j, w) in nodes.iter().enumerate() {
            if i == j || (filter.forward_only && v.time >= w.time) {
                continue;
            }
            let linked = lits[i].iter().any(|(_, l, consistent, _)| {
                if filter.non_vacuous && !consistent {
                    return false;
                }
                lits[j].iter().any(|(target, _, _, known)| {
                    if filter.non_vacuous && *known {
                        return false;
                    }
                    ctx.entails_under(&[*l], target)
                })
            });
            if linked {
                g.add_edge(v.clone(), w.clone());
            }
        }
    }
    g
}

/// `c_B(φ, t)` against a given graph, which should be the graph of the full
/// state rather than of `B|≤t`.
pub fn curiosity_intensity(
    state: &EpistemicState,
    phi: &Formula,
    t: Time,
    graph: &CausalGraph,
) -> Result<usize, MetricError> {
    if !state.curious(phi, t)? {
        return Err(MetricError::NotCurious {
            formula: phi.to_string(),
            time: t,
        });
    }
    Ok(graph.degree_sum(phi))
}

/// Rise, plateau and descent durations with the peak intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuspenseProfile {
    pub rise: f64,
    pub plateau: f64,
    pub descent: f64,
    pub peak: f64,
}

impl SuspenseProfile {
    pub fn new(rise: f64, plateau: f64, descent: f64, peak: f64) -> Result<Self, MetricError> {
        let p = SuspenseProfile {
            rise,
            plateau,
            descent,
            peak,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        let bad = |m: &str| Err(MetricError::InvalidProfile(m.to_string()));
        if !(self.rise > 0.0 && self.rise.is_finite()) {
            return bad("rise must be positive");
        }
        if !(self.descent > 0.0 && self.descent.is_finite()) {
            return bad("descent must be positive");
        }
        if !(self.plateau >= 0.0 && self.plateau.is_finite()) {
            return bad("plateau must be non-negative");
        }
        if !(self.peak >= 0.0 && self.peak.is_finite()) {
            return bad("peak must be non-negative");
        }
        Ok(())
    }
}

impl Default for SuspenseProfile {
    fn default() -> Self {
        SuspenseProfile {
            rise: 6.0,
            plateau: 6.0,
            descent: 3.0,
            peak: 10.0,
        }
    }
}

/// Trapezoidal suspense curve starting at curiosity level `c` at `onset`.
pub fn suspense_intensity(
    profile: &SuspenseProfile,
    c: f64,
    onset: f64,
    t: f64,
) -> Result<f64, MetricError> {
    profile.validate()?;
    if c.is_nan() || c < 0.0 {
        return Err(MetricError::InvalidProfile(
            "curiosity level must be non-negative".into(),
        ));
    }
    let SuspenseProfile {
        rise,
        plateau,
        descent,
        peak,
    } = *profile;
    let d = t - onset;
    Ok(if d < 0.0 {
        0.0
    } else if d <= rise {
        (peak - c) / rise * d + c
    } else if d <= rise + plateau {
        peak
    } else if d <= rise + plateau + descent {
        -peak / descent * (d - rise - plateau) + peak
    } else {
        0.0
    })
}

/// `surp_B(φ, t) = n - i` for the most specific stratum `i` holding a rule
/// `α ~> β` with `{φ ∧ α} ∪ F ∪ B_L` consistent and entailing `¬β`.
pub fn surprise_intensity(
    state: &EpistemicState,
    phi: &Formula,
    t: Time,
) -> Result<usize, MetricError> {
    if !state.surprised(phi, t)? {
        return Err(MetricError::NotSurprised {
            formula: phi.to_string(),
            time: t,
        });
    }
    let base = state.stratification()?;
    let n = base.n();
    let mut ctx = SatContext::new();
    for f in state.knowledge() {
        ctx.assert(&f);
    }
    for (i, stratum) in base.strata().iter().enumerate() {
        for rule in stratum {
            let premise = ctx.literal(&Formula::and(phi.clone(), rule.antecedent().clone()));
            if ctx.solve(&[premise]) && ctx.entails_under(&[premise], &rule.consequent().negated())
            {
                return Ok(n - (i + 1));
            }
        }
    }
    Err(MetricError::NoViolatedRule(phi.to_string()))
}

/// Degree table, handy for reports.
pub fn degrees(g: &CausalGraph) -> BTreeMap<TimedAtom, usize> {
    g.nodes()
        .iter()
        .map(|v| (v.clone(), g.degree(v).unwrap_or(0)))
        .collect()
}
