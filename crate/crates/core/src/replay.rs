//! Step-by-step replay of a story through the emotion detectors.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::agent::{EpistemicState, Polarity};
use crate::formula::Time;
use crate::metrics::{
    causal_graph, surprise_intensity, suspense_intensity, CausalGraph, EdgeFilterConfig,
};
use crate::story::{Query, QueryKind, Story};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionReport {
    pub schema_version: u32,
    pub title: Option<String>,
    pub horizon: Time,
    pub steps: Vec<StepSummary>,
    /// Ordered by query index, then step.
    pub records: Vec<QueryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSummary {
    pub step: Time,
    pub facts: Vec<String>,
    pub aware: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub psi: String,
    pub resolved_at: Time,
    pub polarity: Polarity,
}

/// One query evaluated on the state after step `step`, at time point `step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub query: usize,
    pub kind: QueryKind,
    pub template: String,
    pub step: Time,
    /// The query instantiated at this step.
    pub formula: String,
    /// `⊨ φ` on the state restricted to the step.
    pub entails: bool,
    pub entails_negation: bool,
    pub curious: bool,
    pub curiosity_intensity: Option<usize>,
    /// Only evaluated for suspense queries.
    pub suspense: Option<bool>,
    pub witness: Option<WitnessRecord>,
    pub suspense_intensity: Option<f64>,
    pub surprised: bool,
    pub surprise_intensity: Option<usize>,
    pub errors: Vec<String>,
}

impl EmotionReport {
    pub fn has_errors(&self) -> bool {
        self.records.iter().any(|r| !r.errors.is_empty())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `query,t,curiosity,suspense,surprise`; a cell is empty when the
    /// emotion is absent at that step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("query,t,curiosity,suspense,surprise\n");
        for r in &self.records {
            let cell = |v: Option<String>| v.unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.query,
                r.step,
                cell(r.curiosity_intensity.map(|c| c.to_string())),
                cell(r.suspense_intensity.map(|s| s.to_string())),
                cell(r.surprise_intensity.map(|s| s.to_string())),
            ));
        }
        out
    }
}

pub fn replay(story: &Story) -> EmotionReport {
    let states: Vec<EpistemicState> = (0..=story.horizon).map(|s| story.state_at(s)).collect();
    let graphs: Vec<CausalGraph> = states
        .par_iter()
        .map(|b| causal_graph(b, EdgeFilterConfig::default()))
        .collect();
    let steps = states
        .iter()
        .enumerate()
        .map(|(s, b)| StepSummary {
            step: s as Time,
            facts: b.facts().iter().map(ToString::to_string).collect(),
            aware: b.until(s as Time).aware_names(),
        })
        .collect();
    let records = story
        .queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| replay_query(story, i, q, &states, &graphs))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    EmotionReport {
        schema_version: SCHEMA_VERSION,
        title: story.title.clone(),
        horizon: story.horizon,
        steps,
        records,
    }
}

fn replay_query(
    story: &Story,
    index: usize,
    query: &Query,
    states: &[EpistemicState],
    graphs: &[CausalGraph],
) -> Vec<QueryRecord> {
    let mut onset: Option<(Time, usize)> = None;
    let mut out = Vec::with_capacity(states.len());
    for (s, state) in states.iter().enumerate() {
        let t = s as Time;
        let phi = query.fluent.instantiate(t);
        let mut rec = QueryRecord {
            query: index,
            kind: query.kind,
            template: query.fluent.template().to_string(),
            step: t,
            formula: phi.to_string(),
            entails: false,
            entails_negation: false,
            curious: false,
            curiosity_intensity: None,
            suspense: None,
            witness: None,
            suspense_intensity: None,
            surprised: false,
            surprise_intensity: None,
            errors: Vec::new(),
        };
        let view = state.until(t);
        match (view.believes(&phi), view.believes(&phi.negated())) {
            (Ok(p), Ok(n)) => {
                rec.entails = p;
                rec.entails_negation = n;
            }
            (Err(e), _) | (_, Err(e)) => rec.errors.push(e.to_string()),
        }
        match state.curious(&phi, t) {
            Ok(c) => {
                rec.curious = c;
                if c {
                    let level = graphs[s].degree_sum(&phi);
                    rec.curiosity_intensity = Some(level);
                    onset.get_or_insert((t, level));
                }
            }
            Err(e) => rec.errors.push(e.to_string()),
        }
        if query.kind == QueryKind::Suspense {
            match state.suspense(&query.fluent, t, &story.search) {
                Ok(w) => {
                    rec.suspense = Some(w.is_some());
                    rec.witness = w.map(|w| WitnessRecord {
                        psi: w.psi.to_string(),
                        resolved_at: w.resolved_at,
                        polarity: w.polarity,
                    });
                }
                Err(e) => rec.errors.push(e.to_string()),
            }
            if let (Some(true), Some((t0, c))) = (rec.suspense, onset) {
                match suspense_intensity(&story.profile, c as f64, f64::from(t0), f64::from(t)) {
                    Ok(v) => rec.suspense_intensity = Some(v),
                    Err(e) => rec.errors.push(e.to_string()),
                }
            }
        }
        match state.surprised(&phi, t) {
            Ok(true) => {
                rec.surprised = true;
                match surprise_intensity(state, &phi, t) {
                    Ok(v) => rec.surprise_intensity = Some(v),
                    Err(e) => rec.errors.push(e.to_string()),
                }
            }
            Ok(false) => {}
            Err(e) => rec.errors.push(e.to_string()),
        }
        out.push(rec);
    }
    out
}
