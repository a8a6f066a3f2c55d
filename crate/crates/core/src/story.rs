//! Story files: a TOML document holding the vocabulary, rules, facts with
//! their reveal steps, and the queries to replay.
//!
//! ```toml
//! horizon = 3
//! variables = ["box", "A"]
//! persist = ["box"]
//!
//! [[default]]
//! rule = "A@t & !box@t ~> box@t+1"
//!
//! [[cwa]]
//! fluent = "box"
//! trigger = "A"
//!
//! [[fact]]
//! formula = "box@1"
//! reveal = 1
//!
//! [[query]]
//! kind = "surprise"
//! formula = "box@1"
//! ```
//!
//! Rules and strict formulas may use `@t`, `@t+k` and `@t-k`; they expand
//! over every admissible `t`, or over the inclusive `over = [from, to]`
//! range when given.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{EpistemicState, FluentQuery, WitnessSearchConfig};
use crate::defaults::DefaultRule;
use crate::formula::{is_identifier, Formula, Time};
use crate::metrics::SuspenseProfile;
use crate::parse::{ParseError, Schema};

pub const BOX_STORY: &str = include_str!("../stories/box.story");

#[derive(Debug, Error)]
pub enum StoryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{field}: {source}")]
    Formula { field: String, source: ParseError },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> StoryError {
    StoryError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStory {
    title: Option<String>,
    horizon: Option<Time>,
    variables: Option<Vec<String>>,
    #[serde(default)]
    persist: Vec<String>,
    #[serde(default, rename = "default")]
    defaults: Vec<RawDefault>,
    #[serde(default)]
    cwa: Vec<RawCwa>,
    #[serde(default)]
    strict: Vec<RawStrict>,
    #[serde(default, rename = "fact")]
    facts: Vec<RawFact>,
    #[serde(default, rename = "query")]
    queries: Vec<RawQuery>,
    profile: Option<SuspenseProfile>,
    search: Option<RawSearch>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefault {
    rule: String,
    over: Option<[Time; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCwa {
    fluent: String,
    trigger: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrict {
    formula: String,
    over: Option<[Time; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFact {
    formula: String,
    reveal: Time,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    kind: QueryKind,
    formula: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    max_conjuncts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Curiosity,
    Suspense,
    Surprise,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::Curiosity => "curiosity",
            QueryKind::Suspense => "suspense",
            QueryKind::Surprise => "surprise",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub formula: Formula,
    /// The step at which the listener is told.
    pub reveal: Time,
}

#[derive(Debug, Clone)]
pub struct Query {
    pub kind: QueryKind,
    pub fluent: FluentQuery,
}

/// A validated story.
#[derive(Debug, Clone)]
pub struct Story {
    pub title: Option<String>,
    pub horizon: Time,
    pub variables: BTreeSet<String>,
    pub defaults: Vec<DefaultRule>,
    /// Strict formulas, CWA axioms included.
    pub strict: Vec<Formula>,
    pub cwa_axioms: usize,
    pub facts: Vec<Fact>,
    pub queries: Vec<Query>,
    pub profile: SuspenseProfile,
    pub search: WitnessSearchConfig,
    rules_only: EpistemicState,
}

pub fn load(path: impl AsRef<Path>) -> Result<Story, StoryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| StoryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Story::from_toml(&text)
}

fn times_for(
    schema: &Schema,
    over: Option<[Time; 2]>,
    horizon: Time,
    field: &str,
) -> Result<Vec<Time>, StoryError> {
    let admissible = schema.admissible_times(horizon);
    match over {
        None if schema.is_schematic() || !admissible.is_empty() => Ok(admissible),
        None => Err(invalid(field, format!("time index outside [0, {horizon}]"))),
        Some([from, to]) => {
            if from > to {
                return Err(invalid(format!("{field}.over"), "range is empty"));
            }
            if !schema.is_schematic() {
                return Err(invalid(
                    format!("{field}.over"),
                    "formula has no `@t` index to expand",
                ));
            }
            if let Some(t) = (from..=to).find(|t| !admissible.contains(t)) {
                return Err(invalid(
                    format!("{field}.over"),
                    format!("instance t={t} falls outside [0, {horizon}]"),
                ));
            }
            Ok((from..=to).collect())
        }
    }
}

impl Story {
    pub fn from_toml(text: &str) -> Result<Story, StoryError> {
        if text.trim().is_empty() {
            return Err(invalid("<file>", "story is empty"));
        }
        let raw: RawStory = toml::from_str(text)?;
        let horizon = raw.horizon.ok_or_else(|| invalid("horizon", "missing"))?;
        let declared = raw
            .variables
            .ok_or_else(|| invalid("variables", "missing"))?;
        let mut variables = BTreeSet::new();
        for (i, v) in declared.iter().enumerate() {
            if !is_identifier(v) || v == "t" || v == "true" || v == "false" {
                return Err(invalid(
                    format!("variables[{i}]"),
                    format!("`{v}` is not a usable name"),
                ));
            }
            if !variables.insert(v.clone()) {
                return Err(invalid(
                    format!("variables[{i}]"),
                    format!("`{v}` declared twice"),
                ));
            }
        }
        let names = &variables;
        let formula_err = |field: String| move |source| StoryError::Formula { field, source };

        let mut defaults = Vec::new();
        for (i, v) in raw.persist.iter().enumerate() {
            if !names.contains(v) {
                return Err(invalid(
                    format!("persist[{i}]"),
                    format!("unknown variable `{v}`"),
                ));
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
                    defaults
                        .push(DefaultRule::new(lit(t), lit(t + 1)).expect("literal antecedent"));
                }
            }
        }
        for (i, d) in raw.defaults.iter().enumerate() {
            let field = format!("default[{i}].rule");
            let schema = Schema::rule(&d.rule, Some(names)).map_err(formula_err(field.clone()))?;
            for t in times_for(&schema, d.over, horizon, &field)? {
                let (a, b) = schema
                    .instantiate_rule(t, horizon)
                    .map_err(formula_err(field.clone()))?;
                defaults.push(DefaultRule::new(a, b).map_err(|e| invalid(&field, e.to_string()))?);
            }
        }

        let mut strict = Vec::new();
        for (i, c) in raw.cwa.iter().enumerate() {
            if !names.contains(&c.fluent) {
                return Err(invalid(
                    format!("cwa[{i}].fluent"),
                    format!("unknown variable `{}`", c.fluent),
                ));
            }
            let field = format!("cwa[{i}].trigger");
            let trigger =
                Schema::formula(&c.trigger, Some(names)).map_err(formula_err(field.clone()))?;
            for t in 0..horizon {
                let cause = trigger
                    .instantiate(t, horizon)
                    .map_err(formula_err(field.clone()))?;
                let change = Formula::and(
                    Formula::not(Formula::atom(c.fluent.clone(), t)),
                    Formula::atom(c.fluent.clone(), t + 1),
                );
                strict.push(Formula::implies(change, cause));
            }
        }
        let cwa_axioms = strict.len();
        for (i, s) in raw.strict.iter().enumerate() {
            let field = format!("strict[{i}].formula");
            let schema =
                Schema::formula(&s.formula, Some(names)).map_err(formula_err(field.clone()))?;
            for t in times_for(&schema, s.over, horizon, &field)? {
                strict.push(
                    schema
                        .instantiate(t, horizon)
                        .map_err(formula_err(field.clone()))?,
                );
            }
        }

        let mut facts = Vec::new();
        for (i, f) in raw.facts.iter().enumerate() {
            let field = format!("fact[{i}]");
            if f.reveal > horizon {
                return Err(invalid(
                    format!("{field}.reveal"),
                    format!("step {} exceeds horizon {horizon}", f.reveal),
                ));
            }
            let formula = crate::parse::parse_formula(
                &f.formula,
                crate::parse::Vocabulary::new(horizon, names),
            )
            .map_err(formula_err(format!("{field}.formula")))?;
            facts.push(Fact {
                formula,
                reveal: f.reveal,
            });
        }

        let mut queries = Vec::new();
        for (i, q) in raw.queries.iter().enumerate() {
            let fluent = FluentQuery::new(&q.formula, Some(names), horizon)
                .map_err(formula_err(format!("query[{i}].formula")))?;
            queries.push(Query {
                kind: q.kind,
                fluent,
            });
        }

        let profile = raw.profile.unwrap_or_default();
        profile
            .validate()
            .map_err(|e| invalid("profile", e.to_string()))?;
        let search = match raw.search {
            Some(RawSearch { max_conjuncts: 0 }) => {
                return Err(invalid("search.max_conjuncts", "must be at least 1"))
            }
            Some(s) => WitnessSearchConfig {
                max_conjuncts: s.max_conjuncts,
            },
            None => WitnessSearchConfig::default(),
        };

        let rules_only = EpistemicState::new(Vec::new(), strict.clone(), defaults.clone(), horizon);
        Ok(Story {
            title: raw.title,
            horizon,
            variables,
            defaults,
            strict,
            cwa_axioms,
            facts,
            queries,
            profile,
            search,
            rules_only,
        })
    }

    pub fn box_story() -> Story {
        Story::from_toml(BOX_STORY).expect("bundled story is valid")
    }

    /// The listener after step `step`: every fact revealed at or before it.
    pub fn state_at(&self, step: Time) -> EpistemicState {
        self.facts
            .iter()
            .filter(|f| f.reveal <= step)
            .fold(self.rules_only.clone(), |s, f| {
                s.with_fact(f.formula.clone())
            })
    }

    /// Everything the story ever tells.
    pub fn full_state(&self) -> EpistemicState {
        self.state_at(self.horizon)
    }

    /// The rules with an arbitrary fact set; shares the cached stratification.
    pub fn state_with(&self, facts: impl IntoIterator<Item = Formula>) -> EpistemicState {
        facts
            .into_iter()
            .fold(self.rules_only.clone(), |s, f| s.with_fact(f))
    }
}
