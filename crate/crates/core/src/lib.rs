//! Nonmonotonic reasoning over time-indexed propositional stories and the
//! narrative tension measures built on it: curiosity, suspense and surprise.

pub mod agent;
pub mod cnf;
pub mod defaults;
pub mod error;
pub mod formula;
pub mod lex;
pub mod metrics;
pub mod parse;
pub mod replay;
pub mod sat;
pub mod story;

pub use agent::{EpistemicState, FluentQuery, Polarity, SuspenseWitness, WitnessSearchConfig};
pub use defaults::{stratify, DeadRule, DefaultRule, StratifiedBase};
pub use error::ReasoningError;
pub use formula::{Formula, Literal, Time, TimedAtom};
pub use lex::{lex_entails, CardinalityVector, LexLimits, Subbase};
pub use metrics::{
    causal_graph, curiosity_intensity, surprise_intensity, suspense_intensity, CausalGraph,
    EdgeFilterConfig, MetricError, SuspenseProfile,
};
pub use parse::{parse, parse_formula, ParseError, Schema, Vocabulary};
pub use story::{load, Query, QueryKind, Story, StoryError, BOX_STORY};
