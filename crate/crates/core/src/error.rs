use thiserror::Error;

/// Failures of the nonmonotonic machinery that callers must see rather than
/// have silently approximated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasoningError {
    #[error("inconsistent default base: none of {} remaining rules is tolerated ({})", remaining.len(), remaining.join("; "))]
    InconsistentDefaultBase { remaining: Vec<String> },
    #[error("lexicographic search retained more than {cap} partial subbases")]
    ExplosionLimit { cap: usize },
    #[error("query context is classically inconsistent")]
    InconsistentContext,
}
