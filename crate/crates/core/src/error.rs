//! Crate-wide error type.
//!
//! Variants carry stable kebab-case tags (the first token of each message) so
//! callers and the command-line layer can match on failures without parsing
//! free-form prose. The one exception is [`Error::DefinitionFailed`], which
//! prefixes the failing definition's label and delegates its tag to the
//! wrapped error.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A loan history with no observations was passed to the trigger logic.
    #[error("empty-series: loan {loan_id} has no observed months")]
    EmptySeries { loan_id: String },

    /// The simulation window cannot support the 12-month macro lead-in.
    #[error("window-too-short: window spans {months} months, need at least 13")]
    WindowTooShort { months: usize },

    /// A subsample was requested that is larger than the panel itself.
    #[error("target-exceeds-population: target {target} rows, panel has {population}")]
    TargetExceedsPopulation { target: usize, population: usize },

    /// Two rate series share no months.
    #[error("no-overlap: rate series have no common months")]
    NoOverlap,

    /// All outcome labels are identical; a classifier cannot be fitted.
    #[error("degenerate-outcome: all {n} outcome labels are {value}")]
    DegenerateOutcome { n: usize, value: u8 },

    /// A design-matrix entry or score is NaN or infinite.
    #[error("non-finite-input: {what}")]
    NonFiniteInput { what: String },

    /// Labels for a ranking metric contain only one class.
    #[error("degenerate-labels: need both positive and negative labels")]
    DegenerateLabels,

    /// No loan contributes the minimum number of scores for a spread measure.
    #[error("insufficient-histories: no loan has {min} or more predictions")]
    InsufficientHistories { min: usize },

    /// The observed information matrix could not be inverted.
    #[error("singular-information: observed information is not positive definite")]
    SingularInformation,

    /// A series operation needs more observations than were supplied.
    #[error("series-too-short: need at least {min} points, got {got}")]
    SeriesTooShort { min: usize, got: usize },

    /// The post-crisis marker lies beyond the end of the series.
    #[error("post-crisis-out-of-range: {start} is after the last series month {end}")]
    PostCrisisOutOfRange { start: String, end: String },

    /// A model was applied to data built under a different feature schema.
    #[error("schema-mismatch: model schema {model:#x} != panel schema {panel:#x}")]
    SchemaMismatch { model: u64, panel: u64 },

    /// A schema names a feature the engineering layer cannot compute.
    #[error("unknown-feature: {name}")]
    UnknownFeature { name: String },

    /// An operation that needs rows received an empty panel.
    #[error("empty-panel: {what}")]
    EmptyPanel { what: String },

    /// Inference was requested on a model that did not converge.
    #[error("not-converged: model stopped at {iterations} iterations without converging")]
    NotConverged { iterations: usize },

    /// Catch-all contract violation for scalar parameters.
    #[error("invalid-parameter: {what}")]
    InvalidParameter { what: String },

    /// A component failure during the evaluation of one definition; carries
    /// the definition label so batched runs can attribute the failure.
    #[error("definition {label}: {source}")]
    DefinitionFailed {
        label: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable machine-readable tag (the leading token of the display form).
    pub fn tag(&self) -> &'static str {
        match self {
            Error::EmptySeries { .. } => "empty-series",
            Error::WindowTooShort { .. } => "window-too-short",
            Error::TargetExceedsPopulation { .. } => "target-exceeds-population",
            Error::NoOverlap => "no-overlap",
            Error::DegenerateOutcome { .. } => "degenerate-outcome",
            Error::NonFiniteInput { .. } => "non-finite-input",
            Error::DegenerateLabels => "degenerate-labels",
            Error::InsufficientHistories { .. } => "insufficient-histories",
            Error::SingularInformation => "singular-information",
            Error::SeriesTooShort { .. } => "series-too-short",
            Error::PostCrisisOutOfRange { .. } => "post-crisis-out-of-range",
            Error::SchemaMismatch { .. } => "schema-mismatch",
            Error::UnknownFeature { .. } => "unknown-feature",
            Error::EmptyPanel { .. } => "empty-panel",
            Error::NotConverged { .. } => "not-converged",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::DefinitionFailed { source, .. } => source.tag(),
        }
    }

    /// Wrap a component error with the definition label it occurred under.
    pub fn for_definition(self, label: &str) -> Self {
        Error::DefinitionFailed { label: label.to_string(), source: Box::new(self) }
    }
}
