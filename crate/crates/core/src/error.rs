//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`HmmError`]. Variants are
//! grouped by cause: malformed inputs (dimensions, distributions, symbols),
//! size guards on exponential or capacity-limited algorithms, and numerical
//! degeneracies detected while running.

use thiserror::Error;

/// Errors produced by model construction, inference, and scan execution.
#[derive(Debug, Error)]
pub enum HmmError {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A vector that must be a probability distribution is not.
    #[error("invalid distribution in {context}, row {index}: {reason}")]
    InvalidDistribution {
        context: &'static str,
        index: usize,
        reason: String,
    },

    /// An observation symbol lies outside the model alphabet.
    #[error("observation symbol {symbol} at step {step} is out of range for alphabet size {alphabet_size}")]
    SymbolOutOfRange {
        step: usize,
        symbol: usize,
        alphabet_size: usize,
    },

    /// An operation that requires at least one element received none.
    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },

    /// An entry that is negative, NaN, or infinite where only finite
    /// nonnegative weights are allowed.
    #[error("invalid entry in {context} at index {index}: must be finite and nonnegative")]
    InvalidEntry { context: &'static str, index: usize },

    /// Problem size exceeds the guard of an exponential-cost oracle.
    #[error("brute force size guard exceeded: {num_states}^{len} sequences > {limit}")]
    SizeGuardExceeded {
        num_states: usize,
        len: usize,
        limit: u64,
    },

    /// Sequence length exceeds the capacity cap of the path-carrying reduction.
    #[error("sequence length {len} exceeds path reduction capacity {cap}")]
    PathCapacityExceeded { len: usize, cap: usize },

    /// Every state has zero weight at some step: the observation sequence has
    /// probability zero under the model.
    #[error("impossible observations: all states have zero weight at step {step}")]
    ImpossibleObservations { step: usize },

    /// Forward-backward product vanished at some step, so the smoothing
    /// marginal there is undefined.
    #[error("degenerate marginal: forward-backward product is zero at step {step}")]
    DegenerateMarginal { step: usize },

    /// Independent per-step decoding produced a path whose weight falls short
    /// of the optimum, which can only happen when the maximiser is not unique.
    #[error(
        "ambiguous decoding: assembled path is {gap:e} below the optimum; \
         steps with tied maximisers: {tied_steps:?}"
    )]
    AmbiguousDecoding { gap: f64, tied_steps: Vec<usize> },

    /// A parameter outside its documented domain.
    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Underlying I/O failure while reading or writing a model file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON while reading a model file.
    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, HmmError>;
