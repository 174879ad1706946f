use thiserror::Error;

/// Crate-wide error type. Variants carry enough context (indices, offending
/// values) to point at the exact row/column/symbol that failed validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty alphabet: {what}")]
    EmptyAlphabet { what: &'static str },

    #[error("dimension mismatch: {what} has {got} entries, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("transition matrix row {row} sums to {sum:.17} (must be 1 within 1e-12)")]
    RowNotStochastic { row: usize, sum: f64 },

    #[error("entry {value} at row {row}, column {col} of {what} is outside [0, 1]")]
    BadMatrixEntry {
        what: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("distribution entry {index} is {value} (must be finite and >= 0)")]
    BadMassEntry { index: usize, value: f64 },

    #[error("distribution sums to {sum:.17} (must be 1 within 1e-12)")]
    NotNormalized { sum: f64 },

    #[error("metric entry at row {row}, column {col} is NaN")]
    MetricNaN { row: usize, col: usize },

    #[error("metric column {col} has no finite entry over the prior's support")]
    MetricColumnUnsupported { col: usize },

    #[error("input symbol {index} is outside the prior's support")]
    SymbolOutsideSupport { index: usize },

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("threshold {value} outside [0, 1]")]
    ThresholdOutOfRange { value: f64 },

    #[error("rate {value} must be finite and >= 0")]
    BadRate { value: f64 },

    #[error("probability argument {value} outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    #[error("codebook size {value} must be >= 1")]
    BadCodebookSize { value: f64 },

    #[error("codebook size must be an integer, got {value}")]
    NonIntegerCodebookSize { value: f64 },

    #[error("rate point is inconsistent: |log M - R| = {gap:.3e} exceeds 1e-12")]
    InconsistentRatePoint { gap: f64 },

    #[error("significance level {value} outside [0, 1]")]
    SignificanceOutOfRange { value: f64 },

    #[error("hypothesis distributions live on mismatched ground sets ({p} vs {q} atoms)")]
    GroundSetMismatch { p: usize, q: usize },

    #[error("slope is undefined at P = 0")]
    SlopeUndefined,

    #[error("no symbol brackets the threshold at output {y} (degenerate prior)")]
    NoBracketingSymbol { y: usize },

    #[error("witness normalizer is zero: every selected row weight W(y|x_y) vanished")]
    DegenerateWitness,

    #[error("empty codebook")]
    EmptyCodebook,

    #[error("codeword {index} refers to unknown input symbol `{label}`")]
    UnknownCodewordLabel { index: usize, label: String },

    #[error("trial count must be >= 1")]
    NoTrials,

    #[error("quadrature step {value} must be finite and > 0")]
    BadStep { value: f64 },

    #[error("channel parameter out of range: {what} = {value}")]
    BadParameter { what: &'static str, value: f64 },

    #[error("blocklength must be >= 1")]
    BadBlocklength,

    #[error("rate grid must be non-empty, finite, non-negative and non-decreasing")]
    BadRateGrid,

    #[error("malformed input file {path}: {detail}")]
    MalformedFile { path: String, detail: String },

    #[error("io error on {path}: {detail}")]
    Io { path: String, detail: String },
}

pub type Result<T> = core::result::Result<T, Error>;
