use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by validation and by the numerical routines.
///
/// The `Display` strings of the validation variants are part of the CLI
/// contract (`NodesNotStrictlyIncreasing at index 1`, ...).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("EmptyInput")]
    EmptyInput,
    #[error("LengthMismatch: {nodes} nodes but {weights} weights")]
    LengthMismatch { nodes: usize, weights: usize },
    #[error("NonPositiveNode at index {index}")]
    NonPositiveNode { index: usize },
    #[error("NonPositiveWeight at index {index}")]
    NonPositiveWeight { index: usize },
    #[error("NodesNotStrictlyIncreasing at index {index}")]
    NodesNotStrictlyIncreasing { index: usize },
    #[error("NonFiniteValue at index {index}")]
    NonFiniteValue { index: usize },
    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Overflow: non-finite entry at ({row}, {col})")]
    Overflow { row: usize, col: usize },
    #[error("NotPositiveDefinite: pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error(
        "QuadratureNotConverged: doubling change {change:e}, truncation bound {truncation_bound:e} \
         with {panels} panels"
    )]
    QuadratureNotConverged {
        change: f64,
        truncation_bound: f64,
        panels: usize,
    },
    #[error("SignAnchorDegenerate: projection {projection:e} onto eigenvector {index}")]
    SignAnchorDegenerate { index: usize, projection: f64 },
    #[error("NoConvergence after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("ImageValidationFailed: {reason}")]
    ImageValidationFailed { reason: String },
    #[error("ResidualTooLarge: residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures that signal the working precision ran out rather
    /// than invalid input; retrying in a wider scalar mode may succeed.
    pub fn is_precision_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::SignAnchorDegenerate { .. }
                | Error::NoConvergence { .. }
                | Error::ImageValidationFailed { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::ResidualTooLarge { .. }
        )
    }

    /// True for errors caused by the caller's input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput
                | Error::LengthMismatch { .. }
                | Error::NonPositiveNode { .. }
                | Error::NonPositiveWeight { .. }
                | Error::NodesNotStrictlyIncreasing { .. }
                | Error::NonFiniteValue { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}
