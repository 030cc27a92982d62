//! Exit statuses and the error type handed back to `main`.

use std::fmt;
use std::path::Path;

use cauchy_omega::{Error, ScalarMode, VerificationReport};

/// Process exit status. The numeric values are part of the CLI contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Io = 1,
    Validation = 2,
    Inconclusive = 3,
    Failed = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Failed beats inconclusive beats pass.
    pub fn of_report(report: &VerificationReport) -> Self {
        if report.any_failed() {
            Status::Failed
        } else if report.any_inconclusive() {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    status: Status,
    message: String,
}

impl CliError {
    pub fn new(status: Status, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: &std::io::Error) -> Self {
        Self::new(Status::Io, format!("{}: {err}", path.display()))
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Status::Validation, message)
    }

    /// Maps a library error onto the exit-code contract. Precision
    /// exhaustion in f64 carries a hint to rerun in double-double.
    pub fn from_core(err: Error, mode: ScalarMode) -> Self {
        if err.is_validation() || matches!(err, Error::Overflow { .. }) {
            return Self::validation(err.to_string());
        }
        match err {
            Error::ResidualTooLarge { .. } => Self::new(Status::Failed, err.to_string()),
            e if e.is_precision_exhaustion() && mode == ScalarMode::F64 => Self::new(
                Status::Inconclusive,
                format!("{e}; precision exhausted in f64, retry with --mode dd"),
            ),
            e => Self::new(Status::Inconclusive, e.to_string()),
        }
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn exit_code(&self) -> i32 {
        self.status.code()
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[cfg(test)]
mod tests {
    use super::*;
    use cauchy_omega::Check;

    #[test]
    fn core_errors_follow_the_contract() {
        let e = CliError::from_core(
            Error::NodesNotStrictlyIncreasing { index: 1 },
            ScalarMode::F64,
        );
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.message(), "NodesNotStrictlyIncreasing at index 1");

        let e = CliError::from_core(Error::NoConvergence { sweeps: 50 }, ScalarMode::F64);
        assert_eq!(e.exit_code(), 3);
        assert!(e.message().contains("--mode dd"));
        let e = CliError::from_core(Error::NoConvergence { sweeps: 50 }, ScalarMode::Dd);
        assert!(!e.message().contains("--mode dd"));

        let e = CliError::from_core(
            Error::ResidualTooLarge {
                residual: 1.0,
                tolerance: 0.5,
            },
            ScalarMode::F64,
        );
        assert_eq!(e.exit_code(), 4);
        let e = CliError::from_core(Error::Overflow { row: 0, col: 1 }, ScalarMode::Dd);
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn failure_outranks_inconclusive() {
        let mut r = VerificationReport::new();
        r.push(Check::compare("a", 0.0, 1.0));
        assert_eq!(Status::of_report(&r), Status::Pass);
        r.push(Check::inconclusive("b", "rank deficit"));
        assert_eq!(Status::of_report(&r), Status::Inconclusive);
        r.push(Check::compare("c", 2.0, 1.0));
        assert_eq!(Status::of_report(&r), Status::Failed);
    }
}
