use std::fmt;
use std::str::FromStr;

use cauchy_omega::{ScalarMode, Tolerances};

use crate::exit::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: ScalarMode,
    /// Multiplier on every default tolerance; always positive.
    pub tol_scale: f64,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: ScalarMode::F64,
            tol_scale: 1.0,
            seed: 0,
            format: OutputFormat::Json,
        }
    }
}

impl RunConfig {
    pub fn new(
        mode: ScalarMode,
        tol_scale: f64,
        seed: u64,
        format: OutputFormat,
    ) -> Result<Self, CliError> {
        if !(tol_scale.is_finite() && tol_scale > 0.0) {
            return Err(CliError::validation(format!(
                "--tol-scale must be a positive number, got {tol_scale}"
            )));
        }
        Ok(Self {
            mode,
            tol_scale,
            seed,
            format,
        })
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances::new(self.tol_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.mode, ScalarMode::F64);
        assert_eq!(c.tol_scale, 1.0);
        assert_eq!(c.format, OutputFormat::Json);
    }

    #[test]
    fn tolerance_scale_must_be_positive() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let e = RunConfig::new(ScalarMode::F64, bad, 0, OutputFormat::Json).unwrap_err();
            assert_eq!(e.exit_code(), 2);
        }
        assert!(RunConfig::new(ScalarMode::Dd, 10.0, 7, OutputFormat::Csv).is_ok());
    }

    #[test]
    fn format_parses() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert!("xml".parse::<OutputFormat>().is_err());
    }
}
