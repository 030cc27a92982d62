//! Verification reports and the tolerance policy behind them.

use serde::Serialize;

use crate::scalar::{Scalar, ScalarMode};

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The working precision cannot decide the check; retry in a wider mode.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub detail: Option<String>,
}

impl Check {
    /// Passes iff `residual <= tolerance` (a NaN residual fails).
    pub fn compare(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            residual,
            tolerance,
            status,
            detail: None,
        }
    }

    pub fn inconclusive(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            residual: f64::NAN,
            tolerance: f64::NAN,
            status: CheckStatus::Inconclusive,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

/// Named checks; `overall` is the conjunction of their `passed` flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    pub fn overall(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Fail)
    }

    pub fn any_inconclusive(&self) -> bool {
        self.checks
            .iter()
            .any(|c| c.status == CheckStatus::Inconclusive)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Factor applied to binary64 thresholds in double-double: twelve more
/// digits, out of the roughly fifteen the format adds, so errors that grow
/// like `ε·cond` still pass for much worse conditioning than in f64.
pub const DD_TIGHTENING: f64 = 1e-12;

/// Tolerance policy. Identities that hold exactly up to rounding get a fixed
/// multiple of the unit roundoff ([`Tolerances::ulps`]); the others get a
/// relative threshold stated for binary64 and tightened by [`DD_TIGHTENING`]
/// in double-double ([`Tolerances::relative`]), multiplied by the condition
/// number `κ = b_N/b_1` where the identity degrades with it
/// ([`Tolerances::conditioned`]). Every tolerance is multiplied by `scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl Tolerances {
    pub fn new(scale: f64) -> Self {
        assert!(scale > 0.0, "tolerance scale must be positive");
        Self { scale }
    }

    /// `multiple` units of roundoff in mode `T`.
    pub fn ulps<T: Scalar>(&self, multiple: f64) -> f64 {
        self.scale * multiple * T::epsilon().as_f64()
    }

    /// `at_f64` in binary64, `at_f64·DD_TIGHTENING` in double-double.
    pub fn relative<T: Scalar>(&self, at_f64: f64) -> f64 {
        let factor = match T::MODE {
            ScalarMode::F64 => 1.0,
            ScalarMode::Dd => DD_TIGHTENING,
        };
        self.scale * at_f64 * factor
    }

    /// `relative(at_f64)·max(κ, 1)`.
    pub fn conditioned<T: Scalar>(&self, at_f64: f64, kappa: f64) -> f64 {
        self.relative::<T>(at_f64) * kappa.max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::{DoubleDouble, DD_EPSILON};

    #[test]
    fn overall_is_conjunction() {
        let mut r = VerificationReport::new();
        assert!(r.overall());
        r.push(Check::compare("a", 1.0, 2.0));
        assert!(r.overall());
        r.push(Check::compare("b", 3.0, 2.0));
        assert!(!r.overall());
        assert!(r.any_failed() && !r.any_inconclusive());
    }

    #[test]
    fn nan_residual_fails() {
        assert_eq!(Check::compare("x", f64::NAN, 1.0).status, CheckStatus::Fail);
    }

    #[test]
    fn tolerances_follow_the_mode() {
        let tol = Tolerances::default();
        assert_eq!(tol.relative::<f64>(1e-8), 1e-8);
        assert_eq!(tol.conditioned::<f64>(1e-10, 0.5), 1e-10);
        assert_eq!(tol.relative::<DoubleDouble>(1e-8), 1e-8 * 1e-12);
        assert_eq!(Tolerances::new(10.0).ulps::<f64>(1.0), 10.0 * f64::EPSILON);
        assert_eq!(
            Tolerances::default().ulps::<DoubleDouble>(2.0),
            2.0 * DD_EPSILON
        );
    }
}
