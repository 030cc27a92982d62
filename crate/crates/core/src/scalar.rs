//! The real-number abstraction all numerical code is written against.

use std::fmt::{self, Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dd::{self, DoubleDouble};

/// Which concrete arithmetic a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    /// Native IEEE binary64.
    F64,
    /// Software double-double, about 31 significant decimal digits.
    Dd,
}

impl Display for ScalarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarMode::F64 => "f64",
            ScalarMode::Dd => "dd",
        })
    }
}

impl FromStr for ScalarMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f64" => Ok(ScalarMode::F64),
            "dd" => Ok(ScalarMode::Dd),
            other => Err(format!(
                "unknown scalar mode `{other}` (expected f64 or dd)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal number `{input}`")]
pub struct ParseScalarError {
    input: String,
}

impl ParseScalarError {
    pub(crate) fn new(input: &str) -> Self {
        Self {
            input: input.to_string(),
        }
    }
}

/// A real scalar closed under `+ - * /`, `sqrt` and `exp`.
pub trait Scalar:
    Copy
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
{
    const MODE: ScalarMode;

    /// Unit roundoff scale of the representation ("ulp-scale").
    fn epsilon() -> Self;

    fn of(x: f64) -> Self;

    /// Nearest `f64`.
    fn as_f64(self) -> f64;

    fn sqrt(self) -> Self;

    fn exp(self) -> Self;

    fn abs(self) -> Self;

    fn is_finite(self) -> bool;

    /// Parses a decimal string at full working precision.
    fn parse_decimal(s: &str) -> Result<Self, ParseScalarError>;

    /// Writes a decimal string that parses back to this mode's precision.
    fn to_decimal(self) -> String;

    /// False for zero, negatives and NaN.
    fn is_positive(self) -> bool {
        self > Self::zero()
    }

    fn from_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::F64;

    fn epsilon() -> Self {
        f64::EPSILON
    }

    fn of(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn parse_decimal(s: &str) -> Result<Self, ParseScalarError> {
        let t = s.trim();
        // Rust also accepts "inf"/"nan" spellings, which are not decimals.
        if !t.bytes().any(|b| b.is_ascii_digit())
            || t.bytes()
                .any(|b| b.is_ascii_alphabetic() && b != b'e' && b != b'E')
        {
            return Err(ParseScalarError::new(s));
        }
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(ParseScalarError::new(s)),
        }
    }

    fn to_decimal(self) -> String {
        let a = self.abs();
        if a == 0.0 || (1e-6..1e21).contains(&a) || !self.is_finite() {
            format!("{self}")
        } else {
            format!("{self:e}")
        }
    }
}

impl Scalar for DoubleDouble {
    const MODE: ScalarMode = ScalarMode::Dd;

    fn epsilon() -> Self {
        DoubleDouble::from_f64(dd::DD_EPSILON)
    }

    fn of(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }

    fn as_f64(self) -> f64 {
        self.to_f64()
    }

    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }

    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }

    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }

    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }

    fn parse_decimal(s: &str) -> Result<Self, ParseScalarError> {
        DoubleDouble::parse_decimal(s)
    }

    fn to_decimal(self) -> String {
        DoubleDouble::to_decimal(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f64_decimal_forms() {
        assert_eq!(0.75f64.to_decimal(), "0.75");
        assert_eq!(3.0f64.to_decimal(), "3");
        assert_eq!(1e-20f64.to_decimal(), "1e-20");
        assert!(f64::parse_decimal("inf").is_err());
        assert!(f64::parse_decimal("NaN").is_err());
        assert_eq!(f64::parse_decimal(" 2.5e1 ").unwrap(), 25.0);
    }

    #[test]
    fn mode_parses() {
        assert_eq!("dd".parse::<ScalarMode>().unwrap(), ScalarMode::Dd);
        assert_eq!("f64".parse::<ScalarMode>().unwrap(), ScalarMode::F64);
        assert!("f32".parse::<ScalarMode>().is_err());
    }

    fn ops<T: Scalar>(x: f64, y: f64) -> [f64; 6] {
        let (a, b) = (T::of(x), T::of(y));
        [
            (a + b).as_f64(),
            (a - b).as_f64(),
            (a * b).as_f64(),
            (a / b).as_f64(),
            a.sqrt().as_f64(),
            (-a / T::of(4.0)).exp().as_f64(),
        ]
    }

    proptest! {
        #[test]
        fn f64_roundtrips(x in -1e300f64..1e300) {
            prop_assert_eq!(f64::parse_decimal(&x.to_decimal()).unwrap(), x);
        }

        #[test]
        fn dd_roundtrips(mant in 1.0f64..10.0, e in -200i32..200, frac in -0.49f64..0.49) {
            let hi = mant * 10f64.powi(e);
            let x = DoubleDouble::new(hi, frac * hi * f64::EPSILON);
            let back = DoubleDouble::parse_decimal(&x.to_decimal()).unwrap();
            let rel = ((back - x) / x).abs().to_f64();
            prop_assert!(rel <= 8.0 * dd::DD_EPSILON, "{x:?} -> {back:?}");
        }

        #[test]
        fn dd_agrees_with_f64_after_rounding(x in 1e-3f64..1e3, y in 1e-3f64..1e3) {
            let native = ops::<f64>(x, y);
            let wide = ops::<DoubleDouble>(x, y);
            for (n, w) in native.iter().zip(wide.iter()) {
                let scale = n.abs().max(w.abs()).max(f64::MIN_POSITIVE);
                // Each native op is correctly rounded except exp (about 1 ulp).
                prop_assert!((n - w).abs() <= 2.0 * f64::EPSILON * scale, "{n} vs {w}");
            }
        }
    }
}
