//! Double-double arithmetic: a real stored as the unevaluated sum `hi + lo`
//! of two `f64`s with `|lo| <= ulp(hi) / 2`, giving about 106 bits of
//! significand.
//!
//! The error-free transformations follow the classic Dekker/Knuth scheme and
//! do not rely on a hardware FMA, so results are bit-identical across targets.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::scalar::ParseScalarError;

/// A double-double number.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// 2^-104, the conventional unit roundoff bound for double-double.
pub const DD_EPSILON: f64 = 4.930_380_657_631_324e-32;

/// Number of significant decimal digits written by the formatter.
const DECIMAL_DIGITS: usize = 34;
/// Shortest rounding `to_decimal` tries before falling back to the full width.
const SHORT_DIGITS: usize = 31;

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// Builds a value from two components, renormalizing them.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub const fn hi(self) -> f64 {
        self.hi
    }

    pub const fn lo(self) -> f64 {
        self.lo
    }

    /// Rounds to the nearest `f64`.
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    fn add_f64(self, b: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, b);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    fn sqr(self) -> Self {
        let (p1, p2) = two_prod(self.hi, self.hi);
        let p2 = p2 + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    /// Multiplies by `2^k` exactly (barring overflow and underflow).
    fn ldexp(self, k: i32) -> Self {
        // Two steps so that 2^k itself never overflows for |k| <= 2046.
        let half = k / 2;
        let f1 = 2f64.powi(half);
        let f2 = 2f64.powi(k - half);
        Self {
            hi: self.hi * f1 * f2,
            lo: self.lo * f1 * f2,
        }
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Self::ZERO;
        }
        if self.hi < 0.0 {
            return Self::from_f64(f64::NAN);
        }
        // Karp's trick: one Newton correction on top of the f64 reciprocal root.
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let diff = (self - Self::from_f64(ax).sqr()).hi;
        let (hi, lo) = two_sum(ax, diff * x * 0.5);
        Self { hi, lo }
    }

    pub fn exp(self) -> Self {
        const REDUCTION_BITS: i32 = 9;
        if self.hi > 709.78 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-REDUCTION_BITS);

        // expm1(r) by Taylor series; |r| < 7e-4 so a dozen terms suffice.
        let mut sum = r;
        let mut term = r;
        for n in 2..=20 {
            term = term * r / Self::from_f64(n as f64);
            sum += term;
            if term.hi.abs() <= DD_EPSILON * 1e-2 * sum.hi.abs() {
                break;
            }
        }
        // expm1(2r) = 2 expm1(r) + expm1(r)^2
        for _ in 0..REDUCTION_BITS {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        (sum + Self::ONE).ldexp(k as i32)
    }

    /// `10^k` computed by binary powering.
    fn pow10(k: i32) -> Self {
        let mut result = Self::ONE;
        let mut base = Self::from_f64(10.0);
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        if k < 0 {
            Self::ONE / result
        } else {
            result
        }
    }

    /// Parses a decimal literal such as `-1.25e-3` at full double-double precision.
    pub fn parse_decimal(s: &str) -> Result<Self, ParseScalarError> {
        let err = || ParseScalarError::new(s);
        let t = s.trim();
        let (negative, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            Some(_) => (false, t),
            None => return Err(err()),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(pos) => {
                let e: i32 = body[pos + 1..].parse().map_err(|_| err())?;
                (&body[..pos], e)
            }
            None => (body, 0),
        };
        let mut value = Self::ZERO;
        let mut digits = 0usize;
        let mut frac_digits = 0i32;
        let mut seen_point = false;
        for ch in mantissa.chars() {
            match ch {
                '0'..='9' => {
                    value = value.mul_f64(10.0).add_f64(f64::from(ch as u8 - b'0'));
                    digits += 1;
                    if seen_point {
                        frac_digits += 1;
                    }
                }
                '.' if !seen_point => seen_point = true,
                _ => return Err(err()),
            }
        }
        if digits == 0 {
            return Err(err());
        }
        let scale = exponent.checked_sub(frac_digits).ok_or_else(err)?;
        if scale > 0 {
            value *= Self::pow10(scale);
        } else if scale < 0 {
            value /= Self::pow10(-scale);
        }
        if !value.is_finite() {
            return Err(err());
        }
        Ok(if negative { -value } else { value })
    }

    /// Formats with enough significant digits to round-trip through
    /// [`DoubleDouble::parse_decimal`] to within a few units of the last place.
    pub fn to_decimal(self) -> String {
        if self.is_nan() {
            return "NaN".to_string();
        }
        if !self.is_finite() {
            return if self.hi > 0.0 { "inf" } else { "-inf" }.to_string();
        }
        if self.hi == 0.0 {
            return "0".to_string();
        }
        let negative = self.hi < 0.0;
        let x = self.abs();

        let mut exp10 = x.hi.log10().floor() as i32;
        let mut y = x / Self::pow10(exp10);
        if y.hi >= 10.0 {
            y /= Self::from_f64(10.0);
            exp10 += 1;
        } else if y.hi < 1.0 {
            y = y.mul_f64(10.0);
            exp10 -= 1;
        }

        // One guard digit; individual digits may land outside 0..=9 by a unit
        // of rounding and are repaired by carry propagation below.
        let mut digits = [0i32; DECIMAL_DIGITS + 1];
        for d in digits.iter_mut() {
            let lead = y.hi.floor();
            *d = lead as i32;
            y = (y - Self::from_f64(lead)).mul_f64(10.0);
        }
        for i in (1..digits.len()).rev() {
            if digits[i] < 0 {
                digits[i - 1] -= 1;
                digits[i] += 10;
            } else if digits[i] > 9 {
                digits[i - 1] += 1;
                digits[i] -= 10;
            }
        }
        // The scaling by 10^-exp10 leaves noise in the last couple of digits;
        // prefer the shortest rounding that still parses back exactly.
        let mut fallback = String::new();
        for keep in SHORT_DIGITS..=DECIMAL_DIGITS {
            let (body, e) = round_digits(&digits, keep, exp10);
            let text = layout_decimal(&body, e);
            if Self::parse_decimal(&text).is_ok_and(|back| back == x) {
                fallback = text;
                break;
            }
            fallback = text;
        }
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(&fallback);
        out
    }
}

/// Rounds digit vector `d₀.d₁d₂…` (each in `0..=9`) to `keep` significant
/// digits, dropping trailing zeros.
fn round_digits(digits: &[i32], keep: usize, mut exp10: i32) -> (String, i32) {
    let mut kept: Vec<i32> = digits[..keep].to_vec();
    if digits[keep] >= 5 {
        kept[keep - 1] += 1;
        for i in (1..keep).rev() {
            if kept[i] > 9 {
                kept[i] -= 10;
                kept[i - 1] += 1;
            }
        }
    }
    if kept[0] > 9 {
        kept[0] -= 10;
        kept.insert(0, 1);
        kept.pop();
        exp10 += 1;
    }
    while kept.len() > 1 && *kept.last().unwrap() == 0 {
        kept.pop();
    }
    let body = kept.iter().map(|d| char::from(b'0' + *d as u8)).collect();
    (body, exp10)
}

/// Lays out significant digits `d.ddd × 10^exp10` in plain notation when the
/// exponent is moderate, scientific otherwise.
pub(crate) fn layout_decimal(digits: &str, exp10: i32) -> String {
    if (-6..=20).contains(&exp10) {
        if exp10 < 0 {
            format!("0.{}{}", "0".repeat((-exp10 - 1) as usize), digits)
        } else {
            let int_len = exp10 as usize + 1;
            if digits.len() <= int_len {
                format!("{}{}", digits, "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        }
    } else if digits.len() == 1 {
        format!("{digits}e{exp10}")
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], exp10)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl FromStr for DoubleDouble {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_decimal(s)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Self::from_f64(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }.add_f64(q3)
    }
}

macro_rules! assign_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for DoubleDouble {
            fn $method(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    };
}

assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::ZERO
    }

    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::ONE
    }
}
