//! Arithmetic modes.
//!
//! Every solver is generic over [`Scalar`]. [`Rational`] gives exact
//! arithmetic and is what all golden checks use; `f64` is used for
//! refinement studies and compares with a fixed absolute tolerance of
//! [`FLOAT_TOLERANCE`].

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Absolute tolerance for float comparisons.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

pub trait Scalar: Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static {
    /// True for exact arithmetic.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact equality for rationals, `|a - b| <= 1e-9` for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    /// `self <= other` up to the mode tolerance.
    fn approx_le(&self, other: &Self) -> bool;

    /// Numerator and denominator strings for tabular reports.
    fn parts(&self) -> (String, String);

    fn mode_name() -> &'static str;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn approx_le(&self, other: &Self) -> bool {
        self <= other
    }

    fn parts(&self) -> (String, String) {
        (self.numer().to_string(), self.denom().to_string())
    }

    fn mode_name() -> &'static str {
        "rational"
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOLERANCE
    }

    fn approx_le(&self, other: &Self) -> bool {
        *self <= *other + FLOAT_TOLERANCE
    }

    fn parts(&self) -> (String, String) {
        (format!("{self}"), "1".to_string())
    }

    fn mode_name() -> &'static str {
        "float"
    }
}

pub fn min_of<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// Clamp `x` into `[lo, hi]`; assumes `lo <= hi`.
pub fn clamp<S: Scalar>(x: S, lo: &S, hi: &S) -> S {
    if x < *lo {
        lo.clone()
    } else if x > *hi {
        hi.clone()
    } else {
        x
    }
}

/// Render a scalar the way reports print it (`a/b` for rationals).
pub fn render<S: Scalar>(x: &S) -> String {
    x.to_string()
}

/// Parse `"3"`, `"-1/2"`, `"0.25"` or `"1e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let pow = num::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Ok(if negative { -value } else { value })
}

/// Convert a JSON number or string into a rational without going through
/// binary floating point.
pub fn rational_from_json(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn one<S: Scalar>() -> S {
    S::one()
}

pub fn zero<S: Scalar>() -> S {
    S::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("2.5E2").unwrap(), rat(250, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "a", "1/0", "1.2.3", "--1", "1/x", "."] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn json_numbers_stay_exact() {
        let v: serde_json::Value = serde_json::from_str("[0.1, \"1/3\", 2]").unwrap();
        let parsed: Vec<_> = v
            .as_array()
            .unwrap()
            .iter()
            .map(|x| rational_from_json(x).unwrap())
            .collect();
        assert_eq!(parsed, vec![rat(1, 10), rat(1, 3), rat(2, 1)]);
    }

    #[test]
    fn float_tolerance() {
        assert!(1.0f64.approx_eq(&(1.0 + 5e-10)));
        assert!(!1.0f64.approx_eq(&(1.0 + 5e-9)));
        assert!(1.0f64.approx_le(&(1.0 - 5e-10)));
        assert!(!rat(1, 3).approx_eq(&rat(333_333_333, 1_000_000_000)));
    }
}
