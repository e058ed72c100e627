//! Exact rational numbers used for every probability in the crate.
//!
//! `Rational` is `num_rational::BigRational`, which is always kept in lowest
//! terms with a positive denominator. The helpers here cover the text form
//! used by model files (`"p/q"` or an integer) and a few integer utilities.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

/// Error returned when a probability string is not a plain fraction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{0}`: expected an integer or `p/q`")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"`, `"-p/q"` or an integer string. Decimal notation is rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let trimmed = text.trim();
    let err = || ParseRationalError(text.to_string());
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let valid = |s: &str| {
        let digits = s.strip_prefix('-').unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num) || !den.bytes().all(|b| b.is_ascii_digit()) || den.is_empty() {
        return Err(err());
    }
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `"p/q"` in lowest terms, or the bare integer.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Least common multiple of the denominators (1 for an empty iterator).
pub fn lcm_of_denominators<'a, I>(values: I) -> BigInt
where
    I: IntoIterator<Item = &'a Rational>,
{
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}
