//! Exact rational numbers and the extended (possibly infinite) values the
//! solvers report.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Builds `num/den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// A rational value or positive infinity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            ExtRational::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Finite(q) => q.to_f64().unwrap_or(f64::NAN),
            ExtRational::Infinite => f64::INFINITY,
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(q: Rational) -> Self {
        ExtRational::Finite(q)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(q) => write!(f, "{q}"),
            ExtRational::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Parses `p/q`, an integer, or a finite decimal such as `-37.562`, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    let digits_ok = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !digits_ok(whole) || !digits_ok(frac) {
        return Err(err());
    }
    let mut digits = String::from(whole);
    digits.push_str(frac);
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = Rational::new(num, den);
    Ok(if neg { -q } else { q })
}

/// Decimal rendering with `places` digits after the point (truncated toward
/// zero), used next to the exact value in reports.
pub fn to_decimal(q: &Rational, places: usize) -> String {
    let neg = q.is_negative();
    let a = q.abs();
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = (a.numer() * &scale) / a.denom();
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let mut s = String::new();
    if neg && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&int_part.to_string());
    if places > 0 {
        let f = frac_part.to_string();
        s.push('.');
        for _ in f.len()..places {
            s.push('0');
        }
        s.push_str(&f);
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

pub fn ext_to_decimal(v: &ExtRational, places: usize) -> String {
    match v {
        ExtRational::Finite(q) => to_decimal(q, places),
        ExtRational::Infinite => "inf".to_string(),
    }
}

pub(crate) fn is_one(q: &Rational) -> bool {
    q.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("9/10").unwrap(), ratio(9, 10));
        assert_eq!(parse_rational("4.5").unwrap(), ratio(9, 2));
        assert_eq!(parse_rational("37.562").unwrap(), ratio(37562, 1000));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("45").unwrap(), int(45));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(18781, 500), 6), "37.562");
        assert_eq!(to_decimal(&ratio(9, 2), 6), "4.5");
        assert_eq!(to_decimal(&ratio(-7, 5), 3), "-1.4");
        assert_eq!(to_decimal(&int(3), 4), "3");
        assert_eq!(to_decimal(&ratio(1, 3), 4), "0.3333");
    }

    #[test]
    fn extended_order_puts_infinity_last() {
        assert!(ExtRational::Finite(int(1_000_000)) < ExtRational::Infinite);
        assert!(ExtRational::Finite(int(1)) < ExtRational::Finite(int(2)));
    }
}
