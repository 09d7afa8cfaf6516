//! Exact arithmetic helpers.
//!
//! Payoffs, costs and continuation probabilities are kept as arbitrary
//! precision rationals so that designed parameter sets (x = 1/9, δ = 3/4)
//! reproduce their basin values without drift. Basin sizes under
//! independent beliefs are (N−1)-th roots of rationals, which
//! [`RationalPower`] represents symbolically.

use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Builds `numer/denom` as a rational. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"a/b"`, an integer, or a decimal with optional exponent
/// (`"0.75"`, `"1e-3"`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim())?;
        let den = parse_decimal(den.trim())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(num / den);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("`{s}` is not a number"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{whole}{frac}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| bad())?
    };
    let scale = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let mut value = Rational::from_integer(numer) * Pow::pow(&ten, scale);
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Converts a float to the rational spelled by its shortest round-trip
/// decimal representation, so `0.75` becomes exactly `3/4`.
pub fn rational_from_f64(value: f64) -> Result<Rational> {
    if !value.is_finite() {
        return Err(Error::Parse(format!("{value} is not finite")));
    }
    parse_decimal(&format!("{value}"))
}

/// `"a/b"`, or just `"a"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Terminating decimal spelling if one exists (`"11"`, `"0.75"`), else `"a/b"`.
pub fn format_decimal_or_ratio(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format_rational(value);
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(Pow::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{whole}.{frac}")
}

/// A positive rational raised to a rational power, `base^(p/q)`, kept in a
/// canonical form: the base is not a perfect power of anything with a
/// larger exponent, and integer exponents are folded into the base.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPower {
    base: Rational,
    exponent: Ratio<i64>,
}

impl RationalPower {
    pub fn new(base: Rational, exponent: Ratio<i64>) -> Result<Self> {
        if !base.is_positive() {
            return Err(Error::invalid("base", "must be positive"));
        }
        Ok(Self::canonical(base, exponent))
    }

    pub fn rational(value: Rational) -> Result<Self> {
        Self::new(value, Ratio::one())
    }

    fn canonical(base: Rational, exponent: Ratio<i64>) -> Self {
        if base.is_one() || exponent.is_zero() {
            return RationalPower {
                base: Rational::one(),
                exponent: Ratio::one(),
            };
        }
        let (root, power) = perfect_power(&base);
        let exponent = exponent * Ratio::from_integer(power as i64);
        let mut base = root;
        let mut exponent = exponent;
        if exponent.is_integer() {
            base = Pow::pow(&base, *exponent.numer() as i32);
            exponent = Ratio::one();
        }
        // Prefer a base above one: (1/3)^(1/3) is spelled 3^(-1/3).
        if base < Rational::one() {
            base = base.recip();
            exponent = -exponent;
        }
        if exponent == Ratio::from_integer(-1) {
            base = base.recip();
            exponent = Ratio::one();
        }
        RationalPower { base, exponent }
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn exponent(&self) -> Ratio<i64> {
        self.exponent
    }

    /// The exact value when it is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        self.exponent.is_one().then(|| self.base.clone())
    }

    /// Raises to an integer power, staying exact.
    pub fn powi(&self, k: i64) -> Self {
        Self::canonical(self.base.clone(), self.exponent * Ratio::from_integer(k))
    }

    pub fn to_f64(&self) -> f64 {
        let base = to_f64(&self.base);
        if self.exponent.is_one() {
            base
        } else {
            base.powf(*self.exponent.numer() as f64 / *self.exponent.denom() as f64)
        }
    }
}

impl fmt::Display for RationalPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent.is_one() {
            return f.write_str(&format_rational(&self.base));
        }
        let base = format_rational(&self.base);
        let base = if self.base.is_integer() {
            base
        } else {
            format!("({base})")
        };
        write!(f, "{base}^({})", self.exponent)
    }
}

impl Serialize for RationalPower {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RationalPower {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_power(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses `"a/b"`, a decimal, `"a^(p/q)"` or `"(a/b)^(p/q)"`.
pub fn parse_power(text: &str) -> Result<RationalPower> {
    let s = text.trim();
    match s.split_once('^') {
        None => RationalPower::rational(parse_rational(s)?),
        Some((base, exponent)) => {
            let base = strip_parens(base.trim());
            let exponent = strip_parens(exponent.trim());
            let base = parse_rational(base)?;
            let exponent = parse_rational(exponent)?;
            let numer = exponent.numer().to_i64();
            let denom = exponent.denom().to_i64();
            match (numer, denom) {
                (Some(n), Some(d)) => RationalPower::new(base, Ratio::new(n, d)),
                _ => Err(Error::Parse(format!("exponent in `{s}` is too large"))),
            }
        }
    }
}

fn strip_parens(s: &str) -> &str {
    s.strip_prefix('(')
        .and_then(|inner| inner.strip_suffix(')'))
        .unwrap_or(s)
}

/// Writes `value = root^power` with the largest possible `power`.
fn perfect_power(value: &Rational) -> (Rational, u32) {
    let numer = value.numer();
    let denom = value.denom();
    let bits = numer.bits().max(denom.bits()).max(1);
    for power in (2..=bits as u32).rev() {
        if let (Some(n), Some(d)) = (exact_root(numer, power), exact_root(denom, power)) {
            return (Rational::new(n, d), power);
        }
    }
    (value.clone(), 1)
}

fn exact_root(value: &BigInt, power: u32) -> Option<BigInt> {
    let root = value.nth_root(power);
    (Pow::pow(&root, power) == *value).then_some(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_spellings() {
        assert_eq!(parse_rational("1/9").unwrap(), ratio(1, 9));
        assert_eq!(parse_rational("0.75").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-2.5e1").unwrap(), int(-25));
        assert_eq!(parse_rational(" 11 ").unwrap(), int(11));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn float_conversion_uses_shortest_decimal() {
        assert_eq!(rational_from_f64(0.75).unwrap(), ratio(3, 4));
        assert_eq!(rational_from_f64(0.1).unwrap(), ratio(1, 10));
        assert!(rational_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal_or_ratio(&ratio(3, 4)), "0.75");
        assert_eq!(format_decimal_or_ratio(&int(11)), "11");
        assert_eq!(format_decimal_or_ratio(&ratio(-1, 8)), "-0.125");
        assert_eq!(format_decimal_or_ratio(&ratio(1, 9)), "1/9");
        assert_eq!(format_decimal_or_ratio(&ratio(1, 20)), "0.05");
    }

    #[test]
    fn powers_are_canonical() {
        let a = RationalPower::new(ratio(1, 27), Ratio::new(1, 9)).unwrap();
        let b = RationalPower::new(int(3), Ratio::new(-1, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "3^(-1/3)");
        let c = RationalPower::new(ratio(1, 27), Ratio::new(1, 3)).unwrap();
        assert_eq!(c.as_rational(), Some(ratio(1, 3)));
        assert_eq!(c.to_string(), "1/3");
        assert_eq!(a.powi(9).as_rational(), Some(ratio(1, 27)));
        assert!((a.to_f64() - 3f64.powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn parses_powers() {
        let p = parse_power("3^(-1/3)").unwrap();
        assert_eq!(p.powi(3).as_rational(), Some(ratio(1, 3)));
        let q = parse_power("(1/27)^(1/9)").unwrap();
        assert_eq!(p, q);
        assert_eq!(parse_power("1/3").unwrap().as_rational(), Some(ratio(1, 3)));
        assert!(parse_power("-1^(1/2)").is_err());
    }
}
