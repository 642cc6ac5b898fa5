use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{parse_err, Error, Result};

/// Reduced fraction `num/den` with `den >= 1`; zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

/// Reduce `n/d` to lowest terms with a positive denominator.
pub fn normalize_rational(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Rational> {
    let d = d.into();
    if d.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(Rational(BigRational::new(n.into(), d)))
}

impl Rational {
    pub fn new(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        normalize_rational(n, d)
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// Small-integer constructor for literals; panics on `d == 0`.
    pub fn frac(n: i64, d: i64) -> Self {
        Self::new(n, d).expect("nonzero denominator")
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Non-logarithmic height `max(|num|, den)`.
    pub fn height_int(&self) -> BigInt {
        let n = self.numer().abs();
        let d = self.denom().clone();
        if n > d {
            n
        } else {
            d
        }
    }

    /// Logarithmic height `log max(|num|, den)`.
    pub fn height(&self) -> f64 {
        big_ln(&self.height_int())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    /// Exact rational square root, if one exists.
    pub fn sqrt(&self) -> Option<Self> {
        if self.0.is_negative() {
            return None;
        }
        let rn = exact_sqrt(self.numer())?;
        let rd = exact_sqrt(self.denom())?;
        Some(Rational(BigRational::new(rn, rd)))
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }
}

pub(crate) fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Natural log of a positive big integer, tolerant of values beyond `f64`.
pub(crate) fn big_ln(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts the canonical `p/q` form and bare integers.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| parse_err(s, "bad numerator"))?;
        let d: BigInt = d.parse().map_err(|_| parse_err(s, "bad denominator"))?;
        Rational::new(n, d)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(&self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational($tr::$m(self.0, rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Rational> for &Rational {
    type Output = Rational;
    /// Panics on a zero divisor; use [`Rational::recip`] for a checked path.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// `true` when `n` is a perfect square (used by the denominator filters).
pub fn is_square_int(n: &BigInt) -> bool {
    exact_sqrt(n).is_some()
}

/// Least common multiple of two denominators.
pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_rational(2, 4).unwrap().to_string(), "1/2");
        assert_eq!(normalize_rational(-29, 16).unwrap().to_string(), "-29/16");
        assert_eq!(normalize_rational(0, 5).unwrap().to_string(), "0/1");
        assert_eq!(normalize_rational(3, -6).unwrap().to_string(), "-1/2");
        assert_eq!(normalize_rational(1, 0), Err(Error::ZeroDenominator));
    }

    #[test]
    fn height_examples() {
        assert!((Rational::frac(-29, 16).height() - 29f64.ln()).abs() < 1e-12);
        assert_eq!(Rational::zero().height(), 0.0);
        assert!((Rational::frac(1, 1000).height() - 1000f64.ln()).abs() < 1e-12);
        let huge = Rational::from_integer(BigInt::from(10).pow(400));
        assert!((huge.height() - 400.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn square_roots() {
        assert_eq!(Rational::frac(9, 16).sqrt(), Some(Rational::frac(3, 4)));
        assert_eq!(Rational::frac(33, 4).sqrt(), None);
        assert_eq!(Rational::frac(-1, 4).sqrt(), None);
        assert_eq!(Rational::zero().sqrt(), Some(Rational::zero()));
    }

    #[test]
    fn text_round_trip() {
        for s in ["-29/16", "0/1", "7/1", "-123456789012345678901234567891/2"] {
            assert_eq!(s.parse::<Rational>().unwrap().to_string(), s);
        }
        assert_eq!("5".parse::<Rational>().unwrap().to_string(), "5/1");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x/2".parse::<Rational>().is_err());
    }
}
