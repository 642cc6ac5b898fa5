//! Quadratic fields `K = Q(sqrt D)` and their elements in the integral basis
//! `{1, w}` with `w = (a + sqrt D)/2`.
//!
//! Elements are kept as two independently reduced coordinates `x + y*w`. The
//! denominator filter for quadratic fields reads `lcm(den x, den y)` straight
//! off this form, and heights are taken coordinatewise in the same basis.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};
use crate::ntheory::factorize;

/// `Q(sqrt D)` for a fundamental discriminant `D`; `w^2 = a*w - n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadField {
    pub disc: i64,
    /// Trace of `w`: 1 when `D = 1 mod 4`, else 0.
    pub a: i64,
    /// Norm of `w`: `(a^2 - D)/4`.
    pub n: i64,
}

fn is_squarefree(m: i64) -> bool {
    if m == 0 {
        return false;
    }
    factorize(m.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

/// Fundamental discriminants in `lo..=hi`, ascending.
pub fn fundamental_discriminants(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi)
        .filter(|&d| is_fundamental_discriminant(d))
        .collect()
}

impl QuadField {
    pub fn new(disc: i64) -> Result<Self> {
        if !is_fundamental_discriminant(disc) {
            return Err(Error::NotFundamental(disc));
        }
        let a = if disc.rem_euclid(4) == 1 { 1 } else { 0 };
        Ok(QuadField {
            disc,
            a,
            n: (a * a - disc) / 4,
        })
    }

    pub fn is_real(&self) -> bool {
        self.disc > 0
    }

    /// Real images of `w` (real fields) or the real part and imaginary part
    /// of `w` (imaginary fields).
    pub fn omega_embeddings(&self) -> (f64, f64) {
        let r = (self.disc.abs() as f64).sqrt();
        let a = self.a as f64;
        if self.is_real() {
            ((a + r) / 2.0, (a - r) / 2.0)
        } else {
            (a / 2.0, r / 2.0)
        }
    }
}

/// The ground field of a run: `Q` itself or a quadratic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Rational,
    Quadratic(QuadField),
}

impl Field {
    /// `0` selects `Q`; anything else must be a fundamental discriminant.
    pub fn from_disc(disc: i64) -> Result<Self> {
        if disc == 0 {
            Ok(Field::Rational)
        } else {
            Ok(Field::Quadratic(QuadField::new(disc)?))
        }
    }

    pub fn disc(&self) -> i64 {
        match self {
            Field::Rational => 0,
            Field::Quadratic(k) => k.disc,
        }
    }

    pub fn degree(&self) -> u32 {
        match self {
            Field::Rational => 1,
            Field::Quadratic(_) => 2,
        }
    }

    pub fn quad(&self) -> Option<&QuadField> {
        match self {
            Field::Rational => None,
            Field::Quadratic(k) => Some(k),
        }
    }

    /// Trace and norm of the generator; `(0, 0)` over `Q` so that formulas
    /// written for `x + y*w` specialise to `y = 0`.
    pub fn a_n(&self) -> (i64, i64) {
        match self {
            Field::Rational => (0, 0),
            Field::Quadratic(k) => (k.a, k.n),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Quadratic(k) => write!(f, "Q(sqrt({}))", k.disc),
        }
    }
}

/// `x + y*w` in a quadratic field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadRational {
    pub x: Rational,
    pub y: Rational,
    pub field: QuadField,
}

impl QuadRational {
    pub fn new(field: QuadField, x: Rational, y: Rational) -> Self {
        QuadRational { x, y, field }
    }

    pub fn zero(field: QuadField) -> Self {
        Self::new(field, Rational::zero(), Rational::zero())
    }

    pub fn from_rational(field: QuadField, x: Rational) -> Self {
        Self::new(field, x, Rational::zero())
    }

    pub fn omega(field: QuadField) -> Self {
        Self::new(field, Rational::zero(), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            Err(Error::FieldMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::new(self.field, &self.x + &o.x, &self.y + &o.y))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self::new(self.field, &self.x - &o.x, &self.y - &o.y))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.field, -&self.x, -&self.y)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(self.mul_unchecked(o))
    }

    fn mul_unchecked(&self, o: &Self) -> Self {
        let (a, n) = (Rational::from(self.field.a), Rational::from(self.field.n));
        let yy = &self.y * &o.y;
        let x = &(&self.x * &o.x) - &(&n * &yy);
        let y = &(&(&self.x * &o.y) + &(&o.x * &self.y)) + &(&a * &yy);
        Self::new(self.field, x, y)
    }

    pub fn square(&self) -> Self {
        self.mul_unchecked(self)
    }

    /// `x + y*w -> (x + a*y) - y*w`.
    pub fn conjugate(&self) -> Self {
        let a = Rational::from(self.field.a);
        Self::new(self.field, &self.x + &(&a * &self.y), -&self.y)
    }

    /// `N(x + y*w) = x^2 + a*x*y + n*y^2`.
    pub fn norm(&self) -> Rational {
        let (a, n) = (Rational::from(self.field.a), Rational::from(self.field.n));
        &(&(&self.x * &self.x) + &(&a * &(&self.x * &self.y))) + &(&n * &(&self.y * &self.y))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv_norm = o.norm().recip()?;
        let num = self.mul_unchecked(&o.conjugate());
        Ok(Self::new(
            self.field,
            &num.x * &inv_norm,
            &num.y * &inv_norm,
        ))
    }

    /// Logarithmic height `max(h(x), h(y))`.
    pub fn height(&self) -> f64 {
        self.x.height().max(self.y.height())
    }

    /// Non-logarithmic height `max(H(x), H(y))`.
    pub fn height_int(&self) -> BigInt {
        std::cmp::max(self.x.height_int(), self.y.height_int())
    }

    /// A square root in `K`, if `self` is a square.
    ///
    /// Writes `self = X + Y sqrt D` and solves `(s + t sqrt D)^2 = X + Y sqrt D`
    /// exactly: the `Y = 0` branch tries `t = 0` then `s = 0`; otherwise
    /// `s^2 = (X +- sqrt(N))/2` with `N` the norm.
    pub fn sqrt(&self) -> Option<Self> {
        let k = self.field;
        let half = Rational::frac(1, 2);
        let a = Rational::from(k.a);
        let d = Rational::from(k.disc);
        let big_x = &self.x + &(&(&self.y * &a) * &half);
        let big_y = &self.y * &half;
        // s + t sqrt D  ->  (s - a t) + 2t w
        let back = |s: Rational, t: Rational| {
            let y = &t + &t;
            Self::new(k, &s - &(&a * &t), y)
        };
        if big_y.is_zero() {
            if let Some(s) = big_x.sqrt() {
                return Some(back(s, Rational::zero()));
            }
            let t = (&big_x / &d).sqrt()?;
            return Some(back(Rational::zero(), t));
        }
        let root_norm = self.norm().sqrt()?;
        for sign in [1i64, -1] {
            let s2 = &(&big_x + &(&Rational::from(sign) * &root_norm)) * &half;
            if let Some(s) = s2.sqrt() {
                if s.is_zero() {
                    continue;
                }
                let t = &big_y / &(&s + &s);
                let r = back(s, t);
                debug_assert_eq!(r.square(), *self);
                return Some(r);
            }
        }
        None
    }

    /// Parses `x`, `y*w`, `x+y*w` or `x-y*w` with rational `x` and `y`.
    pub fn parse(field: QuadField, s: &str) -> Result<Self> {
        let t = s.trim();
        let Some(body) = t.strip_suffix("*w") else {
            return Ok(Self::from_rational(field, t.parse()?));
        };
        let b = body.as_bytes();
        let split = (1..b.len())
            .rev()
            .find(|&i| matches!(b[i], b'+' | b'-') && !matches!(b[i - 1], b'+' | b'-'));
        let (x, y) = match split {
            None => (Rational::zero(), body.parse()?),
            Some(i) => {
                let y = if b[i] == b'+' {
                    &body[i + 1..]
                } else {
                    &body[i..]
                };
                (body[..i].parse()?, y.parse()?)
            }
        };
        Ok(Self::new(field, x, y))
    }
}

impl fmt::Display for QuadRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else if self.x.is_zero() {
            write!(f, "{}*w", self.y)
        } else if self.y.numer().sign() == num_bigint::Sign::Minus {
            write!(f, "{}{}*w", self.x, self.y)
        } else {
            write!(f, "{}+{}*w", self.x, self.y)
        }
    }
}

/// A value of the ground field: the parameter `c` or a point `alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Number {
    Rational(Rational),
    Quadratic(QuadRational),
}

impl Number {
    pub fn zero(field: Field) -> Self {
        Self::from_coords(field, Rational::zero(), Rational::zero())
    }

    /// Builds `x + y*w`; over `Q` the `y` coordinate must be zero and is dropped.
    pub fn from_coords(field: Field, x: Rational, y: Rational) -> Self {
        match field {
            Field::Rational => {
                debug_assert!(y.is_zero());
                Number::Rational(x)
            }
            Field::Quadratic(k) => Number::Quadratic(QuadRational::new(k, x, y)),
        }
    }

    pub fn field(&self) -> Field {
        match self {
            Number::Rational(_) => Field::Rational,
            Number::Quadratic(q) => Field::Quadratic(q.field),
        }
    }

    pub fn x(&self) -> &Rational {
        match self {
            Number::Rational(r) => r,
            Number::Quadratic(q) => &q.x,
        }
    }

    pub fn y(&self) -> Rational {
        match self {
            Number::Rational(_) => Rational::zero(),
            Number::Quadratic(q) => q.y.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Quadratic(q) => q.is_zero(),
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => Ok(Number::Rational(a + b)),
            (Number::Quadratic(a), Number::Quadratic(b)) => Ok(Number::Quadratic(a.add(b)?)),
            _ => Err(Error::FieldMismatch),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => Ok(Number::Rational(a - b)),
            (Number::Quadratic(a), Number::Quadratic(b)) => Ok(Number::Quadratic(a.sub(b)?)),
            _ => Err(Error::FieldMismatch),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        match (self, o) {
            (Number::Rational(a), Number::Rational(b)) => Ok(Number::Rational(a * b)),
            (Number::Quadratic(a), Number::Quadratic(b)) => Ok(Number::Quadratic(a.mul(b)?)),
            _ => Err(Error::FieldMismatch),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Number::Rational(a) => Number::Rational(-a),
            Number::Quadratic(a) => Number::Quadratic(a.neg()),
        }
    }

    pub fn square(&self) -> Self {
        match self {
            Number::Rational(a) => Number::Rational(a * a),
            Number::Quadratic(a) => Number::Quadratic(a.square()),
        }
    }

    /// `z -> z^2 + c`; `self` is `z`.
    pub fn step(&self, c: &Self) -> Result<Self> {
        self.square().add(c)
    }

    pub fn conjugate(&self) -> Self {
        match self {
            Number::Rational(a) => Number::Rational(a.clone()),
            Number::Quadratic(a) => Number::Quadratic(a.conjugate()),
        }
    }

    pub fn height(&self) -> f64 {
        match self {
            Number::Rational(a) => a.height(),
            Number::Quadratic(a) => a.height(),
        }
    }

    pub fn height_int(&self) -> BigInt {
        match self {
            Number::Rational(a) => a.height_int(),
            Number::Quadratic(a) => a.height_int(),
        }
    }

    /// A square root in the ground field, if one exists.
    pub fn sqrt(&self) -> Option<Self> {
        match self {
            Number::Rational(a) => a.sqrt().map(Number::Rational),
            Number::Quadratic(a) => a.sqrt().map(Number::Quadratic),
        }
    }

    /// `lcm` of the coordinate denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        match self {
            Number::Rational(a) => a.denom().clone(),
            Number::Quadratic(q) => super::rational::lcm(q.x.denom(), q.y.denom()),
        }
    }

    /// Largest absolute value over the archimedean embeddings (floating point).
    pub fn max_abs(&self) -> f64 {
        match self {
            Number::Rational(a) => a.to_f64().abs(),
            Number::Quadratic(q) => {
                let (x, y) = (q.x.to_f64(), q.y.to_f64());
                let (e1, e2) = q.field.omega_embeddings();
                if q.field.is_real() {
                    (x + y * e1).abs().max((x + y * e2).abs())
                } else {
                    ((x + y * e1).powi(2) + (y * e2).powi(2)).sqrt()
                }
            }
        }
    }

    pub fn parse(field: Field, s: &str) -> Result<Self> {
        match field {
            Field::Rational => Ok(Number::Rational(s.parse()?)),
            Field::Quadratic(k) => Ok(Number::Quadratic(QuadRational::parse(k, s)?)),
        }
    }

    /// Integer-coordinate view `(x, y)` when both coordinates are integers.
    pub fn integer_coords(&self) -> Option<(BigInt, BigInt)> {
        let y = self.y();
        if self.x().is_integer() && y.is_integer() {
            Some((self.x().numer().clone(), y.numer().clone()))
        } else {
            None
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(a) => a.fmt(f),
            Number::Quadratic(a) => a.fmt(f),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
