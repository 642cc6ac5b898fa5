use crate::arith::Field;
use crate::error::{Error, Result};
use crate::ntheory::{factorize, mod_inv};

use super::prime::PrimeDesc;

/// `u0 + u1*w` in the residue field; `u1 = 0` when the field is `F_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueElem {
    pub u0: u32,
    pub u1: u32,
}

impl ResidueElem {
    pub const ZERO: ResidueElem = ResidueElem { u0: 0, u1: 0 };
    pub const ONE: ResidueElem = ResidueElem { u0: 1, u1: 0 };

    pub fn scalar(u0: u32) -> Self {
        ResidueElem { u0, u1: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.u0 == 0 && self.u1 == 0
    }
}

/// A point of `P^1` over the residue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Affine(ResidueElem),
    Infinity,
}

/// Arithmetic context for `O_K / P`: `F_p`, or `F_p[w]/(w^2 - a w + n)` for
/// inert primes.
#[derive(Clone, Debug)]
pub struct ResidueField {
    pub prime: PrimeDesc,
    p: u64,
    a: u64,
    n: u64,
    q: u64,
    /// Distinct prime factors of `q - 1`.
    unit_factors: Vec<u64>,
}

impl ResidueField {
    pub fn new(field: &Field, prime: PrimeDesc) -> Self {
        let p = prime.p as u64;
        let (a, n) = field.a_n();
        let q = prime.norm();
        ResidueField {
            prime,
            p,
            a: a.rem_euclid(p as i64) as u64,
            n: n.rem_euclid(p as i64) as u64,
            q,
            unit_factors: factorize(q - 1).into_iter().map(|(l, _)| l).collect(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Number of elements.
    pub fn size(&self) -> u64 {
        self.q
    }

    pub fn is_prime_field(&self) -> bool {
        self.prime.f() == 1
    }

    pub fn elem(&self, u0: u64, u1: u64) -> ResidueElem {
        let u1 = if self.is_prime_field() {
            0
        } else {
            u1 % self.p
        };
        ResidueElem {
            u0: (u0 % self.p) as u32,
            u1: u1 as u32,
        }
    }

    pub fn add(&self, x: ResidueElem, y: ResidueElem) -> ResidueElem {
        self.elem(x.u0 as u64 + y.u0 as u64, x.u1 as u64 + y.u1 as u64)
    }

    pub fn neg(&self, x: ResidueElem) -> ResidueElem {
        self.elem(self.p - x.u0 as u64, self.p - x.u1 as u64)
    }

    pub fn sub(&self, x: ResidueElem, y: ResidueElem) -> ResidueElem {
        self.add(x, self.neg(y))
    }

    /// Uses `w^2 = a w - n` in the degree-2 case.
    pub fn mul(&self, x: ResidueElem, y: ResidueElem) -> ResidueElem {
        let p = self.p;
        let (x0, x1, y0, y1) = (x.u0 as u64, x.u1 as u64, y.u0 as u64, y.u1 as u64);
        if self.is_prime_field() {
            return self.elem(x0 * y0, 0);
        }
        let yy = x1 * y1 % p;
        let c0 = (x0 * y0 + (p - self.n) * yy) % p;
        let c1 = (x0 * y1 + x1 * y0 + self.a * yy) % p;
        self.elem(c0, c1)
    }

    pub fn square(&self, x: ResidueElem) -> ResidueElem {
        self.mul(x, x)
    }

    pub fn pow(&self, mut x: ResidueElem, mut e: u64) -> ResidueElem {
        let mut acc = ResidueElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: ResidueElem) -> Result<ResidueElem> {
        if x.is_zero() {
            return Err(Error::ZeroInverse);
        }
        if self.is_prime_field() {
            return Ok(ResidueElem::scalar(
                mod_inv(x.u0 as u64, self.p).unwrap() as u32
            ));
        }
        // x^(q-2)
        Ok(self.pow(x, self.q - 2))
    }

    /// Dense index `u0 + u1*p` in `[0, q)`.
    pub fn index(&self, x: ResidueElem) -> u32 {
        (x.u0 as u64 + x.u1 as u64 * self.p) as u32
    }

    pub fn from_index(&self, i: u32) -> ResidueElem {
        let i = i as u64;
        ResidueElem {
            u0: (i % self.p) as u32,
            u1: (i / self.p) as u32,
        }
    }

    /// Index of a projective point, with infinity at `q`.
    pub fn proj_index(&self, x: ProjPoint) -> u32 {
        match x {
            ProjPoint::Affine(e) => self.index(e),
            ProjPoint::Infinity => self.q as u32,
        }
    }

    pub fn proj_from_index(&self, i: u32) -> ProjPoint {
        if i as u64 == self.q {
            ProjPoint::Infinity
        } else {
            ProjPoint::Affine(self.from_index(i))
        }
    }

    /// Multiplicative order in the cyclic group `k^*`; `None` for zero.
    pub fn mult_order(&self, x: ResidueElem) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        let mut order = self.q - 1;
        for &l in &self.unit_factors {
            while order.is_multiple_of(l) && self.pow(x, order / l) == ResidueElem::ONE {
                order /= l;
            }
        }
        Some(order)
    }

    /// Index of `z^2 + c` for every element index `z`.
    pub fn successor_table(&self, c: ResidueElem) -> Vec<u32> {
        (0..self.q as u32)
            .map(|i| {
                let z = self.from_index(i);
                self.index(self.add(self.square(z), c))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::QuadField;
    use crate::residue::primes_above;

    fn field_for(d: i64, p: u64, idx: usize) -> ResidueField {
        let f = if d == 0 {
            Field::Rational
        } else {
            Field::Quadratic(QuadField::new(d).unwrap())
        };
        ResidueField::new(&f, primes_above(&f, p).unwrap()[idx])
    }

    #[test]
    fn arithmetic_examples() {
        let f9 = field_for(-4, 3, 0);
        assert_eq!(f9.size(), 9);
        let one_plus_w = f9.elem(1, 1);
        assert_eq!(f9.square(one_plus_w), f9.elem(0, 2));
        let x = f9.elem(2, 1);
        assert_eq!(f9.mul(x, ResidueElem::ONE), x);
        let f5 = field_for(0, 5, 0);
        assert_eq!(f5.inv(f5.elem(2, 0)).unwrap(), f5.elem(3, 0));
        assert!(f5.inv(ResidueElem::ZERO).is_err());
        for i in 1..9 {
            let x = f9.from_index(i);
            assert_eq!(f9.mul(x, f9.inv(x).unwrap()), ResidueElem::ONE);
        }
    }

    #[test]
    fn index_bijection() {
        let f5 = field_for(0, 5, 0);
        assert_eq!(f5.index(f5.elem(3, 0)), 3);
        let f9 = field_for(-4, 3, 0);
        assert_eq!(f9.index(f9.elem(1, 2)), 7);
        for f in [f5, f9, field_for(-3, 5, 0), field_for(33, 7, 0)] {
            for i in 0..f.size() as u32 {
                assert_eq!(f.index(f.from_index(i)), i);
            }
            assert_eq!(f.proj_from_index(f.size() as u32), ProjPoint::Infinity);
        }
    }

    #[test]
    fn orders() {
        let f7 = field_for(0, 7, 0);
        assert_eq!(f7.mult_order(f7.elem(3, 0)), Some(6));
        assert_eq!(f7.mult_order(f7.elem(1, 0)), Some(1));
        assert_eq!(f7.mult_order(ResidueElem::ZERO), None);
        // In F_49 from Q(i): w = i has order 4.
        let f49 = field_for(-4, 7, 0);
        assert_eq!(f49.size(), 49);
        assert_eq!(f49.mult_order(f49.elem(0, 1)), Some(4));
        // brute-force orders agree everywhere in F_49
        for i in 1..49 {
            let x = f49.from_index(i);
            let r = f49.mult_order(x).unwrap();
            assert_eq!(f49.pow(x, r), ResidueElem::ONE);
            assert!((1..r).all(|s| f49.pow(x, s) != ResidueElem::ONE));
        }
    }
}
