//! Valuations and reduction modulo a prime of `O_K`.
//!
//! An element is written `c = (A + C w)/L` with `L = lcm` of the coordinate
//! denominators. For inert and ramified primes `p | L` always forces a pole;
//! only split primes can cancel part of `L` against `A + C w`, and there the
//! residue is read off the `p`-adic image of `w` (a Hensel lift of the root).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{Field, Number};
use crate::ntheory::mod_inv;

use super::field::{ProjPoint, ResidueElem};
use super::prime::{PrimeDesc, PrimeKind};

/// `(A, C, L)` with `c = (A + C w)/L`, `L > 0`.
pub(crate) fn common_denominator_form(c: &Number) -> (BigInt, BigInt, BigInt) {
    let l = c.denominator_lcm();
    let y = c.y();
    let a = c.x().numer() * (&l / c.x().denom());
    let cc = y.numer() * (&l / y.denom());
    (a, cc, l)
}

fn big_valuation(n: &BigInt, p: &BigInt) -> Option<u64> {
    if n.is_zero() {
        return None;
    }
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

fn residue_mod(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// `v_P(A + C w)` for integers `A, C`, not both zero.
fn integral_valuation(field: &Field, prime: &PrimeDesc, a: &BigInt, c: &BigInt) -> u64 {
    let p = prime.p as u64;
    let pb = BigInt::from(p);
    let va = big_valuation(a, &pb);
    let vc = big_valuation(c, &pb);
    let g = match (va, vc) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => unreachable!("zero element"),
    };
    match prime.kind {
        PrimeKind::Rational => va.unwrap(),
        PrimeKind::Inert => g,
        PrimeKind::Ramified { root } | PrimeKind::Split { root } => {
            let scale = pb.pow(g as u32);
            let (a1, c1) = (a / &scale, c / &scale);
            let in_prime =
                (residue_mod(&a1, p) + residue_mod(&c1, p) * root as u64).is_multiple_of(p);
            match prime.kind {
                PrimeKind::Ramified { .. } => 2 * g + u64::from(in_prime),
                _ if !in_prime => g,
                _ => {
                    // a1 + c1 w lies in P but not in its conjugate, so the norm
                    // carries the whole P-adic valuation.
                    let (ka, kn) = field.a_n();
                    let norm =
                        &a1 * &a1 + BigInt::from(ka) * &a1 * &c1 + BigInt::from(kn) * &c1 * &c1;
                    g + big_valuation(&norm, &pb).unwrap()
                }
            }
        }
    }
}

/// Normalised `P`-adic valuation of `c`; `None` for `c = 0`.
pub fn valuation(c: &Number, prime: &PrimeDesc) -> Option<i64> {
    if c.is_zero() {
        return None;
    }
    let (a, cc, l) = common_denominator_form(c);
    let vl = big_valuation(&l, &BigInt::from(prime.p)).unwrap();
    let vnum = integral_valuation(&c.field(), prime, &a, &cc);
    Some(vnum as i64 - (prime.e() as u64 * vl) as i64)
}

/// Hensel lift of a simple root `t` of `T^2 - aT + n` modulo `modulus = p^k`.
pub(crate) fn hensel_root(field: &Field, root: u32, p: u64, modulus: &BigInt) -> BigInt {
    let (ka, kn) = field.a_n();
    let (ka, kn) = (BigInt::from(ka), BigInt::from(kn));
    let mut t = BigInt::from(root);
    let mut prec = BigInt::from(p);
    while &prec < modulus {
        prec = (&prec * &prec).min(modulus.clone());
        let f = (&t * &t - &ka * &t + &kn).mod_floor(&prec);
        let df = (BigInt::from(2) * &t - &ka).mod_floor(&prec);
        let inv = mod_inv_big(&df, &prec);
        t = (&t - f * inv).mod_floor(&prec);
    }
    t.mod_floor(modulus)
}

fn mod_inv_big(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Reduction of `c` into `P^1(O_K/P)`; infinity exactly when `v_P(c) < 0`.
pub fn reduce_c(c: &Number, prime: &PrimeDesc) -> ProjPoint {
    let Some(v) = valuation(c, prime) else {
        return ProjPoint::Affine(ResidueElem::ZERO);
    };
    if v < 0 {
        return ProjPoint::Infinity;
    }
    if v > 0 {
        return ProjPoint::Affine(ResidueElem::ZERO);
    }
    let p = prime.p as u64;
    let (a, cc, l) = common_denominator_form(c);
    let pb = BigInt::from(p);
    let k = big_valuation(&l, &pb).unwrap();
    if k == 0 {
        let linv = mod_inv(residue_mod(&l, p), p).unwrap();
        let x = residue_mod(&a, p) * linv % p;
        let y = residue_mod(&cc, p) * linv % p;
        return ProjPoint::Affine(match prime.kind {
            PrimeKind::Inert => ResidueElem {
                u0: x as u32,
                u1: y as u32,
            },
            _ => ResidueElem::scalar(((x + y * prime.root().unwrap() as u64) % p) as u32),
        });
    }
    // Only split primes reach here: the pole of 1/L is cancelled inside A + C w.
    let PrimeKind::Split { root } = prime.kind else {
        unreachable!("p | L with v >= 0 needs a split prime");
    };
    let pk = pb.pow(k as u32);
    let modulus = &pk * &pb;
    let w = hensel_root(&c.field(), root, p, &modulus);
    let value = (&a + &cc * w).mod_floor(&modulus);
    debug_assert!((&value % &pk).is_zero());
    let top = residue_mod(&(value / &pk), p);
    let lrest = residue_mod(&(&l / &pk), p);
    let r = top * mod_inv(lrest, p).unwrap() % p;
    ProjPoint::Affine(ResidueElem::scalar(r as u32))
}
