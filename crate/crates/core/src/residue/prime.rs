use serde::{Deserialize, Serialize};

use crate::arith::{Field, QuadField};
use crate::error::{Error, Result};
use crate::ntheory::{is_prime, mod_pow};

/// Primes are capped so residue coordinates and their products fit machine words.
pub const MAX_PRIME: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

/// How a prime of the ground field sits over `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrimeKind {
    /// `p` itself, over `Q`.
    Rational,
    /// One of two primes over `p`; `root` is the image of `w`.
    Split {
        root: u32,
    },
    Inert,
    /// `root` is the double root of the minimal polynomial mod `p`.
    Ramified {
        root: u32,
    },
}

/// A prime of `O_K` above the rational prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeDesc {
    pub p: u32,
    pub kind: PrimeKind,
    /// 0 or 1; only split primes have index 1.
    pub index: u8,
}

impl PrimeDesc {
    pub fn rational(p: u32) -> Self {
        PrimeDesc {
            p,
            kind: PrimeKind::Rational,
            index: 0,
        }
    }

    /// Residue degree.
    pub fn f(&self) -> u32 {
        match self.kind {
            PrimeKind::Inert => 2,
            _ => 1,
        }
    }

    /// Ramification index; equals `v(p)` for the normalised valuation.
    pub fn e(&self) -> u32 {
        match self.kind {
            PrimeKind::Ramified { .. } => 2,
            _ => 1,
        }
    }

    /// Size of the residue field.
    pub fn norm(&self) -> u64 {
        (self.p as u64).pow(self.f())
    }

    /// Image of `w` in the residue field when it lies in `F_p`.
    pub fn root(&self) -> Option<u32> {
        match self.kind {
            PrimeKind::Split { root } | PrimeKind::Ramified { root } => Some(root),
            PrimeKind::Rational => Some(0),
            PrimeKind::Inert => None,
        }
    }
}

/// Kronecker symbol `(D | p)` read as a splitting type.
pub fn splitting_type(field: &QuadField, p: u64) -> Splitting {
    let d = field.disc;
    if p == 2 {
        return match d.rem_euclid(8) {
            1 => Splitting::Split,
            5 => Splitting::Inert,
            _ => Splitting::Ramified,
        };
    }
    let r = d.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Splitting::Ramified;
    }
    if mod_pow(r, (p - 1) / 2, p) == 1 {
        Splitting::Split
    } else {
        Splitting::Inert
    }
}

/// Roots of `T^2 - aT + n` in `[0, p)`, ascending, by direct search.
pub(crate) fn min_poly_roots(field: &QuadField, p: u64) -> Vec<u32> {
    let a = field.a.rem_euclid(p as i64) as u64;
    let n = field.n.rem_euclid(p as i64) as u64;
    (0..p)
        .filter(|&t| (t * t + (p - a) * t + n).is_multiple_of(p))
        .map(|t| t as u32)
        .collect()
}

/// The primes of the ground field above `p`, in canonical order.
pub fn primes_above(field: &Field, p: u64) -> Result<Vec<PrimeDesc>> {
    if !is_prime(p) || p >= MAX_PRIME {
        return Err(Error::PrimeOutOfRange(p));
    }
    let pp = p as u32;
    let k = match field {
        Field::Rational => return Ok(vec![PrimeDesc::rational(pp)]),
        Field::Quadratic(k) => k,
    };
    let desc = |kind, index| PrimeDesc { p: pp, kind, index };
    Ok(match splitting_type(k, p) {
        Splitting::Inert => vec![desc(PrimeKind::Inert, 0)],
        Splitting::Ramified => {
            let roots = min_poly_roots(k, p);
            debug_assert_eq!(roots.len(), 1);
            vec![desc(PrimeKind::Ramified { root: roots[0] }, 0)]
        }
        Splitting::Split => {
            let roots = min_poly_roots(k, p);
            debug_assert_eq!(roots.len(), 2);
            vec![
                desc(PrimeKind::Split { root: roots[0] }, 0),
                desc(PrimeKind::Split { root: roots[1] }, 1),
            ]
        }
    })
}

/// Primes above each of the given rational primes, concatenated in order.
pub fn primes_above_all(field: &Field, rational: &[u64]) -> Result<Vec<PrimeDesc>> {
    let mut out = Vec::new();
    for &p in rational {
        out.extend(primes_above(field, p)?);
    }
    Ok(out)
}
