//! Parameters of bounded height, level by level, and the denominator filters.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;

use crate::arith::{Field, Number, QuadRational, Rational};
use crate::ntheory::{factorize, gcd, is_square};

/// `c = xn/xd + (yn/yd) w` with each coordinate reduced and `xd, yd > 0`;
/// over `Q` the `y` coordinate is `0/1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate {
    pub xn: i64,
    pub xd: i64,
    pub yn: i64,
    pub yd: i64,
}

impl Candidate {
    pub fn rational(n: i64, d: i64) -> Self {
        Candidate {
            xn: n,
            xd: d,
            yn: 0,
            yd: 1,
        }
    }

    /// Non-logarithmic height: the largest coordinate numerator or denominator.
    pub fn height(&self) -> i64 {
        self.xn.abs().max(self.xd).max(self.yn.abs()).max(self.yd)
    }

    pub fn denominator_lcm(&self) -> u64 {
        let (b, d) = (self.xd as u64, self.yd as u64);
        b / gcd(b, d) * d
    }

    pub fn to_number(&self, field: &Field) -> Number {
        Number::from_coords(
            *field,
            Rational::frac(self.xn, self.xd),
            Rational::frac(self.yn, self.yd),
        )
    }

    /// Inverse of [`Candidate::to_number`] when every part fits `i64`.
    pub fn from_number(c: &Number) -> Option<Self> {
        let y = c.y();
        Some(Candidate {
            xn: c.x().numer().to_i64()?,
            xd: c.x().denom().to_i64()?,
            yn: y.numer().to_i64()?,
            yd: y.denom().to_i64()?,
        })
    }

    pub fn display(&self, field: &Field) -> String {
        self.to_number(field).to_string()
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}+{}/{}*w", self.xn, self.xd, self.yn, self.yd)
    }
}

/// Reduced `(p, q)` with `max(|p|, q) = h`, ordered by `(p, q)`.
pub fn rationals_of_height(h: i64) -> Vec<(i64, i64)> {
    if h == 1 {
        return vec![(-1, 1), (0, 1), (1, 1)];
    }
    let mut out = Vec::new();
    for q in 1..h {
        if gcd(h as u64, q as u64) == 1 {
            out.push((-h, q));
            out.push((h, q));
        }
    }
    for p in -(h - 1)..h {
        if gcd(p.unsigned_abs(), h as u64) == 1 {
            out.push((p, h));
        }
    }
    out.sort_unstable();
    out
}

/// Over `Q`: the denominator is a perfect square.
pub fn square_denominator_filter(c: &Rational) -> bool {
    c.denom().to_u64().is_some_and(is_square)
}

/// `lcm = s^2 t` with `t` squarefree passes when every prime of `t` divides `D`.
pub fn lcm_passes(field: &Field, lcm: u64) -> bool {
    match field {
        Field::Rational => is_square(lcm),
        Field::Quadratic(k) => factorize(lcm)
            .iter()
            .all(|&(p, e)| e % 2 == 0 || k.disc % p as i64 == 0),
    }
}

/// Over a quadratic field: the lcm of the coordinate denominators is a square
/// ideal.
pub fn square_ideal_filter(c: &QuadRational) -> bool {
    let l = crate::arith::lcm(c.x.denom(), c.y.denom());
    l.to_u64()
        .is_some_and(|l| lcm_passes(&crate::arith::Field::Quadratic(c.field), l))
}

/// Applies the field's denominator filter.
pub fn passes_filter(field: &Field, c: &Candidate) -> bool {
    lcm_passes(field, c.denominator_lcm())
}

/// One height level: the candidates that pass the filter (ascending), and the
/// number of candidates of that height that the filter rejected.
#[derive(Clone, Debug, Default)]
pub struct Level {
    pub candidates: Vec<Candidate>,
    pub rejected: u64,
}

/// All `c` of height exactly `h`; with `filter` only the survivors are listed.
pub fn enumerate_level(field: &Field, h: i64, filter: bool) -> Level {
    match field {
        Field::Rational if filter => square_denominator_level(h),
        Field::Rational => Level {
            candidates: rationals_of_height(h)
                .into_iter()
                .map(|(p, q)| Candidate::rational(p, q))
                .collect(),
            rejected: 0,
        },
        Field::Quadratic(_) => quadratic_level(field, h, filter),
    }
}

/// `4 phi(h)` rationals have height `h > 1`; only square denominators are
/// walked.
fn square_denominator_level(h: i64) -> Level {
    if h == 1 {
        return enumerate_level(&Field::Rational, 1, false);
    }
    let hu = h as u64;
    let mut candidates = Vec::new();
    for k in 1.. {
        let q = k * k;
        if q >= h {
            break;
        }
        if gcd(hu, q as u64) == 1 {
            candidates.push(Candidate::rational(-h, q));
            candidates.push(Candidate::rational(h, q));
        }
    }
    if is_square(hu) {
        candidates.extend(
            (-(h - 1)..h)
                .filter(|p| gcd(p.unsigned_abs(), hu) == 1)
                .map(|p| Candidate::rational(p, h)),
        );
    }
    candidates.sort_unstable();
    let phi: u64 = factorize(hu)
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product();
    Level {
        rejected: 4 * phi - candidates.len() as u64,
        candidates,
    }
}

fn quadratic_level(field: &Field, h: i64, filter: bool) -> Level {
    // numerators by denominator, height exactly h and strictly below h
    let mut eq: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    let mut lt: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for (p, q) in rationals_of_height(h) {
        eq.entry(q).or_default().push(p);
    }
    for g in 1..h {
        for (p, q) in rationals_of_height(g) {
            lt.entry(q).or_default().push(p);
        }
    }
    let empty = Vec::new();
    let dens: Vec<i64> = (1..=h).collect();
    let mut level = Level::default();
    for &b in &dens {
        let (xeq, xlt) = (eq.get(&b).unwrap_or(&empty), lt.get(&b).unwrap_or(&empty));
        for &d in &dens {
            let (yeq, ylt) = (eq.get(&d).unwrap_or(&empty), lt.get(&d).unwrap_or(&empty));
            let count = (xeq.len() * (yeq.len() + ylt.len()) + xlt.len() * yeq.len()) as u64;
            if count == 0 {
                continue;
            }
            let l = b as u64 / gcd(b as u64, d as u64) * d as u64;
            if filter && !lcm_passes(field, l) {
                level.rejected += count;
                continue;
            }
            let mk = |xn, yn| Candidate {
                xn,
                xd: b,
                yn,
                yd: d,
            };
            for &xn in xeq {
                level
                    .candidates
                    .extend(yeq.iter().chain(ylt).map(|&yn| mk(xn, yn)));
            }
            for &xn in xlt {
                level.candidates.extend(yeq.iter().map(|&yn| mk(xn, yn)));
            }
        }
    }
    level.candidates.sort_unstable();
    level
}

/// All `c` with height at most `bound`, level by level.
pub fn enumerate_c(
    field: &Field,
    bound: i64,
    filter: bool,
) -> impl Iterator<Item = Candidate> + '_ {
    (1..=bound).flat_map(move |h| enumerate_level(field, h, filter).candidates)
}
