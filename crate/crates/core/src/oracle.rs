//! Exact periodic and preperiodic points of `z -> z^2 + c` over the ground field.
//!
//! A periodic point `alpha` has `v(alpha) = v(c)/2` wherever `v(c) < 0` and is
//! integral elsewhere, so `s * alpha` is integral for the least `s` with
//! `L | s^2` (`L` the denominator of `c`). It also lies inside the escape
//! radius in every embedding. The candidates therefore form a bounded piece
//! of the lattice `(1/s) O_K`; the map sends candidates to candidates or out
//! of the set, and the periodic points are exactly the cycles of that
//! functional graph.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{Field, Number, Rational};
use crate::error::{Error, Result};
use crate::ntheory::factorize;
use crate::residue::{common_denominator_form, primes_above, valuation, MAX_PRIME};

pub const DEFAULT_CANDIDATE_CAP: u64 = 10_000_000;
/// Denominators above this are not factored.
const FACTOR_LIMIT: u64 = 100_000_000_000_000;
/// Lattice coordinates stay below this so the map fits `i128`.
const COORD_LIMIT: f64 = (1u64 << 40) as f64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicPoint {
    pub point: Number,
    pub period: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreperiodicPoint {
    pub point: Number,
    /// Steps needed to land on a cycle; 0 for periodic points.
    pub tail: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitCertificate {
    pub c: Number,
    pub field_disc: i64,
    /// Cycle by cycle, each in orbit order starting at its least point.
    pub points: Vec<PeriodicPoint>,
    /// Affine preperiodic points; infinity is always an extra fixed point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preperiodic: Option<Vec<PreperiodicPoint>>,
}

impl OrbitCertificate {
    pub fn periods(&self) -> BTreeSet<u64> {
        self.points.iter().map(|p| p.period).collect()
    }

    pub fn cycles(&self) -> Vec<Vec<Number>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.points.len() {
            let n = self.points[i].period as usize;
            out.push(
                self.points[i..i + n]
                    .iter()
                    .map(|p| p.point.clone())
                    .collect(),
            );
            i += n;
        }
        out
    }

    /// Re-checks every listed period by exact iteration.
    pub fn verify(&self) -> bool {
        self.points.iter().all(|pp| {
            let mut z = pp.point.clone();
            for m in 1..=pp.period {
                z = z.step(&self.c).expect("same field");
                if (z == pp.point) != (m == pp.period) {
                    return false;
                }
            }
            true
        })
    }

    /// Preperiodic count including the point at infinity.
    pub fn preperiodic_count_with_infinity(&self) -> Option<usize> {
        self.preperiodic.as_ref().map(|v| v.len() + 1)
    }
}

/// `(1 + sqrt(1 + 4 |c|))/2` with `|c|` the largest archimedean absolute value.
pub fn northcott_bound(c: &Number) -> f64 {
    (1.0 + (1.0 + 4.0 * c.max_abs()).sqrt()) / 2.0
}

fn padded_bound(c: &Number) -> f64 {
    northcott_bound(c) * (1.0 + 1e-9) + 1e-9
}

/// Whether some prime of small norm has an odd negative valuation on `c`,
/// which rules out any affine periodic point.
fn odd_pole(c: &Number, den_primes: &[u64]) -> Result<bool> {
    let field = c.field();
    for &p in den_primes {
        if p >= MAX_PRIME {
            continue;
        }
        for prime in primes_above(&field, p)? {
            if valuation(c, &prime).is_some_and(|v| v < 0 && v % 2 != 0) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Least `s` with `L | s^2`, or `None` when `c` has an odd pole.
pub fn lattice_scale(c: &Number) -> Result<Option<u64>> {
    scale_with(c, true)
}

fn scale_with(c: &Number, check_poles: bool) -> Result<Option<u64>> {
    let (_, _, l) = common_denominator_form(c);
    let l = l
        .to_u64()
        .filter(|&l| l <= FACTOR_LIMIT)
        .ok_or_else(|| Error::BoundOverflow(format!("denominator {l} too large")))?;
    let fac = factorize(l);
    let primes: Vec<u64> = fac.iter().map(|&(p, _)| p).collect();
    if check_poles && odd_pole(c, &primes)? {
        return Ok(None);
    }
    Ok(Some(
        fac.iter().map(|&(p, e)| p.pow(e.div_ceil(2))).product(),
    ))
}

struct Lattice {
    field: Field,
    s: i128,
    /// `(lo, hi, offset)` per `V` from `v_min`; rows with `lo > hi` are empty.
    v_min: i64,
    rows: Vec<(i64, i64, u64)>,
    len: u64,
}

impl Lattice {
    fn build(c: &Number, s: u64, cap: u64) -> Result<Self> {
        let field = c.field();
        let rs = s as f64 * padded_bound(c);
        if rs > COORD_LIMIT {
            return Err(Error::BoundOverflow(format!("scaled radius {rs:.3e}")));
        }
        let mut rows = Vec::new();
        let v_max = match field {
            Field::Rational => 0,
            Field::Quadratic(k) => (2.0 * rs / (k.disc.abs() as f64).sqrt()).floor() as i64 + 1,
        };
        let mut len = 0u64;
        for v in -v_max..=v_max {
            let vf = v as f64;
            let (lo, hi) = match field {
                Field::Rational => (-rs.floor() as i64 - 1, rs.floor() as i64 + 1),
                Field::Quadratic(k) if k.is_real() => {
                    let (w1, w2) = k.omega_embeddings();
                    let lo = (-rs - vf * w1).ceil().max((-rs - vf * w2).ceil());
                    let hi = (rs - vf * w1).floor().min((rs - vf * w2).floor());
                    (lo as i64 - 1, hi as i64 + 1)
                }
                Field::Quadratic(k) => {
                    let (re, im) = k.omega_embeddings();
                    let rem = rs * rs - (vf * im).powi(2);
                    if rem < 0.0 {
                        (1, 0)
                    } else {
                        let w = rem.sqrt();
                        let mid = -vf * re;
                        ((mid - w).ceil() as i64 - 1, (mid + w).floor() as i64 + 1)
                    }
                }
            };
            rows.push((lo, hi, len));
            if hi >= lo {
                len += (hi - lo + 1) as u64;
            }
            if len > cap {
                return Err(Error::CandidateCap { count: len, cap });
            }
        }
        Ok(Lattice {
            field,
            s: s as i128,
            v_min: -v_max,
            rows,
            len,
        })
    }

    fn index(&self, u: i128, v: i128) -> Option<u32> {
        let r = v.checked_sub(self.v_min as i128)?;
        if r < 0 || r >= self.rows.len() as i128 {
            return None;
        }
        let (lo, hi, off) = self.rows[r as usize];
        if u < lo as i128 || u > hi as i128 {
            return None;
        }
        Some((off as i128 + u - lo as i128) as u32)
    }

    fn coords(&self, idx: u32) -> (i64, i64) {
        let idx = idx as u64;
        let r = self
            .rows
            .partition_point(|&(lo, hi, off)| off + (hi - lo + 1).max(0) as u64 <= idx);
        let (lo, _, off) = self.rows[r];
        (lo + (idx - off) as i64, self.v_min + r as i64)
    }

    fn number(&self, idx: u32) -> Number {
        let (u, v) = self.coords(idx);
        let s = self.s as i64;
        Number::from_coords(self.field, Rational::frac(u, s), Rational::frac(v, s))
    }
}

/// The candidate graph: successor of each lattice point, or `SINK` when the
/// image leaves the candidate set.
const SINK: u32 = u32::MAX;

fn successor_graph(c: &Number, lat: &Lattice) -> Result<Vec<u32>> {
    let s = lat.s;
    let s2c = c.mul(&Number::from_coords(
        c.field(),
        Rational::from_integer(s * s),
        Rational::zero(),
    ))?;
    let (cx, cy) = s2c.integer_coords().expect("s^2 c is integral");
    let to_i128 = |b: BigInt| {
        b.to_i128()
            .filter(|x| x.unsigned_abs() < 1 << 100)
            .ok_or_else(|| Error::BoundOverflow(format!("coordinate {b}")))
    };
    let (cx, cy) = (to_i128(cx)?, to_i128(cy)?);
    let (a, n) = lat.field.a_n();
    let (a, n) = (a as i128, n as i128);
    let mut succ = Vec::with_capacity(lat.len as usize);
    for (r, &(lo, hi, _)) in lat.rows.iter().enumerate() {
        let v = (lat.v_min + r as i64) as i128;
        for u in lo as i128..=hi as i128 {
            let nu = u * u - n * v * v + cx;
            let nv = 2 * u * v + a * v * v + cy;
            let next = if nu % s == 0 && nv % s == 0 {
                lat.index(nu / s, nv / s).unwrap_or(SINK)
            } else {
                SINK
            };
            succ.push(next);
        }
    }
    Ok(succ)
}

/// Cycles of a partial functional graph, plus a mask of the nodes whose
/// orbit reaches a cycle.
fn graph_cycles(succ: &[u32]) -> (Vec<Vec<u32>>, Vec<bool>) {
    const UNSEEN: u32 = u32::MAX;
    const DONE: u32 = u32::MAX - 1;
    let mut state = vec![UNSEEN; succ.len()];
    let mut reaches = vec![false; succ.len()];
    let mut cycles = Vec::new();
    let mut path = Vec::new();
    for start in 0..succ.len() as u32 {
        if state[start as usize] != UNSEEN {
            continue;
        }
        path.clear();
        let mut x = start;
        let hit;
        loop {
            if x == SINK {
                hit = false;
                break;
            }
            let st = state[x as usize];
            if st == DONE {
                hit = reaches[x as usize];
                break;
            }
            if st != UNSEEN {
                cycles.push(path[st as usize..].to_vec());
                hit = true;
                break;
            }
            state[x as usize] = path.len() as u32;
            path.push(x);
            x = succ[x as usize];
        }
        for &i in &path {
            state[i as usize] = DONE;
            reaches[i as usize] = hit;
        }
    }
    (cycles, reaches)
}

fn number_key(z: &Number) -> (Rational, Rational) {
    (z.x().clone(), z.y())
}

fn canonical_cycles(mut cycles: Vec<Vec<Number>>) -> Vec<PeriodicPoint> {
    for cyc in &mut cycles {
        let start = (0..cyc.len())
            .min_by_key(|&i| number_key(&cyc[i]))
            .unwrap_or(0);
        cyc.rotate_left(start);
    }
    cycles.sort_by(|a, b| (a.len(), number_key(&a[0])).cmp(&(b.len(), number_key(&b[0]))));
    cycles
        .into_iter()
        .flat_map(|cyc| {
            let n = cyc.len() as u64;
            cyc.into_iter()
                .map(move |point| PeriodicPoint { point, period: n })
        })
        .collect()
}

struct GraphResult {
    periodic: Vec<PeriodicPoint>,
    preperiodic: Vec<Number>,
}

fn analyse(c: &Number, cap: u64, check_poles: bool) -> Result<GraphResult> {
    let Some(s) = scale_with(c, check_poles)? else {
        return Ok(GraphResult {
            periodic: Vec::new(),
            preperiodic: Vec::new(),
        });
    };
    let lat = Lattice::build(c, s, cap)?;
    let succ = successor_graph(c, &lat)?;
    let (cycles, reaches) = graph_cycles(&succ);
    let cycles = cycles
        .into_iter()
        .map(|cyc| cyc.into_iter().map(|i| lat.number(i)).collect())
        .collect();
    let preperiodic = (0..succ.len() as u32)
        .filter(|&i| reaches[i as usize])
        .map(|i| lat.number(i))
        .collect();
    Ok(GraphResult {
        periodic: canonical_cycles(cycles),
        preperiodic,
    })
}

/// Every affine periodic point of `z^2 + c` over the field of `c`.
///
/// Cycles of any length are found; `cap` bounds the number of lattice
/// candidates and is exceeded only with an explicit error.
pub fn find_periodic_points(c: &Number, cap: u64) -> Result<OrbitCertificate> {
    certificate(c, analyse(c, cap, true)?)
}

/// As [`find_periodic_points`], but searches the lattice even when an odd
/// pole already rules out periodic points.
pub fn find_periodic_points_unfiltered(c: &Number, cap: u64) -> Result<OrbitCertificate> {
    certificate(c, analyse(c, cap, false)?)
}

fn certificate(c: &Number, g: GraphResult) -> Result<OrbitCertificate> {
    let cert = OrbitCertificate {
        c: c.clone(),
        field_disc: c.field().disc(),
        points: g.periodic,
        preperiodic: None,
    };
    debug_assert!(cert.verify());
    Ok(cert)
}

/// Preperiodic points found from the lattice graph (nodes reaching a cycle).
pub fn preperiodic_points_by_lattice(c: &Number, cap: u64) -> Result<Vec<Number>> {
    Ok(analyse(c, cap, true)?.preperiodic)
}

/// Exact period of `alpha`, or `None` when it is not periodic.
pub fn exact_period(c: &Number, alpha: &Number) -> Result<Option<u64>> {
    if c.field() != alpha.field() {
        return Err(Error::FieldMismatch);
    }
    let Some(s) = lattice_scale(c)? else {
        return Ok(None);
    };
    let s = BigInt::from(s);
    let in_lattice = |z: &Number| {
        let y = z.y();
        (&s % z.x().denom()).is_zero() && (&s % y.denom()).is_zero()
    };
    let bound = padded_bound(c);
    let mut seen = std::collections::HashSet::new();
    let mut z = alpha.clone();
    for n in 1u64.. {
        if !in_lattice(&z) || z.max_abs() > bound || !seen.insert(z.clone()) {
            return Ok(None);
        }
        z = z.step(c)?;
        if z == *alpha {
            return Ok(Some(n));
        }
    }
    unreachable!()
}

/// The periodic points together with every preperiodic point, by repeated
/// extraction of square roots `z = +-sqrt(y - c)` until nothing new appears.
pub fn preperiodic_closure(c: &Number, cap: u64) -> Result<OrbitCertificate> {
    let mut cert = find_periodic_points(c, cap)?;
    let mut tails: HashMap<Number, u32> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for pp in &cert.points {
        tails.insert(pp.point.clone(), 0);
        order.push(pp.point.clone());
        queue.push_back(pp.point.clone());
    }
    while let Some(y) = queue.pop_front() {
        let Some(r) = y.sub(c)?.sqrt() else {
            continue;
        };
        let t = tails[&y] + 1;
        for z in [r.clone(), r.neg()] {
            if !tails.contains_key(&z) {
                tails.insert(z.clone(), t);
                order.push(z.clone());
                queue.push_back(z);
            }
        }
    }
    let mut pre: Vec<PreperiodicPoint> = order
        .into_iter()
        .map(|point| PreperiodicPoint {
            tail: tails[&point],
            point,
        })
        .collect();
    pre.sort_by_key(|a| (a.tail, number_key(&a.point)));
    cert.preperiodic = Some(pre);
    Ok(cert)
}
