//! Per-parameter verification: sieve lookup, refinement by further primes,
//! and oracle dispatch.

use std::path::PathBuf;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::Field;
use crate::error::{Error, Result};
use crate::ntheory::{mod_inv, primes_up_to};
use crate::oracle::{find_periodic_points, DEFAULT_CANDIDATE_CAP};
use crate::period::PosPerSet;
use crate::residue::{primes_above, reduce_c, PrimeDesc, PrimeKind, ResidueElem, ResidueField};
use crate::sieve::{build_prime_table, load_or_build, sieve_primes, SieveTable};

use super::enumerate::Candidate;

pub const DEFAULT_REFINE_LIMIT: usize = 60;
pub const DEFAULT_CERTIFY_FROM: u64 = 5;
/// Upper limit on the number of sieve primes (each contributes a key digit).
const MAX_SIEVE_PRIMES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// 0 selects `Q`.
    pub field_disc: i64,
    /// Non-logarithmic height bound `B`.
    pub height_bound: i64,
    pub max_period: u64,
    /// Sieve primes are those above the first `initial_primes` rational primes.
    pub initial_primes: usize,
    pub refine_limit: usize,
    /// Periods at or above this are settled by the oracle rather than by
    /// refinement, so that large certified periods are reported.
    pub certify_from: u64,
    pub manual: bool,
    pub candidate_cap: u64,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub checkpoint: Option<PathBuf>,
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[serde(skip)]
    pub sieve_cache: Option<PathBuf>,
    /// Stop after this many newly completed blocks (simulated interruption).
    #[serde(skip)]
    pub stop_after_blocks: Option<usize>,
}

impl SearchConfig {
    /// Defaults: `M = 3` and five sieve primes over `Q`; `M = 6` and primes
    /// above four rational primes over quadratic fields.
    pub fn new(field_disc: i64, height_bound: i64) -> Self {
        let rational = field_disc == 0;
        SearchConfig {
            field_disc,
            height_bound,
            max_period: if rational { 3 } else { 6 },
            initial_primes: if rational { 5 } else { 4 },
            refine_limit: DEFAULT_REFINE_LIMIT,
            certify_from: DEFAULT_CERTIFY_FROM,
            manual: false,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            workers: 1,
            checkpoint: None,
            report: None,
            sieve_cache: None,
            stop_after_blocks: None,
        }
    }

    pub fn validate(&self) -> Result<Field> {
        let field = Field::from_disc(self.field_disc)?;
        if self.max_period < 1 {
            return Err(Error::Config("max period must be at least 1".into()));
        }
        if self.height_bound < 1 {
            return Err(Error::Config("height bound must be at least 1".into()));
        }
        if self.initial_primes < 1 {
            return Err(Error::Config("need at least one sieve prime".into()));
        }
        if self.refine_limit < self.initial_primes {
            return Err(Error::Config(
                "refine limit is below the sieve prime count".into(),
            ));
        }
        if sieve_primes(&field, self.initial_primes).len() > MAX_SIEVE_PRIMES {
            return Err(Error::Config("too many sieve primes".into()));
        }
        if self.height_bound > i64::from(u32::MAX) {
            return Err(Error::Config("height bound too large".into()));
        }
        Ok(field)
    }

    /// Period bound enforced by the sieve and by refinement.
    pub fn settle_bound(&self) -> u64 {
        self.max_period
            .min(self.certify_from.saturating_sub(1))
            .max(1)
    }

    /// Hex SHA-256 of the fields that determine the report.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Outcome of verifying one parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    FilteredNoPeriodic,
    TypeGood,
    RefinedGood { primes_used: u32 },
    Confirmed { periods: Vec<u64> },
    Counterexample { point: String, period: u64 },
    Flagged,
    Unresolved { diagnostic: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::FilteredNoPeriodic => "FilteredNoPeriodic",
            Verdict::TypeGood => "TypeGood",
            Verdict::RefinedGood { .. } => "RefinedGood",
            Verdict::Confirmed { .. } => "Confirmed",
            Verdict::Counterexample { .. } => "Counterexample",
            Verdict::Flagged => "Flagged",
            Verdict::Unresolved { .. } => "Unresolved",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub period: u64,
    pub points: Vec<String>,
}

/// Verdict plus the evidence behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub primes_used: u32,
    /// `None` stands for every period.
    pub residual: Option<Vec<u64>>,
    pub cycles: Vec<CycleRecord>,
}

/// Reduction data for one prime, with inverse tables for the hot path.
struct PrimeCtx {
    desc: PrimeDesc,
    rf: ResidueField,
    p: i64,
    inv: Vec<u32>,
    /// For split primes: `(p^j, w mod p^j)` for `j = 1, 2, ...` while `p^j < 2^62`.
    lifts: Vec<(u64, u64)>,
}

/// `w mod p^j` for growing `j`, lifting the simple root `t` of `T^2 - aT + n`.
fn root_lifts(field: &Field, p: u64, root: u32) -> Vec<(u64, u64)> {
    let (a, n) = field.a_n();
    let (a, n) = (a as i128, n as i128);
    let mut out = vec![(p, root as u64)];
    let mut t = root as i128;
    let mut m = p as i128;
    while m * (p as i128) < 1 << 62 {
        m *= p as i128;
        let f = (t * t - a * t + n).rem_euclid(m);
        let df = (2 * t - a).rem_euclid(m);
        let inv = mod_inv_i128(df, m);
        t = (t - f * inv % m).rem_euclid(m);
        out.push((m as u64, t as u64));
    }
    out
}

fn mod_inv_i128(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a, m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(m)
}

impl PrimeCtx {
    fn new(field: &Field, desc: PrimeDesc) -> Self {
        let p = desc.p as u64;
        let inv = (0..p).map(|x| mod_inv(x, p).unwrap_or(0) as u32).collect();
        let lifts = match desc.kind {
            PrimeKind::Split { root } => root_lifts(field, p, root),
            _ => Vec::new(),
        };
        PrimeCtx {
            rf: ResidueField::new(field, desc),
            desc,
            p: p as i64,
            inv,
            lifts,
        }
    }

    fn residue(&self, n: i64, d: i64) -> Option<u64> {
        let dr = d.rem_euclid(self.p) as usize;
        if dr == 0 {
            return None;
        }
        let nr = n.rem_euclid(self.p) as u64;
        Some(nr * self.inv[dr] as u64 % self.p as u64)
    }

    /// Index of the reduction of `c` in `P^1`, infinity at `q`.
    fn proj_index(&self, c: &Candidate, field: &Field) -> u32 {
        let p = self.p as u64;
        match (self.residue(c.xn, c.xd), self.residue(c.yn, c.yd)) {
            (Some(x), Some(y)) => match self.desc.kind {
                PrimeKind::Rational => x as u32,
                PrimeKind::Inert => self.rf.index(ResidueElem {
                    u0: x as u32,
                    u1: y as u32,
                }),
                PrimeKind::Split { root } | PrimeKind::Ramified { root } => {
                    ((x + y * root as u64) % p) as u32
                }
            },
            _ => match self.desc.kind {
                PrimeKind::Split { .. } => self.split_pole(c).unwrap_or_else(|| {
                    self.rf
                        .proj_index(reduce_c(&c.to_number(field), &self.desc))
                }),
                _ => self.rf.size() as u32,
            },
        }
    }

    /// Split prime dividing the denominator `L`: `c = (A + C w)/L` maps to
    /// `(A + C t)/L` in `Z_p`, where part of `L` may cancel.
    fn split_pole(&self, c: &Candidate) -> Option<u32> {
        let p = self.p as u64;
        let (xd, yd) = (c.xd as u64, c.yd as u64);
        let l = xd / crate::ntheory::gcd(xd, yd) * yd;
        let k = crate::ntheory::valuation_u64(l, p) as usize;
        let &(m, t) = self.lifts.get(k)?;
        let a = (c.xn as i128 * (l / xd) as i128).rem_euclid(m as i128) as u128;
        let cc = (c.yn as i128 * (l / yd) as i128).rem_euclid(m as i128) as u128;
        let num = ((a + cc * t as u128) % m as u128) as u64;
        let v = if num == 0 {
            k + 1
        } else {
            crate::ntheory::valuation_u64(num, p) as usize
        };
        Some(match v.cmp(&k) {
            std::cmp::Ordering::Less => self.rf.size() as u32,
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Equal => {
                let pk = p.pow(k as u32);
                let unit = (l / pk) % p;
                ((num / pk) % p * self.inv[unit as usize] as u64 % p) as u32
            }
        })
    }
}

struct RefinePrime {
    field: Field,
    ctx: PrimeCtx,
    table: OnceLock<Vec<PosPerSet>>,
}

impl RefinePrime {
    /// Built on first use; refinement rarely reaches the later primes.
    fn table(&self) -> &[PosPerSet] {
        self.table
            .get_or_init(|| build_prime_table(&self.field, self.ctx.desc))
    }
}

/// The first `count` primes of the field outside `exclude`, ascending by
/// norm, then by rational prime and index.
pub fn refinement_schedule(field: &Field, exclude: &[PrimeDesc], count: usize) -> Vec<PrimeDesc> {
    let mut limit = 64u64;
    loop {
        let mut all: Vec<PrimeDesc> = primes_up_to(limit)
            .into_iter()
            .flat_map(|p| primes_above(field, p).expect("prime in range"))
            .filter(|d| d.norm() <= limit && !exclude.contains(d))
            .collect();
        all.sort_by_key(|d| (d.norm(), d.p, d.index));
        if all.len() >= count || limit * 2 >= crate::residue::MAX_PRIME {
            all.truncate(count);
            return all;
        }
        limit *= 2;
    }
}

pub struct Engine {
    pub config: SearchConfig,
    pub field: Field,
    sieve: SieveTable,
    sieve_ctx: Vec<PrimeCtx>,
    refine: Vec<RefinePrime>,
    bound: u64,
}

impl Engine {
    pub fn new(config: SearchConfig) -> Result<Self> {
        let field = config.validate()?;
        let primes = sieve_primes(&field, config.initial_primes);
        let bound = config.settle_bound();
        let sieve = load_or_build(config.sieve_cache.as_deref(), &field, &primes, bound)?;
        let sieve_ctx = primes.iter().map(|&d| PrimeCtx::new(&field, d)).collect();
        // bad-reduction primes are skipped, so keep spares beyond the limit
        let refine = refinement_schedule(&field, &primes, config.refine_limit + 64)
            .into_iter()
            .map(|d| RefinePrime {
                field,
                ctx: PrimeCtx::new(&field, d),
                table: OnceLock::new(),
            })
            .collect();
        Ok(Engine {
            config,
            field,
            sieve,
            sieve_ctx,
            refine,
            bound,
        })
    }

    pub fn sieve(&self) -> &SieveTable {
        &self.sieve
    }

    /// Verifies a parameter that passed the denominator filter.
    pub fn verify(&self, c: &Candidate) -> Outcome {
        let mut buf = [0u32; MAX_SIEVE_PRIMES];
        let idx = &mut buf[..self.sieve_ctx.len()];
        for (slot, ctx) in idx.iter_mut().zip(&self.sieve_ctx) {
            *slot = ctx.proj_index(c, &self.field);
        }
        if !self.sieve.is_bad_key(self.sieve.key_of_indices(idx)) {
            return Outcome {
                verdict: Verdict::TypeGood,
                primes_used: 0,
                residual: None,
                cycles: Vec::new(),
            };
        }
        let mut running = self.sieve.posper_of_indices(idx);
        let mut used = 0u32;
        for r in &self.refine {
            if running.within(self.bound) || used as usize >= self.config.refine_limit {
                break;
            }
            let i = r.ctx.proj_index(c, &self.field);
            if i as u64 == r.ctx.rf.size() {
                continue;
            }
            running = running.intersect(&r.table()[i as usize]);
            used += 1;
        }
        let residual = running.as_slice().map(<[u64]>::to_vec);
        if running.within(self.bound) {
            return Outcome {
                verdict: Verdict::RefinedGood { primes_used: used },
                primes_used: used,
                residual,
                cycles: Vec::new(),
            };
        }
        if self.config.manual {
            return Outcome {
                verdict: Verdict::Flagged,
                primes_used: used,
                residual,
                cycles: Vec::new(),
            };
        }
        let (verdict, cycles) = self.certify(c);
        Outcome {
            verdict,
            primes_used: used,
            residual,
            cycles,
        }
    }

    fn certify(&self, c: &Candidate) -> (Verdict, Vec<CycleRecord>) {
        let number = c.to_number(&self.field);
        let cert = match find_periodic_points(&number, self.config.candidate_cap) {
            Ok(cert) => cert,
            Err(e) => {
                return (
                    Verdict::Unresolved {
                        diagnostic: e.to_string(),
                    },
                    Vec::new(),
                )
            }
        };
        if !cert.verify() {
            return (
                Verdict::Unresolved {
                    diagnostic: "certificate failed exact re-verification".into(),
                },
                Vec::new(),
            );
        }
        let cycles: Vec<CycleRecord> = cert
            .cycles()
            .into_iter()
            .map(|cyc| CycleRecord {
                period: cyc.len() as u64,
                points: cyc.iter().map(ToString::to_string).collect(),
            })
            .collect();
        let verdict = match cert
            .points
            .iter()
            .find(|p| p.period > self.config.max_period)
        {
            Some(p) => Verdict::Counterexample {
                point: p.point.to_string(),
                period: p.period,
            },
            None => Verdict::Confirmed {
                periods: cert.periods().into_iter().collect(),
            },
        };
        (verdict, cycles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::enumerate::enumerate_c;

    #[test]
    fn schedule_is_by_norm() {
        let field = Field::from_disc(-4).unwrap();
        let s = sieve_primes(&field, 2);
        let sched = refinement_schedule(&field, &s, 8);
        let norms: Vec<u64> = sched.iter().map(|d| d.norm()).collect();
        assert_eq!(norms, vec![5, 5, 13, 13, 17, 17, 29, 29]);
        let sched = refinement_schedule(&field, &s, 40);
        assert!(sched.iter().any(|d| d.norm() == 49));
        assert!(sched.windows(2).all(|w| w[0].norm() <= w[1].norm()));
    }

    #[test]
    fn fast_reduction_matches_exact() {
        for d in [0, -3, -4, 5, 17, 33, -7, -15, 41] {
            let field = Field::from_disc(d).unwrap();
            let primes = refinement_schedule(&field, &[], 20);
            let ctxs: Vec<PrimeCtx> = primes.iter().map(|&p| PrimeCtx::new(&field, p)).collect();
            for c in enumerate_c(&field, 7, false) {
                let n = c.to_number(&field);
                for ctx in &ctxs {
                    let exact = ctx.rf.proj_index(reduce_c(&n, &ctx.desc));
                    assert_eq!(ctx.proj_index(&c, &field), exact, "c={n} p={:?}", ctx.desc);
                }
            }
        }
    }

    fn verify(d: i64, m: u64, c: Candidate) -> Outcome {
        let mut cfg = SearchConfig::new(d, 10);
        cfg.max_period = m;
        Engine::new(cfg).unwrap().verify(&c)
    }

    #[test]
    fn verdict_examples() {
        let o = verify(0, 3, Candidate::rational(-29, 16));
        assert!(matches!(
            o.verdict,
            Verdict::TypeGood | Verdict::RefinedGood { .. }
        ));
        let o = verify(
            33,
            6,
            Candidate {
                xn: -71,
                xd: 48,
                yn: 0,
                yd: 1,
            },
        );
        assert_eq!(o.verdict, Verdict::Confirmed { periods: vec![6] });
        assert_eq!(o.cycles.len(), 1);
        let o = verify(
            -3,
            3,
            Candidate {
                xn: 1,
                xd: 4,
                yn: 1,
                yd: 4,
            },
        );
        assert_eq!(o.verdict, Verdict::Confirmed { periods: vec![1] });
        assert_eq!(o.primes_used as usize, DEFAULT_REFINE_LIMIT);
    }

    #[test]
    fn config_checks() {
        let mut cfg = SearchConfig::new(0, 10);
        assert!(cfg.validate().is_ok());
        cfg.refine_limit = 2;
        assert!(cfg.validate().is_err());
        assert!(SearchConfig::new(8 * 4, 10).validate().is_err());
        let a = SearchConfig::new(0, 10);
        let mut b = a.clone();
        b.workers = 8;
        assert_eq!(a.config_hash(), b.config_hash());
        b.max_period = 4;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.settle_bound(), 3);
        assert_eq!(SearchConfig::new(-3, 10).settle_bound(), 4);
    }
}
