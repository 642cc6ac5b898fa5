//! S-types and the bad-type sieve.
//!
//! A type is the tuple of reductions of `c` at the primes of `S`. The sieve
//! stores every type whose intersected possible-period set escapes
//! `{1, ..., M}`; any `c` with a type outside that set is settled without
//! further work.
//!
//! Cache file layout (all integers little-endian):
//!
//! ```text
//! magic  b"PPSV"
//! u32    format version (1)
//! i64    field discriminant (0 for Q)
//! u32    period bound M
//! u32    number of primes
//! per prime: u32 p, u8 kind (0 rational, 1 split, 2 inert, 3 ramified),
//!            u8 index, u32 root (0 when absent)
//! u64    total types (saturating)
//! u64    bad-type count
//! per bad type: u128 key, ascending
//! ```

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::arith::{Field, Number};
use crate::error::{Error, Result};
use crate::ntheory::first_primes;
use crate::period::{possible_periods, PosPerSet};
use crate::residue::{primes_above_all, reduce_c, PrimeDesc, PrimeKind, ProjPoint, ResidueField};

const MAGIC: &[u8; 4] = b"PPSV";
const VERSION: u32 = 1;
/// Bad sets over type spaces up to this size are stored as a bitmap.
const DENSE_LIMIT: u128 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SType {
    /// One point per prime of `S`, in the order of `S`.
    pub coords: Vec<ProjPoint>,
}

/// Possible-period sets over `P^1` of the residue field, indexed by
/// [`ResidueField::proj_index`].
pub fn build_prime_table(field: &Field, prime: PrimeDesc) -> Vec<PosPerSet> {
    let rf = ResidueField::new(field, prime);
    (0..=rf.size() as u32)
        .map(|i| possible_periods(&rf, rf.proj_from_index(i)))
        .collect()
}

/// Primes above the first `n` rational primes, ascending.
pub fn sieve_primes(field: &Field, n: usize) -> Vec<PrimeDesc> {
    primes_above_all(field, &first_primes(n)).expect("small primes are in range")
}

/// Default `S`: five primes over `Q`, primes above four rational primes otherwise.
pub fn default_sieve_primes(field: &Field) -> Vec<PrimeDesc> {
    match field {
        Field::Rational => sieve_primes(field, 5),
        Field::Quadratic(_) => sieve_primes(field, 4),
    }
}

#[derive(Clone, Debug)]
enum BadSet {
    Dense(Vec<u64>),
    Sparse(HashSet<u128>),
}

impl BadSet {
    fn from_keys(keys: &[u128], total: u128) -> Self {
        if total <= DENSE_LIMIT {
            let mut bits = vec![0u64; (total as usize).div_ceil(64)];
            for &k in keys {
                bits[(k / 64) as usize] |= 1 << (k % 64);
            }
            BadSet::Dense(bits)
        } else {
            BadSet::Sparse(keys.iter().copied().collect())
        }
    }

    fn contains(&self, key: u128) -> bool {
        match self {
            BadSet::Dense(bits) => bits
                .get((key / 64) as usize)
                .is_some_and(|w| w >> (key % 64) & 1 == 1),
            BadSet::Sparse(set) => set.contains(&key),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SieveTable {
    pub field: Field,
    pub primes: Vec<PrimeDesc>,
    pub max_period: u64,
    tables: Vec<Vec<PosPerSet>>,
    radices: Vec<u128>,
    total: u128,
    /// Ascending.
    bad_keys: Vec<u128>,
    bad: BadSet,
}

/// Output of one incremental step: the bad keys for the primes so far.
struct Frontier {
    sets: Vec<PosPerSet>,
    index: HashMap<PosPerSet, u32>,
    entries: Vec<(u128, u32)>,
    weight: u128,
}

impl Frontier {
    fn new() -> Self {
        let mut f = Frontier {
            sets: Vec::new(),
            index: HashMap::new(),
            entries: Vec::new(),
            weight: 1,
        };
        let all = f.intern(PosPerSet::All);
        f.entries.push((0, all));
        f
    }

    fn intern(&mut self, s: PosPerSet) -> u32 {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.sets.push(s.clone());
        self.index.insert(s, id);
        id
    }

    /// Extends every partial type by one coordinate, keeping only the
    /// extensions whose running intersection still escapes `{1..M}`.
    fn extend(&mut self, table: &[PosPerSet], max_period: u64) -> Result<()> {
        let mut memo: HashMap<u32, Vec<(u128, u32)>> = HashMap::new();
        let old = std::mem::take(&mut self.entries);
        let mut next = Vec::new();
        for (key, sid) in old {
            if let Entry::Vacant(e) = memo.entry(sid) {
                let mut ext = Vec::new();
                for (r, entry) in table.iter().enumerate() {
                    let s = self.sets[sid as usize].intersect(entry);
                    if !s.within(max_period) {
                        ext.push((r as u128, self.intern(s)));
                    }
                }
                e.insert(ext);
            }
            for &(r, nid) in &memo[&sid] {
                next.push((key + r * self.weight, nid));
            }
        }
        self.entries = next;
        self.weight = self
            .weight
            .checked_mul(table.len() as u128)
            .ok_or(Error::KeyOverflow)?;
        Ok(())
    }

    fn sorted_keys(&self) -> Vec<u128> {
        let mut keys: Vec<u128> = self.entries.iter().map(|&(k, _)| k).collect();
        keys.sort_unstable();
        keys
    }
}

/// Builds the bad-type set for `S = primes` and bound `M` without walking the
/// full product of residue fields.
pub fn build_sieve(field: &Field, primes: &[PrimeDesc], max_period: u64) -> Result<SieveTable> {
    if primes.is_empty() {
        return Err(Error::Config("sieve needs at least one prime".into()));
    }
    let tables: Vec<Vec<PosPerSet>> = primes
        .iter()
        .map(|&p| build_prime_table(field, p))
        .collect();
    let mut frontier = Frontier::new();
    for t in &tables {
        frontier.extend(t, max_period)?;
    }
    Ok(SieveTable::assemble(
        *field,
        primes.to_vec(),
        max_period,
        tables,
        frontier.sorted_keys(),
    ))
}

/// One row of the type-count table.
#[derive(Clone, Debug, PartialEq)]
pub struct SieveStatsRow {
    pub n: usize,
    pub bad: u64,
    pub total: u128,
    pub proportion: f64,
}

/// Bad-type counts for `S` = primes above the first `N` rational primes,
/// `N = 1..=n_max`, from a single incremental pass.
pub fn sieve_stats(field: &Field, max_period: u64, n_max: usize) -> Result<Vec<SieveStatsRow>> {
    let mut frontier = Frontier::new();
    let mut rows = Vec::new();
    for (i, p) in first_primes(n_max).into_iter().enumerate() {
        for prime in primes_above_all(field, &[p])? {
            frontier.extend(&build_prime_table(field, prime), max_period)?;
        }
        let bad = frontier.entries.len() as u64;
        let total = frontier.weight;
        rows.push(SieveStatsRow {
            n: i + 1,
            bad,
            total,
            proportion: bad as f64 / total as f64,
        });
    }
    Ok(rows)
}

impl SieveTable {
    fn assemble(
        field: Field,
        primes: Vec<PrimeDesc>,
        max_period: u64,
        tables: Vec<Vec<PosPerSet>>,
        bad_keys: Vec<u128>,
    ) -> Self {
        let radices: Vec<u128> = tables.iter().map(|t| t.len() as u128).collect();
        let total = radices.iter().product();
        let bad = BadSet::from_keys(&bad_keys, total);
        SieveTable {
            field,
            primes,
            max_period,
            tables,
            radices,
            total,
            bad_keys,
            bad,
        }
    }

    pub fn total_types(&self) -> u128 {
        self.total
    }

    pub fn bad_count(&self) -> usize {
        self.bad_keys.len()
    }

    pub fn bad_keys(&self) -> &[u128] {
        &self.bad_keys
    }

    /// Possible-period table for the `i`-th prime of `S`.
    pub fn prime_table(&self, i: usize) -> &[PosPerSet] {
        &self.tables[i]
    }

    /// Mixed-radix key: `sum coord_i * prod_{j<i} (q_j + 1)`, infinity as `q_i`.
    pub fn type_key(&self, t: &SType) -> u128 {
        let idx: Vec<u32> = t
            .coords
            .iter()
            .zip(&self.primes)
            .map(|(&pt, &prime)| ResidueField::new(&self.field, prime).proj_index(pt))
            .collect();
        self.key_of_indices(&idx)
    }

    /// Key from per-prime projective indices.
    pub fn key_of_indices(&self, idx: &[u32]) -> u128 {
        let mut key = 0u128;
        let mut w = 1u128;
        for (&i, &r) in idx.iter().zip(&self.radices) {
            key += i as u128 * w;
            w *= r;
        }
        key
    }

    pub fn decode_key(&self, mut key: u128) -> SType {
        let coords = self
            .primes
            .iter()
            .zip(&self.radices)
            .map(|(&prime, &r)| {
                let i = (key % r) as u32;
                key /= r;
                ResidueField::new(&self.field, prime).proj_from_index(i)
            })
            .collect();
        SType { coords }
    }

    pub fn is_bad_key(&self, key: u128) -> bool {
        self.bad.contains(key)
    }

    pub fn is_bad(&self, t: &SType) -> bool {
        self.is_bad_key(self.type_key(t))
    }

    pub fn stype_of(&self, c: &Number) -> SType {
        stype_of(c, &self.primes)
    }

    /// Intersection of the per-prime possible-period sets of a type.
    pub fn posper_of_indices(&self, idx: &[u32]) -> PosPerSet {
        idx.iter()
            .zip(&self.tables)
            .fold(PosPerSet::All, |acc, (&i, t)| acc.intersect(&t[i as usize]))
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut buf = Vec::with_capacity(64 + 16 * self.bad_keys.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        write_header(&mut buf, &self.field, &self.primes, self.max_period);
        buf.extend_from_slice(&u64::try_from(self.total).unwrap_or(u64::MAX).to_le_bytes());
        buf.extend_from_slice(&(self.bad_keys.len() as u64).to_le_bytes());
        for k in &self.bad_keys {
            buf.extend_from_slice(&k.to_le_bytes());
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&buf)
    }

    /// Reads a cache file built for exactly this field, `S` and `M`.
    pub fn load(path: &Path, field: &Field, primes: &[PrimeDesc], max_period: u64) -> Option<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path).ok()?.read_to_end(&mut bytes).ok()?;
        let mut expected = Vec::new();
        expected.extend_from_slice(MAGIC);
        expected.extend_from_slice(&VERSION.to_le_bytes());
        write_header(&mut expected, field, primes, max_period);
        let rest = bytes.strip_prefix(expected.as_slice())?;
        let (_total, rest) = rest.split_first_chunk::<8>()?;
        let (count, rest) = rest.split_first_chunk::<8>()?;
        let count = u64::from_le_bytes(*count) as usize;
        if rest.len() != count.checked_mul(16)? {
            return None;
        }
        let keys: Vec<u128> = rest
            .chunks_exact(16)
            .map(|ch| u128::from_le_bytes(ch.try_into().unwrap()))
            .collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return None;
        }
        let tables = primes
            .iter()
            .map(|&p| build_prime_table(field, p))
            .collect();
        let table = Self::assemble(*field, primes.to_vec(), max_period, tables, keys);
        if table.bad_keys.last().is_some_and(|&k| k >= table.total) {
            return None;
        }
        Some(table)
    }
}

fn write_header(buf: &mut Vec<u8>, field: &Field, primes: &[PrimeDesc], max_period: u64) {
    buf.extend_from_slice(&field.disc().to_le_bytes());
    buf.extend_from_slice(&(max_period as u32).to_le_bytes());
    buf.extend_from_slice(&(primes.len() as u32).to_le_bytes());
    for pr in primes {
        let (kind, root) = match pr.kind {
            PrimeKind::Rational => (0u8, 0u32),
            PrimeKind::Split { root } => (1, root),
            PrimeKind::Inert => (2, 0),
            PrimeKind::Ramified { root } => (3, root),
        };
        buf.extend_from_slice(&pr.p.to_le_bytes());
        buf.push(kind);
        buf.push(pr.index);
        buf.extend_from_slice(&root.to_le_bytes());
    }
}

/// Loads the sieve from `cache` when it matches, otherwise builds it and
/// (best effort) refreshes the cache.
pub fn load_or_build(
    cache: Option<&Path>,
    field: &Field,
    primes: &[PrimeDesc],
    max_period: u64,
) -> Result<SieveTable> {
    if let Some(path) = cache {
        if let Some(t) = SieveTable::load(path, field, primes, max_period) {
            return Ok(t);
        }
    }
    let table = build_sieve(field, primes, max_period)?;
    if let Some(path) = cache {
        let _ = table.save(path);
    }
    Ok(table)
}

/// Coordinatewise reduction of `c`.
pub fn stype_of(c: &Number, primes: &[PrimeDesc]) -> SType {
    SType {
        coords: primes.iter().map(|p| reduce_c(c, p)).collect(),
    }
}
