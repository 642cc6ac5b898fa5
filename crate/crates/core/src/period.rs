//! Cycle structure of `z -> z^2 + c` over a residue field and the resulting
//! sets of possible global periods.
//!
//! For a cycle of length `m` whose multiplier has multiplicative order `r`,
//! a periodic point of the global map reducing onto that cycle has exact
//! period `m`, `m*r`, or `m*r*p^e` with `p^(e-1) <= 2 v(p)/(p-1)`, where
//! `v(p)` is the ramification index of the prime. A zero multiplier admits
//! only `m`.

use serde::{Deserialize, Serialize};

use crate::residue::{ProjPoint, ResidueElem, ResidueField};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleInfo {
    /// The cycle in orbit order.
    pub points: Vec<ResidueElem>,
    pub period: usize,
    pub multiplier: ResidueElem,
    /// Order of the multiplier in `k^*`; `None` exactly when it is zero.
    pub order: Option<u64>,
}

/// Possible exact periods: a finite set, or everything (bad reduction).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PosPerSet {
    /// Sorted, deduplicated.
    Finite(Vec<u64>),
    All,
}

impl PosPerSet {
    pub fn finite(mut v: Vec<u64>) -> Self {
        v.sort_unstable();
        v.dedup();
        PosPerSet::Finite(v)
    }

    pub fn intersect(&self, other: &PosPerSet) -> PosPerSet {
        match (self, other) {
            (PosPerSet::All, x) | (x, PosPerSet::All) => x.clone(),
            (PosPerSet::Finite(a), PosPerSet::Finite(b)) => {
                let (mut i, mut j) = (0, 0);
                let mut out = Vec::new();
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            out.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                PosPerSet::Finite(out)
            }
        }
    }

    /// `self` is contained in `{1, ..., bound}`.
    pub fn within(&self, bound: u64) -> bool {
        match self {
            PosPerSet::All => false,
            PosPerSet::Finite(v) => v.last().is_none_or(|&m| m <= bound),
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            PosPerSet::All => true,
            PosPerSet::Finite(v) => v.binary_search(&n).is_ok(),
        }
    }

    /// Any element `>= n`.
    pub fn reaches(&self, n: u64) -> bool {
        match self {
            PosPerSet::All => true,
            PosPerSet::Finite(v) => v.last().is_some_and(|&m| m >= n),
        }
    }

    pub fn is_subset(&self, other: &PosPerSet) -> bool {
        match (self, other) {
            (_, PosPerSet::All) => true,
            (PosPerSet::All, PosPerSet::Finite(_)) => false,
            (PosPerSet::Finite(a), PosPerSet::Finite(_)) => a.iter().all(|&x| other.contains(x)),
        }
    }

    pub fn as_slice(&self) -> Option<&[u64]> {
        match self {
            PosPerSet::All => None,
            PosPerSet::Finite(v) => Some(v),
        }
    }
}

/// All cycles of `z -> z^2 + c` on the `q` elements of the residue field.
pub fn cycle_decomposition(field: &ResidueField, c: ResidueElem) -> Vec<CycleInfo> {
    let succ = field.successor_table(c);
    cycles_of(field, &succ)
}

const UNSEEN: u32 = u32::MAX;
const DONE: u32 = u32::MAX - 1;

fn cycles_of(field: &ResidueField, succ: &[u32]) -> Vec<CycleInfo> {
    // state[i]: UNSEEN, DONE, or the position of i on the current walk
    let mut state = vec![UNSEEN; succ.len()];
    let mut path: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    for start in 0..succ.len() as u32 {
        if state[start as usize] != UNSEEN {
            continue;
        }
        path.clear();
        let mut x = start;
        while state[x as usize] == UNSEEN {
            state[x as usize] = path.len() as u32;
            path.push(x);
            x = succ[x as usize];
        }
        let s = state[x as usize];
        if s != DONE {
            let points: Vec<ResidueElem> = path[s as usize..]
                .iter()
                .map(|&i| field.from_index(i))
                .collect();
            let multiplier = multiplier(field, &points);
            out.push(CycleInfo {
                period: points.len(),
                order: field.mult_order(multiplier),
                multiplier,
                points,
            });
        }
        for &i in &path {
            state[i as usize] = DONE;
        }
    }
    out
}

/// `(phi^m)'` along a cycle: the product of `2z` over its points.
pub fn multiplier(field: &ResidueField, cycle: &[ResidueElem]) -> ResidueElem {
    let two = field.elem(2, 0);
    cycle.iter().fold(ResidueElem::ONE, |acc, &z| {
        field.mul(acc, field.mul(two, z))
    })
}

pub fn mult_order(field: &ResidueField, lambda: ResidueElem) -> Option<u64> {
    field.mult_order(lambda)
}

/// Exponents `e >= 1` with `p^(e-1) * (p-1) <= 2 * ram`.
pub fn lifting_exponents(p: u64, ram: u32) -> Vec<u32> {
    let bound = 2 * ram as u64;
    (1u32..)
        .take_while(|&e| p.pow(e - 1) * (p - 1) <= bound)
        .collect()
}

/// Periods allowed for a cycle `(m, r)` at a prime with characteristic `p`.
pub(crate) fn cycle_periods(m: u64, order: Option<u64>, p: u64, exps: &[u32]) -> Vec<u64> {
    let mut out = vec![m];
    if let Some(r) = order {
        out.push(m * r);
        out.extend(exps.iter().map(|&e| m * r * p.pow(e)));
    }
    out
}

/// The possible-period set attached to a reduced parameter.
pub fn possible_periods(field: &ResidueField, c: ProjPoint) -> PosPerSet {
    let ProjPoint::Affine(c) = c else {
        return PosPerSet::All;
    };
    let p = field.p();
    let exps = lifting_exponents(p, field.prime.e());
    let mut all = Vec::new();
    for cyc in cycle_decomposition(field, c) {
        all.extend(cycle_periods(cyc.period as u64, cyc.order, p, &exps));
    }
    PosPerSet::finite(all)
}

pub fn posper_intersect(sets: &[PosPerSet]) -> PosPerSet {
    sets.iter().fold(PosPerSet::All, |acc, s| acc.intersect(s))
}
