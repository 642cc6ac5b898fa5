//! Whole runs: block scheduling, checkpoints and the JSONL report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::engine::{CycleRecord, Engine, Outcome, SearchConfig, Verdict};
use super::enumerate::enumerate_level;

/// Report line for a parameter that refinement could not settle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub c: String,
    pub field: i64,
    pub verdict: Verdict,
    pub primes_used: u32,
    /// `None` stands for every period.
    pub residual_periods: Option<Vec<u64>>,
    pub certified_cycles: Vec<CycleRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub filtered: u64,
    pub type_good: u64,
    pub refined_good: u64,
    pub confirmed: u64,
    pub counterexample: u64,
    pub flagged: u64,
    pub unresolved: u64,
    pub max_primes_used: u32,
    /// Refinement primes needed, over the parameters settled by refinement.
    pub primes_used_histogram: BTreeMap<u32, u64>,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.filtered += o.filtered;
        self.type_good += o.type_good;
        self.refined_good += o.refined_good;
        self.confirmed += o.confirmed;
        self.counterexample += o.counterexample;
        self.flagged += o.flagged;
        self.unresolved += o.unresolved;
        self.max_primes_used = self.max_primes_used.max(o.max_primes_used);
        for (&k, &v) in &o.primes_used_histogram {
            *self.primes_used_histogram.entry(k).or_default() += v;
        }
    }

    fn record(&mut self, o: &Outcome) {
        match o.verdict {
            Verdict::FilteredNoPeriodic => self.filtered += 1,
            Verdict::TypeGood => self.type_good += 1,
            Verdict::RefinedGood { primes_used } => {
                self.refined_good += 1;
                *self.primes_used_histogram.entry(primes_used).or_default() += 1;
            }
            Verdict::Confirmed { .. } => self.confirmed += 1,
            Verdict::Counterexample { .. } => self.counterexample += 1,
            Verdict::Flagged => self.flagged += 1,
            Verdict::Unresolved { .. } => self.unresolved += 1,
        }
        self.max_primes_used = self.max_primes_used.max(o.primes_used);
    }

    pub fn total(&self) -> u64 {
        self.filtered
            + self.type_good
            + self.refined_good
            + self.confirmed
            + self.counterexample
            + self.flagged
            + self.unresolved
    }

    /// 0 verified, 1 counterexample, 2 unresolved or flagged cases remain.
    pub fn exit_code(&self) -> i32 {
        if self.counterexample > 0 {
            1
        } else if self.unresolved > 0 || self.flagged > 0 {
            2
        } else {
            0
        }
    }
}

/// One completed height level, as stored in the checkpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockResult {
    pub block_id: i64,
    pub config_hash: String,
    pub counts: Counts,
    pub records: Vec<CaseRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub config: SearchConfig,
    pub config_hash: String,
    pub counts: Counts,
    /// Every period seen in an oracle certificate.
    pub certified_periods: BTreeSet<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub records: Vec<CaseRecord>,
    pub summary: Summary,
}

impl Report {
    /// Records one per line, then `{"summary": ...}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        let summary = serde_json::json!({ "summary": &self.summary });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    pub fn exit_code(&self) -> i32 {
        self.summary.counts.exit_code()
    }

    pub fn records_with(&self, name: &str) -> impl Iterator<Item = &CaseRecord> {
        let name = name.to_string();
        self.records
            .iter()
            .filter(move |r| r.verdict.name() == name)
    }
}

/// Result of [`run_verification`]: a full report, or the number of blocks
/// completed before a requested stop.
#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Complete(Box<Report>),
    Interrupted { blocks_done: usize },
}

fn process_block(engine: &Engine, h: i64, hash: &str) -> BlockResult {
    let level = enumerate_level(&engine.field, h, true);
    let outcomes: Vec<Outcome> = level
        .candidates
        .par_iter()
        .map(|c| engine.verify(c))
        .collect();
    let mut counts = Counts {
        filtered: level.rejected,
        ..Counts::default()
    };
    let mut records = Vec::new();
    for (c, o) in level.candidates.iter().zip(outcomes) {
        counts.record(&o);
        if !matches!(
            o.verdict,
            Verdict::TypeGood | Verdict::FilteredNoPeriodic | Verdict::RefinedGood { .. }
        ) {
            records.push(CaseRecord {
                c: c.display(&engine.field),
                field: engine.field.disc(),
                verdict: o.verdict,
                primes_used: o.primes_used,
                residual_periods: o.residual,
                certified_cycles: o.cycles,
            });
        }
    }
    BlockResult {
        block_id: h,
        config_hash: hash.to_string(),
        counts,
        records,
    }
}

/// Completed blocks from a checkpoint file; a missing file is an empty one.
pub fn load_checkpoint(path: &Path, hash: &str) -> Result<BTreeMap<i64, BlockResult>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    let mut done = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let block: BlockResult = serde_json::from_str(line).map_err(|e| Error::Checkpoint {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if block.config_hash != hash {
            return Err(Error::Checkpoint {
                line: i + 1,
                reason: "written for a different configuration".into(),
            });
        }
        done.insert(block.block_id, block);
    }
    Ok(done)
}

fn append_checkpoint(path: &Path, blocks: &[BlockResult]) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut buf = String::new();
    for b in blocks {
        buf.push_str(&serde_json::to_string(b).expect("block serializes"));
        buf.push('\n');
    }
    f.write_all(buf.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Runs the whole search described by `config`.
pub fn run_verification(config: &SearchConfig) -> Result<RunStatus> {
    let engine = Engine::new(config.clone())?;
    let hash = config.config_hash();
    let mut done = match &config.checkpoint {
        Some(p) => load_checkpoint(p, &hash)?,
        None => BTreeMap::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut fresh = 0usize;
    for h in 1..=config.height_bound {
        if done.contains_key(&h) {
            continue;
        }
        if config.stop_after_blocks.is_some_and(|n| fresh >= n) {
            return Ok(RunStatus::Interrupted {
                blocks_done: done.len(),
            });
        }
        let block = pool.install(|| process_block(&engine, h, &hash));
        if let Some(p) = &config.checkpoint {
            append_checkpoint(p, std::slice::from_ref(&block))?;
        }
        done.insert(h, block);
        fresh += 1;
    }
    let mut counts = Counts::default();
    let mut records = Vec::new();
    for (_, block) in done
        .into_iter()
        .filter(|(h, _)| (1..=config.height_bound).contains(h))
    {
        counts.add(&block.counts);
        records.extend(block.records);
    }
    let certified_periods = records
        .iter()
        .flat_map(|r| r.certified_cycles.iter().map(|c| c.period))
        .collect();
    let report = Report {
        records,
        summary: Summary {
            config: config.clone(),
            config_hash: hash,
            counts,
            certified_periods,
        },
    };
    if let Some(p) = &config.report {
        fs::write(p, report.to_jsonl())?;
    }
    Ok(RunStatus::Complete(Box::new(report)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(cfg: &SearchConfig) -> Report {
        match run_verification(cfg).unwrap() {
            RunStatus::Complete(r) => *r,
            RunStatus::Interrupted { .. } => panic!("interrupted"),
        }
    }

    #[test]
    fn small_rational_run() {
        let r = complete(&SearchConfig::new(0, 40));
        assert_eq!(r.summary.counts.counterexample, 0);
        assert_eq!(r.exit_code(), 0);
        let total: u64 = (1..=40)
            .map(|h| {
                enumerate_level(&crate::arith::Field::Rational, h, false)
                    .candidates
                    .len() as u64
            })
            .sum();
        assert_eq!(r.summary.counts.total(), total);
    }

    #[test]
    fn checkpoint_resume_and_rejection() {
        let dir = tempfile::tempdir().unwrap();
        let ck = dir.path().join("ck.jsonl");
        let mut cfg = SearchConfig::new(0, 30);
        let full = complete(&cfg).to_jsonl();
        cfg.checkpoint = Some(ck.clone());
        cfg.stop_after_blocks = Some(15);
        assert_eq!(
            run_verification(&cfg).unwrap(),
            RunStatus::Interrupted { blocks_done: 15 }
        );
        cfg.stop_after_blocks = None;
        assert_eq!(complete(&cfg).to_jsonl(), full);
        let mut other = cfg.clone();
        other.max_period = 4;
        assert!(matches!(
            run_verification(&other),
            Err(Error::Checkpoint { line: 1, .. })
        ));
        let mut text = fs::read_to_string(&ck).unwrap();
        text.push_str("{not json\n");
        fs::write(&ck, text).unwrap();
        assert!(matches!(
            run_verification(&cfg),
            Err(Error::Checkpoint { line: 31, .. })
        ));
    }
}
