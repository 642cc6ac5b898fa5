use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use periodcert::arith::{Field, Number};
use periodcert::oracle::{find_periodic_points, preperiodic_closure, DEFAULT_CANDIDATE_CAP};
use periodcert::search::{run_verification, RunStatus, SearchConfig};
use periodcert::sieve::sieve_stats;

#[derive(Parser, Debug)]
#[command(
    name = "periodcert",
    version,
    about = "Certify periods of rational points of z^2 + c"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Fundamental discriminant of the ground field; 0 for Q.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    field_disc: i64,
    /// Height bound B: every coordinate numerator and denominator at most B.
    #[arg(long, default_value_t = 100)]
    height_bound: i64,
    /// Period bound M (default 3 over Q, 6 over quadratic fields).
    #[arg(long)]
    max_period: Option<u64>,
    /// Sieve over the primes above the first N rational primes.
    #[arg(long)]
    initial_primes: Option<usize>,
    #[arg(long)]
    refine_limit: Option<usize>,
    /// Periods at or above this value are certified by the oracle.
    #[arg(long)]
    certify_from: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Binary sieve cache; rebuilt when missing or stale.
    #[arg(long)]
    sieve_cache: Option<PathBuf>,
    /// Print the type-count table for N = 1..=N_MAX and exit.
    #[arg(long, value_name = "N_MAX")]
    stats_table: Option<usize>,
    /// List unsettled parameters instead of calling the oracle.
    #[arg(long)]
    manual: bool,
    /// Stop after this many new blocks (resume later from the checkpoint).
    #[arg(long)]
    max_blocks: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the periodic-point certificate of one parameter as JSON.
    Oracle {
        /// The parameter, as `p/q` or `x/b+y/d*w`.
        #[arg(allow_hyphen_values = true)]
        c: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        field_disc: i64,
        /// Include every preperiodic point.
        #[arg(long)]
        preperiodic: bool,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        candidate_cap: u64,
    },
}

fn oracle(c: &str, disc: i64, preperiodic: bool, cap: u64) -> Result<ExitCode> {
    let field = Field::from_disc(disc)?;
    let c = Number::parse(field, c)?;
    let cert = if preperiodic {
        preperiodic_closure(&c, cap)?
    } else {
        find_periodic_points(&c, cap)?
    };
    println!("{}", serde_json::to_string_pretty(&cert)?);
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let field = Field::from_disc(args.field_disc)?;
    let mut cfg = SearchConfig::new(args.field_disc, args.height_bound);
    if let Some(m) = args.max_period {
        cfg.max_period = m;
    }
    if let Some(n) = args.stats_table {
        println!("N\tbad\ttotal\tproportion");
        for row in sieve_stats(&field, cfg.max_period, n)? {
            println!(
                "{}\t{}\t{}\t{:.5e}",
                row.n, row.bad, row.total, row.proportion
            );
        }
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(n) = args.initial_primes {
        cfg.initial_primes = n;
    }
    if let Some(n) = args.refine_limit {
        cfg.refine_limit = n;
    }
    if let Some(n) = args.certify_from {
        cfg.certify_from = n;
    }
    cfg.manual = args.manual;
    cfg.workers = args.threads;
    cfg.checkpoint = args.checkpoint;
    cfg.report = args.report;
    cfg.sieve_cache = args.sieve_cache;
    cfg.stop_after_blocks = args.max_blocks;
    match run_verification(&cfg).context("verification run failed")? {
        RunStatus::Interrupted { blocks_done } => {
            eprintln!("stopped with {blocks_done} blocks checkpointed");
            Ok(ExitCode::from(2))
        }
        RunStatus::Complete(report) => {
            let counts = &report.summary.counts;
            eprintln!("{}", serde_json::to_string(counts)?);
            if cfg.report.is_none() {
                print!("{}", report.to_jsonl());
            }
            Ok(ExitCode::from(report.exit_code() as u8))
        }
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Some(Command::Oracle {
            c,
            field_disc,
            preperiodic,
            candidate_cap,
        }) => oracle(&c, field_disc, preperiodic, candidate_cap),
        None => run(cli.run),
    }
}
