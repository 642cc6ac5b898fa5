//! Exhaustive verification over parameters of bounded height.

mod engine;
mod enumerate;
mod run;

pub use engine::{
    refinement_schedule, CycleRecord, Engine, Outcome, SearchConfig, Verdict, DEFAULT_CERTIFY_FROM,
    DEFAULT_REFINE_LIMIT,
};
pub use enumerate::{
    enumerate_c, enumerate_level, lcm_passes, passes_filter, rationals_of_height,
    square_denominator_filter, square_ideal_filter, Candidate, Level,
};
pub use run::{
    load_checkpoint, run_verification, BlockResult, CaseRecord, Counts, Report, RunStatus, Summary,
};
