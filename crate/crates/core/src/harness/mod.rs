//! Monte Carlo trials, sweeps and CSV output.
//!
//! Trials at a point use ChaCha8 streams `(point seed, trial index)` and are
//! reduced by pairwise summation in trial order, so results do not depend on
//! the number of worker threads.

mod csv;
mod suite;
mod sweep;
mod trial;

pub use csv::{emit_csv, meta_path, parse_csv, to_csv_string, write_csv, CSV_HEADER};
pub use suite::{run_suite, Check};
pub use sweep::{
    parse_values, place_user, point_config, point_seed, run_sweep, SweepResult, SweepRow,
    SweepSpec, SweepVar, CLUSTER_CENTER, CLUSTER_RADIUS,
};
pub use trial::{evaluate, run_trial, run_trials, trial_rng, TrialOutcome, TrialPlan};
