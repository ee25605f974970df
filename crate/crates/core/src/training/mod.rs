//! Pilot sequences, training-beam schedules and amplification tuning.

mod amplification;
mod dft;
mod golden;
mod pilots;
mod schedule;

pub use amplification::{
    closed_form_a, feasible_range_a, optimize_amplification, oracle_optimum, Aggregates,
    AmplificationSolution, AoOptions, FeasibleRange, OracleOptimum, TraceEntry, UpdateRule,
    AMPLITUDE_FLOOR,
};
pub use dft::{dft_basis, DftBasis};
pub use golden::golden_section_minimize;
pub use pilots::{build_pilots, build_pilots_for, PilotBook};
pub use schedule::{build_baseline_schedule, build_dft_schedule, BeamSchedule, FEASIBILITY_SLACK};
