//! Reproducible sweeps over problem size, depth, field and exponent.
//!
//! Each experiment is a pure function of its [`ExperimentConfig`]. Tasks
//! (grid point x restart) run as one flat parallel batch; results are
//! regrouped in grid order and written by a single writer at the end.

mod config;
mod fit;
mod output;
mod runs;
mod verify;

pub use config::{
    ExperimentConfig, ExperimentKind, OutputFormat, SchemeKind, DEFAULT_BASE_SEED, DEFAULT_RESTARTS,
};
pub use fit::{linear_fit, LinearFit};
pub use output::{
    emit_results, read_results, write_csv, write_json, ResultsDocument, GAP_HEADER, ITERATIONS_HEADER,
    P1_HEADER, SWEEP_HEADER,
};
pub use runs::{
    collapse_coordinate, critical_field, fit_gap_scaling, fit_iteration_scaling, fit_scaling_exponent,
    minimal_gap, run_experiment, run_field_sweep, run_gap_scaling, run_iteration_scaling, run_p1_table,
    run_scaling_experiment, GapFit, GapModel, GapRow, GapTable, IterationRow, P1Row, ScalingFit, SweepRow,
    Table, EXACT_RESIDUAL,
};
pub use verify::{max_symmetry_violation, min_p1_fidelity, power_identity_failures, verification_suite, Check};
