//! The four-context protocol and the experiments built on it: capacity
//! sweeps, epoch-locked S traces, and gradient-competition diagnostics.

mod diagnostics;
mod protocol;
mod sweep;
mod trace;

pub use diagnostics::{
    conflict_fraction, conflict_trace, gradient_conflict, loss_oscillation, unit_cosines,
    ConflictRecord, ConflictTrace, NORM_FLOOR,
};
pub use protocol::{
    config_hash, context_seed, derive_seed, evaluate_contexts, mix64, run_contexts,
    run_contexts_detailed, run_contexts_in_order, train_context, trial_seed, ContextRun,
};
pub use sweep::{
    aggregate, read_sweep_csv, sweep, Aggregate, ExperimentConfig, SweepOutput, SweepRecord,
    SweepRow, SWEEP_CSV_HEADER,
};
pub use trace::{epoch_trace, mean_slope, EpochTrace, SlopeSummary, TracePoint};
