//! Domain types for (non-)stationary SSPs and the exact solvers behind the
//! regret ledger and the learners' known parameters.

mod drift;
mod instance;
mod solve;

pub use drift::{drift_stats, solve_segments, DriftSequence, DriftStats, SegmentSolution};
pub use instance::{
    validate_instance, CostDefect, EntryDefect, RowSumDefect, SspInstance, ValidationReport,
};
pub use solve::{
    bellman_backup, finite_horizon_policy_value, greedy_policy, policy_hitting_times,
    ssp_optimal_values, terminal_cost, PolicyTable, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
