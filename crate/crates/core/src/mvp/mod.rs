//! Optimistic model-based learning with periodic restarts.

mod counters;
mod doubling;
mod learner;
mod update;

pub use counters::Counters;
pub use doubling::{DoublingParams, MvpDoubling};
pub use learner::{restart_window, MvpConfig, NsMvp, Widening, WINDOW_CAP};
pub use update::{
    bonus, cost_lcb, iota, mean_and_variance, widened_update, ConfidenceConstants, Estimates,
    ProblemDims, ValueTables,
};
