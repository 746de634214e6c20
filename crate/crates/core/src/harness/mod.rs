//! Experiment configuration, execution and result persistence.

mod config;
mod eval;
mod ledger;
mod run;

pub use config::{
    Algorithm, Calibration, ExperimentConfig, InstanceSpec, KnownDrift, Preset, Windows, INSTANCE_STREAM,
};
pub use eval::{loglog_slope, ols, trend_report, TrendReport};
pub use ledger::{read_ledger, read_ledger_file, write_ledger, write_ledger_file, COLUMNS, LEDGER_VERSION};
pub use run::{
    build_learner, mean_std, run_seed, run_seeds, run_to_dir, thread_count, Aggregate, LearnerContext,
    SeedRun, SeedSummary, THREADS_ENV,
};
