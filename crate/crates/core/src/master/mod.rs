//! Learning under unknown drift: a terminating base learner, multi-scale
//! scheduling of base instances and block restarts on detected drift.

mod base;
mod malg;
mod meta;

pub use base::{BaseLearner, BaseSwitches, MvpBase, MvpBaseConfig, DEFAULT_KAPPA_B};
pub use malg::{Envelope, MalgSchedule};
pub use meta::{Master, MasterConfig, MasterCounts, MasterSwitches};
