//! Optimistic learning with drift correction, non-stationarity tests and a
//! two-phase router.

mod learner;
mod router;
mod stats;

pub use learner::{MvpTest, MvpTestConfig, TestSwitches};
pub use router::{Phase, TwoPhase};
pub use stats::{threshold_chi_c, threshold_chi_p, TestStats, ThresholdScales};
