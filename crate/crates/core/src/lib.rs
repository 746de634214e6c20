//! Dynamic-regret laboratory for non-stationary stochastic shortest path.
//!
//! The crate bundles exact solvers ([`model`]), drifting environment
//! generators ([`envgen`]), the interval-based simulator ([`sim`]), the
//! learners ([`mvp`], [`mvptest`], [`master`], [`baselines`]) and the
//! experiment harness ([`harness`]).

pub mod baselines;
pub mod envgen;
pub mod master;
pub mod error;
pub mod harness;
pub mod model;
pub mod mvp;
pub mod mvptest;
pub mod sim;

pub use error::{Error, Result};
