use serde::{Deserialize, Serialize};

use super::counters::Counters;
use super::update::{iota, widened_update, ConfidenceConstants, Estimates, ProblemDims, ValueTables};
use crate::error::{Error, Result};
use crate::sim::{IntervalRecord, Learner, LearnerStats, Telemetry};

/// Window used when a drift budget is zero: restarts effectively never happen.
pub const WINDOW_CAP: u64 = 1 << 31;

/// How the optimistic bias `x` is chosen at each update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Widening {
    /// Start at `1/(mH)` and double until `max Q ≤ B/4`.
    #[default]
    Doubling,
    /// A single pass with `x = 0`.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvpConfig {
    pub dims: ProblemDims,
    pub window_c: u64,
    pub window_p: u64,
    pub consts: ConfidenceConstants,
    pub widening: Widening,
}

impl MvpConfig {
    /// Configuration without restarts.
    pub fn new(dims: ProblemDims) -> Self {
        Self {
            dims,
            window_c: WINDOW_CAP,
            window_p: WINDOW_CAP,
            consts: ConfidenceConstants::default(),
            widening: Widening::Doubling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.dims;
        if self.window_c == 0 || self.window_p == 0 {
            return Err(Error::InvalidConfig("restart windows must be at least 1".into()));
        }
        if !(d.delta > 0.0 && d.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta = {} outside (0, 1)", d.delta)));
        }
        if d.num_states == 0 || d.num_actions == 0 || d.horizon == 0 || d.episodes == 0 {
            return Err(Error::InvalidConfig("S, A, H and K must be positive".into()));
        }
        Ok(())
    }
}

/// Restart window `⌈scale^{1/3} (span / (Δ·T))^{2/3}⌉` clamped to `[1, cap]`.
pub fn restart_window(scale: f64, span: f64, drift: f64, time: f64, cap: u64) -> u64 {
    if drift <= 0.0 || time <= 0.0 {
        return cap;
    }
    let w = (scale.cbrt() * (span / (drift * time)).powf(2.0 / 3.0)).ceil();
    if !w.is_finite() || w >= cap as f64 {
        cap
    } else {
        (w as u64).max(1)
    }
}

/// Optimistic model-based learner with periodic cost and transition restarts.
#[derive(Debug, Clone)]
pub struct NsMvp {
    cfg: MvpConfig,
    counters: Counters,
    tables: ValueTables,
    m: usize,
    stats: LearnerStats,
}

impl NsMvp {
    pub fn new(cfg: MvpConfig) -> Self {
        let d = cfg.dims;
        let mut learner = Self {
            cfg,
            counters: Counters::new(d.num_states, d.num_actions),
            tables: ValueTables::new(d.num_states, d.num_actions, d.horizon),
            m: 1,
            stats: LearnerStats::default(),
        };
        learner.update();
        learner
    }

    fn update(&mut self) {
        let est = Estimates::from_counters(&self.counters, iota(&self.cfg.dims, self.m, &self.cfg.consts));
        match self.cfg.widening {
            Widening::Doubling => {
                widened_update(&mut self.tables, &est, &self.cfg.dims, self.m, &self.cfg.consts)
            }
            Widening::Off => self.tables.backward_pass(
                &est,
                &est.cost_lcb,
                0.0,
                self.cfg.dims.b_star,
                &self.cfg.consts,
            ),
        }
    }

    pub fn config(&self) -> &MvpConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &ValueTables {
        &self.tables
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Local index of the interval currently being played.
    pub fn interval(&self) -> usize {
        self.m
    }
}

impl Learner for NsMvp {
    fn on_interval_start(&mut self, _m: usize, _s1: usize) {}

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.tables.greedy(h, s)
    }

    fn observe(&mut self, _h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        let doubled = self.counters.record(s, a, cost, next);
        doubled || next == self.cfg.dims.num_states
    }

    fn on_interval_end(&mut self, _record: &IntervalRecord) {
        let m = self.m as u64;
        if m % self.cfg.window_c == 0 {
            self.counters.reset_cost();
            self.stats.resets_c += 1;
        }
        if m % self.cfg.window_p == 0 {
            self.counters.reset_transitions();
            self.stats.resets_p += 1;
        }
        self.m += 1;
        self.update();
    }

    fn stats(&self) -> LearnerStats {
        self.stats
    }

    fn telemetry(&self) -> Option<Telemetry> {
        Some(Telemetry {
            fields: vec![("x", self.tables.bias), ("max_v", self.tables.max_v())],
        })
    }
}
