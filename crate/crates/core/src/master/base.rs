use serde::{Deserialize, Serialize};

use crate::mvp::{iota, ConfidenceConstants, Counters, Estimates, NsMvp, ProblemDims, ValueTables};
use crate::sim::{IntervalRecord, Learner, LearnerStats, Telemetry};

/// A learner usable inside the multi-scale scheduler.
pub trait BaseLearner: Learner {
    /// Predicted interval cost `f̃` for an interval starting at `s1`.
    fn prediction(&self, s1: usize) -> f64;

    /// Whether the learner has detected non-stationarity and given up.
    fn terminated(&self) -> bool {
        false
    }
}

impl BaseLearner for NsMvp {
    fn prediction(&self, s1: usize) -> f64 {
        self.tables().v(1, s1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseSwitches {
    pub test1: bool,
    pub test2: bool,
    pub correction: bool,
}

impl Default for BaseSwitches {
    fn default() -> Self {
        Self { test1: true, test2: true, correction: true }
    }
}

/// Default termination multiplier `κ_b`.
pub const DEFAULT_KAPPA_B: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvpBaseConfig {
    pub dims: ProblemDims,
    pub consts: ConfidenceConstants,
    pub t_star: f64,
    pub kappa_b: f64,
    pub switches: BaseSwitches,
}

impl MvpBaseConfig {
    pub fn new(dims: ProblemDims, t_star: f64) -> Self {
        Self {
            dims,
            consts: ConfidenceConstants::default(),
            t_star,
            kappa_b: DEFAULT_KAPPA_B,
            switches: BaseSwitches::default(),
        }
    }

    /// `χ_m = κ_b (B⋆S√(Am) + B⋆S²A)`.
    pub fn threshold(&self, m: usize) -> f64 {
        let d = &self.dims;
        let (s, a) = (d.num_states as f64, d.num_actions as f64);
        self.kappa_b * (d.b_star * s * (a * m as f64).sqrt() + d.b_star * s * s * a)
    }

    /// `η_m = min{B⋆S√A / (T⋆√m), 1/(2⁸H)}`.
    pub fn correction(&self, m: usize) -> f64 {
        let d = &self.dims;
        let raw = d.b_star * d.num_states as f64 * (d.num_actions as f64).sqrt()
            / (self.t_star.max(1.0) * (m as f64).sqrt());
        raw.min(1.0 / (256.0 * d.horizon as f64))
    }
}

/// Base learner that terminates instead of resetting when a test fails.
#[derive(Debug, Clone)]
pub struct MvpBase {
    cfg: MvpBaseConfig,
    counters: Counters,
    tables: ValueTables,
    m: usize,
    s1: usize,
    eta: f64,
    chi_hat: f64,
    terminated: bool,
    stats: LearnerStats,
}

impl MvpBase {
    pub fn new(cfg: MvpBaseConfig) -> Self {
        let d = cfg.dims;
        let mut base = Self {
            cfg,
            counters: Counters::new(d.num_states, d.num_actions),
            tables: ValueTables::new(d.num_states, d.num_actions, d.horizon),
            m: 1,
            s1: 0,
            eta: 0.0,
            chi_hat: 0.0,
            terminated: false,
            stats: LearnerStats::default(),
        };
        base.update();
        base
    }

    fn update(&mut self) {
        let d = &self.cfg.dims;
        let est = Estimates::from_counters(&self.counters, iota(d, self.m, &self.cfg.consts));
        self.eta = if self.cfg.switches.correction { self.cfg.correction(self.m) } else { 0.0 };
        let shift = 8.0 * self.eta;
        let costs: Vec<f64> = est.cost_lcb.iter().map(|c| c + shift).collect();
        self.tables.backward_pass(&est, &costs, 0.0, d.b_star, &self.cfg.consts);
    }

    pub fn tables(&self) -> &ValueTables {
        &self.tables
    }

    pub fn chi_hat(&self) -> f64 {
        self.chi_hat
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn interval(&self) -> usize {
        self.m
    }
}

impl Learner for MvpBase {
    fn on_interval_start(&mut self, _m: usize, s1: usize) {
        self.s1 = s1;
    }

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.tables.greedy(h, s)
    }

    fn observe(&mut self, _h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        let doubled = self.counters.record(s, a, cost, next);
        doubled || next == self.cfg.dims.num_states
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        self.chi_hat += record.suffered_total - self.tables.v(1, self.s1);
        if self.cfg.switches.test1 && self.chi_hat > self.cfg.threshold(self.m) {
            self.stats.test1 += 1;
            self.terminated = true;
        }
        self.m += 1;
        self.update();
        if self.cfg.switches.test2 && self.tables.max_v() > self.cfg.dims.big_b() / 2.0 {
            self.stats.test2 += 1;
            self.terminated = true;
        }
    }

    fn stats(&self) -> LearnerStats {
        self.stats
    }

    fn telemetry(&self) -> Option<Telemetry> {
        Some(Telemetry {
            fields: vec![
                ("eta", self.eta),
                ("chi_hat", self.chi_hat),
                ("chi", self.cfg.threshold(self.m.saturating_sub(1).max(1))),
                ("terminated", self.terminated as u8 as f64),
            ],
        })
    }
}

impl BaseLearner for MvpBase {
    fn prediction(&self, s1: usize) -> f64 {
        self.tables.v(1, s1)
    }

    fn terminated(&self) -> bool {
        self.terminated
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{EndReason, Step};

    fn dims(s: usize, a: usize, b: f64, h: usize) -> ProblemDims {
        ProblemDims { num_states: s, num_actions: a, horizon: h, episodes: 10, b_star: b, delta: 0.1 }
    }

    fn record(total: f64) -> IntervalRecord {
        IntervalRecord {
            m: 0,
            episode: 1,
            start_state: 0,
            steps: vec![Step { state: 0, action: 0, cost: 1.0, next: 1 }],
            end_reason: EndReason::LearnerRequested,
            terminal_cost: 0.0,
            suffered_total: total,
        }
    }

    #[test]
    fn threshold_and_correction_by_hand() {
        let mut cfg = MvpBaseConfig::new(dims(1, 1, 1.0, 10), 1.0);
        cfg.kappa_b = 1.0;
        assert_eq!(cfg.threshold(1), 2.0);
        assert_eq!(cfg.correction(1), 1.0 / 2560.0);
        let cfg = MvpBaseConfig::new(dims(2, 4, 1.0, 10), 1e6);
        assert_eq!(cfg.correction(4), 2.0 * 2.0 / (1e6 * 2.0));
    }

    #[test]
    fn large_interval_cost_terminates_after_the_interval() {
        let mut cfg = MvpBaseConfig::new(dims(1, 1, 1.0, 10), 1.0);
        cfg.kappa_b = 1.0;
        cfg.switches.test2 = false;
        let mut b = MvpBase::new(cfg);
        b.on_interval_start(1, 0);
        assert!(!b.terminated());
        b.on_interval_end(&record(2.5));
        assert!(b.terminated());
        assert_eq!(b.stats().test1, 1);
        assert_eq!(b.interval(), 2);
    }

    #[test]
    fn large_values_terminate() {
        let mut cfg = MvpBaseConfig::new(dims(2, 1, 1.0, 100), 1.0);
        cfg.consts.iota_scale = 0.0;
        cfg.switches.test1 = false;
        let mut b = MvpBase::new(cfg);
        b.on_interval_start(1, 0);
        b.observe(1, 0, 0, 1.0, 1);
        b.observe(2, 1, 0, 1.0, 0);
        b.on_interval_end(&record(2.0));
        assert!(b.terminated());
        assert_eq!(b.stats().test2, 1);
    }
}
