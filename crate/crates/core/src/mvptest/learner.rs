use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{threshold_chi_c, threshold_chi_p, TestStats, ThresholdScales};
use crate::error::{Error, Result};
use crate::mvp::{iota, restart_window, ConfidenceConstants, Counters, Estimates, ProblemDims, ValueTables, WINDOW_CAP};
use crate::sim::{IntervalRecord, Learner, LearnerStats, Telemetry};

/// Which of the detection and restart mechanisms are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestSwitches {
    pub test1: bool,
    pub test2: bool,
    pub test3: bool,
    pub periodic: bool,
    /// When off, `η ≡ 0`.
    pub correction: bool,
}

impl Default for TestSwitches {
    fn default() -> Self {
        Self { test1: true, test2: true, test3: true, periodic: true, correction: true }
    }
}

impl TestSwitches {
    pub fn none() -> Self {
        Self { test1: false, test2: false, test3: false, periodic: false, correction: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MvpTestConfig {
    pub dims: ProblemDims,
    pub consts: ConfidenceConstants,
    pub window_c: u64,
    pub window_p: u64,
    pub c1: f64,
    pub c2: f64,
    /// Probability of a transition reset when Test 3 fires.
    pub reset_prob: f64,
    pub kappa_c: f64,
    pub kappa_p: f64,
    pub switches: TestSwitches,
}

impl MvpTestConfig {
    /// Default tuning from `T⋆` and the drift budgets over `K = dims.episodes`.
    pub fn tuned(dims: ProblemDims, t_star: f64, delta_c: f64, delta_p: f64) -> Self {
        let sa = (dims.num_states * dims.num_actions) as f64;
        let t = t_star.max(1.0);
        let k = dims.episodes as f64;
        Self {
            dims,
            consts: ConfidenceConstants::default(),
            window_c: restart_window(dims.b_star * sa, k, delta_c, t, WINDOW_CAP),
            window_p: restart_window(sa, k, delta_p, t, WINDOW_CAP),
            c1: (dims.b_star * sa).sqrt() / t,
            c2: sa.sqrt() / t,
            reset_prob: 1.0 / dims.b_star,
            kappa_c: 3.0,
            kappa_p: 3.0,
            switches: TestSwitches::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_c == 0 || self.window_p == 0 {
            return Err(Error::InvalidConfig("restart windows must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.reset_prob) {
            return Err(Error::InvalidConfig(format!("reset probability {} outside [0, 1]", self.reset_prob)));
        }
        if self.kappa_c < 0.0 || self.kappa_p < 0.0 || self.c1 < 0.0 || self.c2 < 0.0 {
            return Err(Error::InvalidConfig("threshold multipliers must be non-negative".into()));
        }
        if !(self.dims.delta > 0.0 && self.dims.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta = {} outside (0, 1)", self.dims.delta)));
        }
        Ok(())
    }
}

const FIRED_TEST1: u8 = 1;
const FIRED_TEST2: u8 = 2;
const FIRED_TEST3: u8 = 4;

/// Optimistic learner with a drift correction and three non-stationarity tests.
#[derive(Debug, Clone)]
pub struct MvpTest {
    cfg: MvpTestConfig,
    counters: Counters,
    est: Estimates,
    tables: ValueTables,
    m: usize,
    nu_c: u64,
    nu_p: u64,
    rho_c: f64,
    eta: f64,
    window: TestStats,
    rng: ChaCha8Rng,
    stats: LearnerStats,
    fired: u8,
    last_chi_c: f64,
    last_chi_p: f64,
    last_hat_c: f64,
    last_hat_p: f64,
}

impl MvpTest {
    pub fn new(cfg: MvpTestConfig, seed: u64) -> Self {
        let d = cfg.dims;
        let counters = Counters::new(d.num_states, d.num_actions);
        let est = Estimates::from_counters(&counters, 0.0);
        let mut learner = Self {
            cfg,
            counters,
            est,
            tables: ValueTables::new(d.num_states, d.num_actions, d.horizon),
            m: 1,
            nu_c: 1,
            nu_p: 1,
            rho_c: 0.0,
            eta: 0.0,
            window: TestStats::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: LearnerStats::default(),
            fired: 0,
            last_chi_c: 0.0,
            last_chi_p: 0.0,
            last_hat_c: 0.0,
            last_hat_p: 0.0,
        };
        learner.update();
        learner
    }

    fn rho(&self, c: f64, nu: u64) -> f64 {
        let cap = 1.0 / (256.0 * self.cfg.dims.horizon as f64);
        (c / (nu as f64).sqrt()).min(cap)
    }

    fn update(&mut self) {
        let d = &self.cfg.dims;
        self.est = Estimates::from_counters(&self.counters, iota(d, self.m, &self.cfg.consts));
        if self.cfg.switches.correction {
            self.rho_c = self.rho(self.cfg.c1, self.nu_c);
            self.eta = self.rho_c + d.big_b() * self.rho(self.cfg.c2, self.nu_p);
        } else {
            self.rho_c = 0.0;
            self.eta = 0.0;
        }
        let shift = 8.0 * self.eta;
        let costs: Vec<f64> = self.est.cost_lcb.iter().map(|c| c + shift).collect();
        self.tables.backward_pass(&self.est, &costs, 0.0, d.b_star, &self.cfg.consts);
    }

    fn reset_cost(&mut self) {
        self.counters.reset_cost();
        self.nu_c = 0;
        self.window.clear_cost();
        self.window.cost_resets += 1;
        self.stats.resets_c += 1;
    }

    fn reset_transitions(&mut self) {
        self.counters.reset_transitions();
        self.nu_p = 0;
        self.window.clear_transitions();
        self.stats.resets_p += 1;
    }

    fn scales(&self) -> ThresholdScales {
        let d = &self.cfg.dims;
        ThresholdScales {
            b_star: d.b_star,
            num_states: d.num_states,
            num_actions: d.num_actions,
            horizon: d.horizon,
        }
    }

    pub fn config(&self) -> &MvpTestConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &ValueTables {
        &self.tables
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn window(&self) -> &TestStats {
        &self.window
    }

    /// `(ν^c, ν^P)`.
    pub fn window_lengths(&self) -> (u64, u64) {
        (self.nu_c, self.nu_p)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn interval(&self) -> usize {
        self.m
    }

    /// Bitmask of tests fired at the last interval end (1, 2, 4 for Tests 1-3).
    pub fn fired(&self) -> u8 {
        self.fired
    }
}

impl Learner for MvpTest {
    fn on_interval_start(&mut self, _m: usize, _s1: usize) {}

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.tables.greedy(h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        let pair = s * self.cfg.dims.num_actions + a;
        let est = &self.est;
        let w = &mut self.window;
        w.chi_c_hat += cost - est.cost_lcb[pair];
        w.chi_p_hat += self.tables.v(h + 1, next) - self.tables.pv(h, s, a);
        let m_plus = est.m_plus[pair];
        w.cost_conf += (est.mean_cost[pair] * est.iota / m_plus).sqrt() + est.iota / m_plus;
        let var = self.tables.variance(h, s, a);
        w.var += var;
        w.var_sqrt += (var / est.n_plus[pair]).sqrt();
        let doubled = self.counters.record(s, a, cost, next);
        doubled || next == self.cfg.dims.num_states
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        let len = record.len() as f64;
        self.window.cost_c += record.suffered_total;
        self.window.cost_p += record.suffered_total;
        self.window.rho_c += len * self.rho_c;
        self.window.eta += len * self.eta;

        let sw = self.cfg.switches;
        let chi_c = threshold_chi_c(&self.window, self.cfg.kappa_c, self.nu_c);
        let chi_p = threshold_chi_p(&self.window, self.cfg.kappa_p, self.nu_p, &self.scales());
        self.last_chi_c = chi_c;
        self.last_chi_p = chi_p;
        let chi_c_hat = self.window.chi_c_hat;
        let chi_p_hat = self.window.chi_p_hat;
        self.last_hat_c = chi_c_hat;
        self.last_hat_p = chi_p_hat;
        self.fired = 0;
        if sw.test1 && chi_c_hat > chi_c {
            self.fired |= FIRED_TEST1;
            self.stats.test1 += 1;
            self.reset_cost();
        }
        if sw.test2 && chi_p_hat > chi_p {
            self.fired |= FIRED_TEST2;
            self.stats.test2 += 1;
            self.reset_cost();
            self.reset_transitions();
        }
        if sw.periodic {
            if self.nu_c == self.cfg.window_c {
                self.reset_cost();
            }
            if self.nu_p == self.cfg.window_p {
                self.reset_cost();
                self.reset_transitions();
            }
        }
        self.nu_c += 1;
        self.nu_p += 1;
        self.m += 1;
        self.update();

        if sw.test3 && self.tables.max_v() > self.cfg.dims.big_b() / 2.0 {
            self.fired |= FIRED_TEST3;
            self.stats.test3 += 1;
            self.reset_cost();
            self.nu_c = 1;
            if self.rng.gen::<f64>() < self.cfg.reset_prob {
                self.reset_transitions();
                self.nu_p = 1;
            }
            self.update();
        }
    }

    fn stats(&self) -> LearnerStats {
        self.stats
    }

    fn telemetry(&self) -> Option<Telemetry> {
        Some(Telemetry {
            fields: vec![
                ("m", self.m as f64 - 1.0),
                ("nu_c", self.nu_c as f64),
                ("nu_p", self.nu_p as f64),
                ("eta", self.eta),
                ("chi_c_hat", self.last_hat_c),
                ("chi_c", self.last_chi_c),
                ("chi_p_hat", self.last_hat_p),
                ("chi_p", self.last_chi_p),
                ("tests_fired", self.fired as f64),
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envgen::make_random_proper;
    use crate::model::{drift_stats, DriftSequence, DEFAULT_TOL};
    use crate::mvp::{MvpConfig, NsMvp, Widening};
    use crate::sim::{run_experiment, EndReason, HorizonConfig, RunOptions};

    fn dims(horizon: usize) -> ProblemDims {
        ProblemDims { num_states: 3, num_actions: 2, horizon, episodes: 40, b_star: 2.0, delta: 0.1 }
    }

    fn record(len: usize, total: f64) -> IntervalRecord {
        IntervalRecord {
            m: 0,
            episode: 1,
            start_state: 0,
            steps: vec![crate::sim::Step { state: 0, action: 0, cost: 0.0, next: 0 }; len],
            end_reason: EndReason::HorizonHit,
            terminal_cost: 0.0,
            suffered_total: total,
        }
    }

    #[test]
    fn correction_rates() {
        let mut cfg = MvpTestConfig::tuned(dims(100), 5.0, 0.0, 0.0);
        cfg.c1 = 1e-9;
        cfg.c2 = 2e-9;
        let l = MvpTest::new(cfg, 0);
        assert_eq!(l.eta(), 1e-9 + 32.0 * 2e-9);
        cfg.c1 = 1.0;
        cfg.c2 = 0.0;
        let l = MvpTest::new(cfg, 0);
        assert_eq!(l.eta(), 3.90625e-5);
    }

    #[test]
    fn tuned_defaults() {
        let cfg = MvpTestConfig::tuned(dims(10), 4.0, 0.0, 1.0);
        assert_eq!(cfg.window_c, WINDOW_CAP);
        let want = (6f64.cbrt() * (40.0f64 / 4.0).powf(2.0 / 3.0)).ceil() as u64;
        assert_eq!(cfg.window_p, want);
        assert_eq!(cfg.reset_prob, 0.5);
        assert!((cfg.c1 - 12f64.sqrt() / 4.0).abs() < 1e-15);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn periodic_transition_reset_resets_both() {
        let mut cfg = MvpTestConfig::tuned(dims(10), 4.0, 0.0, 0.0);
        cfg.switches = TestSwitches { periodic: true, ..TestSwitches::none() };
        cfg.window_p = 3;
        let mut l = MvpTest::new(cfg, 0);
        for _ in 0..3 {
            l.observe(1, 0, 0, 1.0, 1);
            l.on_interval_end(&record(1, 1.0));
        }
        assert_eq!((l.stats().resets_c, l.stats().resets_p), (1, 1));
        assert_eq!(l.window_lengths(), (1, 1));
        assert_eq!(l.counters().trans_count(0, 0), 0);
    }

    #[test]
    fn forced_test3_resets_both_with_unit_probability() {
        // ι = 0 leaves a zero-bonus model that never reaches the goal
        let mut cfg = MvpTestConfig::tuned(dims(100), 4.0, 0.0, 0.0);
        cfg.consts.iota_scale = 0.0;
        cfg.switches = TestSwitches { test3: true, ..TestSwitches::none() };
        cfg.reset_prob = 1.0;
        let mut l = MvpTest::new(cfg, 0);
        for s in 0..3 {
            for a in 0..2 {
                l.observe(1, s, a, 1.0, (s + 1) % 3);
            }
        }
        l.on_interval_end(&record(6, 6.0));
        assert_eq!(l.fired(), 4);
        assert_eq!((l.stats().resets_c, l.stats().resets_p, l.stats().test3), (1, 1, 1));
        assert_eq!(l.counters().cost_count(0, 0), 0);
        assert_eq!(l.counters().trans_count(0, 0), 0);
        assert!(l.tables().max_v() <= 2.0 * 2.0 * 16.0);
    }

    #[test]
    fn test1_fires_with_zero_multiplier() {
        let mut cfg = MvpTestConfig::tuned(dims(10), 4.0, 0.0, 0.0);
        cfg.switches = TestSwitches { test1: true, ..TestSwitches::none() };
        cfg.kappa_c = 0.0;
        let mut l = MvpTest::new(cfg, 0);
        l.observe(1, 0, 0, 1.0, 1);
        l.on_interval_end(&record(1, 1.0));
        assert_eq!(l.fired(), 1);
        assert_eq!(l.stats().test1, 1);
        assert_eq!(l.stats().resets_p, 0);
    }

    #[test]
    fn matches_unwidened_mvp_when_everything_is_off() {
        let inst = make_random_proper(3, 2, 0.15, 11).unwrap();
        let seq = DriftSequence::stationary(60, inst).unwrap();
        let st = drift_stats(&seq, DEFAULT_TOL).unwrap();
        let hcfg = HorizonConfig::from_stats(&st, 60);
        let d = ProblemDims {
            num_states: 3,
            num_actions: 2,
            horizon: hcfg.horizon,
            episodes: 60,
            b_star: st.b_star,
            delta: 0.1,
        };
        let mut tcfg = MvpTestConfig::tuned(d, st.t_star, 0.0, 0.0);
        tcfg.consts.iota_scale = 0.01;
        tcfg.switches = TestSwitches::none();
        let mut mcfg = MvpConfig::new(d);
        mcfg.consts = tcfg.consts;
        mcfg.widening = Widening::Off;
        let opts = RunOptions { capture_intervals: true, ..Default::default() };
        let a = run_experiment(&seq, &mut MvpTest::new(tcfg, 1), &hcfg, 9, &opts).unwrap();
        let b = run_experiment(&seq, &mut NsMvp::new(mcfg), &hcfg, 9, &opts).unwrap();
        assert_eq!(a.intervals, b.intervals);
    }
}
