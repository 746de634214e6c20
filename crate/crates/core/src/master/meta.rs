use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::base::BaseLearner;
use super::malg::{Envelope, MalgSchedule};
use crate::sim::{IntervalRecord, Learner, LearnerStats, Telemetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MasterSwitches {
    pub test1: bool,
    pub test2: bool,
    /// Draw slots shorter than the block.
    pub subslots: bool,
}

impl Default for MasterSwitches {
    fn default() -> Self {
        Self { test1: true, test2: true, subslots: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterConfig {
    pub envelope: Envelope,
    pub delta: f64,
    pub switches: MasterSwitches,
}

impl MasterConfig {
    /// `r̂(x) = 2¹⁰ n̂ ln(2M†/δ) R(x) / x` for a block ending at `M†`.
    pub fn r_hat(&self, x: f64, m_dagger: usize) -> f64 {
        let md = m_dagger as f64;
        let n_hat = md.log2() + 1.0;
        1024.0 * n_hat * (2.0 * md / self.delta).ln() * self.envelope.r(x)
    }
}

/// Cumulative detection counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterCounts {
    pub restarts: u64,
    pub test1: u64,
    pub test2: u64,
    pub terminations: u64,
    pub blocks: u64,
}

struct Slot<B> {
    learner: B,
    intervals: usize,
}

/// State of the block in progress.
struct Block {
    order: u32,
    start: usize,
    schedule: MalgSchedule,
    /// Prefix sums of `g̃` and `C` over the block.
    g_prefix: Vec<f64>,
    c_prefix: Vec<f64>,
    upper: Vec<f64>,
}

impl Block {
    fn offset(&self, m: usize) -> usize {
        m - self.start
    }

    fn m_dagger(&self) -> usize {
        self.start + (1usize << self.order) - 1
    }
}

/// Multi-scale scheduling of base learners with running-average restart tests.
pub struct Master<B, F> {
    cfg: MasterConfig,
    factory: F,
    rng: ChaCha8Rng,
    m: usize,
    next_order: u32,
    epoch: u64,
    block: Option<Block>,
    slots: HashMap<(u32, usize), Slot<B>>,
    active: (u32, usize),
    prediction: f64,
    counts: MasterCounts,
    last_fired: (bool, bool, bool),
}

impl<B: BaseLearner, F: FnMut() -> B> Master<B, F> {
    pub fn new(cfg: MasterConfig, factory: F, seed: u64) -> Self {
        Self {
            cfg,
            factory,
            rng: ChaCha8Rng::seed_from_u64(seed),
            m: 0,
            next_order: 0,
            epoch: 1,
            block: None,
            slots: HashMap::new(),
            active: (0, 0),
            prediction: 0.0,
            counts: MasterCounts::default(),
            last_fired: (false, false, false),
        }
    }

    pub fn counts(&self) -> MasterCounts {
        self.counts
    }

    /// Order of the block in progress, if any.
    pub fn block_order(&self) -> Option<u32> {
        self.block.as_ref().map(|b| b.order)
    }

    /// `(l, j)` of the slot playing the current interval.
    pub fn active_slot(&self) -> (u32, usize) {
        self.active
    }

    pub fn schedule(&self) -> Option<&MalgSchedule> {
        self.block.as_ref().map(|b| &b.schedule)
    }

    /// `U^l` of the block in progress.
    pub fn upper(&self) -> &[f64] {
        self.block.as_ref().map_or(&[], |b| &b.upper)
    }

    /// Running mean `g̃^l_τ` at block offset `t` (requires `t + 1 ≥ 2^l`).
    pub fn running_mean(&self, l: u32, t: usize) -> Option<f64> {
        let b = self.block.as_ref()?;
        let len = 1usize << l;
        (t + 1 >= len && t + 1 < b.g_prefix.len())
            .then(|| (b.g_prefix[t + 1] - b.g_prefix[t + 1 - len]) / len as f64)
    }

    fn start_block(&mut self) {
        let order = self.next_order;
        let schedule = MalgSchedule::build(order, &self.cfg.envelope, self.cfg.switches.subslots, &mut self.rng);
        self.block = Some(Block {
            order,
            start: self.m,
            schedule,
            g_prefix: vec![0.0],
            c_prefix: vec![0.0],
            upper: vec![0.0; order as usize + 1],
        });
        self.slots.clear();
        self.counts.blocks += 1;
    }

    fn restart(&mut self) {
        self.slots.clear();
        self.block = None;
        self.next_order = 0;
        self.epoch += 1;
        self.counts.restarts += 1;
    }

    fn current(&mut self) -> &mut B {
        &mut self.slots.get_mut(&self.active).expect("active slot exists").learner
    }
}

impl<B: BaseLearner, F: FnMut() -> B> Learner for Master<B, F> {
    fn on_interval_start(&mut self, _m: usize, s1: usize) {
        self.m += 1;
        if self.block.is_none() {
            self.start_block();
        }
        let block = self.block.as_ref().expect("block started");
        let t = block.offset(self.m);
        self.active = block.schedule.active(t);
        let factory = &mut self.factory;
        let slot = self
            .slots
            .entry(self.active)
            .or_insert_with(|| Slot { learner: factory(), intervals: 0 });
        slot.intervals += 1;
        slot.learner.on_interval_start(slot.intervals, s1);
        self.prediction = slot.learner.prediction(s1);
    }

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.current().choose_action(h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        self.current().observe(h, s, a, cost, next)
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        self.current().on_interval_end(record);
        let terminated = self.current().terminated();
        let cfg = self.cfg;
        let block = self.block.as_mut().expect("block in progress");
        let t = block.offset(self.m);
        let g_total = block.g_prefix[t] + self.prediction;
        let c_total = block.c_prefix[t] + record.suffered_total;
        block.g_prefix.push(g_total);
        block.c_prefix.push(c_total);
        for l in 0..=block.order {
            let len = 1usize << l;
            if t + 1 >= len {
                let mean = (g_total - block.g_prefix[t + 1 - len]) / len as f64;
                let u = &mut block.upper[l as usize];
                *u = u.max(mean);
            }
        }
        let m_dagger = block.m_dagger();

        let mut fail1 = false;
        if cfg.switches.test1 {
            for (l, _) in block.schedule.ending_at(t) {
                let len = 1usize << l;
                let mean_c = (c_total - block.c_prefix[t + 1 - len]) / len as f64;
                if mean_c <= block.upper[l as usize] - 9.0 * cfg.r_hat(len as f64, m_dagger) {
                    fail1 = true;
                }
            }
        }
        let width = (t + 1) as f64;
        let fail2 = cfg.switches.test2
            && (c_total - g_total) / width >= 3.0 * cfg.r_hat(width, m_dagger);
        let block_done = t + 1 == block.schedule.len();
        let ended: Vec<(u32, usize)> = block.schedule.ending_at(t).collect();

        self.last_fired = (fail1, fail2, terminated);
        self.counts.test1 += fail1 as u64;
        self.counts.test2 += fail2 as u64;
        self.counts.terminations += terminated as u64;
        if fail1 || fail2 || terminated {
            self.restart();
            return;
        }
        for key in ended {
            self.slots.remove(&key);
        }
        if block_done {
            self.slots.clear();
            self.block = None;
            self.next_order += 1;
        }
    }

    fn stats(&self) -> LearnerStats {
        // a restart discards every estimate, so it counts as both resets
        LearnerStats {
            resets_c: self.counts.restarts,
            resets_p: self.counts.restarts,
            test1: self.counts.test1,
            test2: self.counts.test2,
            test3: self.counts.terminations,
        }
    }

    fn telemetry(&self) -> Option<Telemetry> {
        let u_max = self.upper().iter().copied().fold(0.0, f64::max);
        Some(Telemetry {
            fields: vec![
                ("m", self.m as f64),
                ("epoch", self.epoch as f64),
                ("block_n", self.block_order().map_or(-1.0, f64::from)),
                ("active_order_l", self.active.0 as f64),
                ("g", self.prediction),
                ("u_max", u_max),
                ("test1_fired", self.last_fired.0 as u8 as f64),
                ("test2_fired", self.last_fired.1 as u8 as f64),
                ("base_terminated", self.last_fired.2 as u8 as f64),
            ],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{EndReason, Step};

    /// Predicts a fixed value; terminates after a set number of intervals.
    struct Fixed {
        value: f64,
        stop_after: usize,
        seen: usize,
    }

    impl Learner for Fixed {
        fn on_interval_start(&mut self, _m: usize, _s1: usize) {}
        fn choose_action(&mut self, _h: usize, _s: usize) -> usize {
            0
        }
        fn observe(&mut self, _h: usize, _s: usize, _a: usize, _c: f64, _next: usize) -> bool {
            false
        }
        fn on_interval_end(&mut self, _record: &IntervalRecord) {
            self.seen += 1;
        }
    }

    impl BaseLearner for Fixed {
        fn prediction(&self, _s1: usize) -> f64 {
            self.value
        }
        fn terminated(&self) -> bool {
            self.seen >= self.stop_after
        }
    }

    fn cfg(switches: MasterSwitches) -> MasterConfig {
        MasterConfig { envelope: Envelope { c1: 2.0, c2: 3.0, c3: 10.0, c4: 1.0 }, delta: 0.1, switches }
    }

    fn record(total: f64) -> IntervalRecord {
        IntervalRecord {
            m: 0,
            episode: 1,
            start_state: 0,
            steps: vec![Step { state: 0, action: 0, cost: total, next: 1 }],
            end_reason: EndReason::GoalReached,
            terminal_cost: 0.0,
            suffered_total: total,
        }
    }

    #[test]
    fn r_hat_by_hand() {
        let c = cfg(MasterSwitches::default());
        // M† = 1: n̂ = 1, ln(2/δ) = ln 20, R(1) = min{5, 10}
        assert!((c.r_hat(1.0, 1) - 1024.0 * 20f64.ln() * 5.0).abs() < 1e-9);
    }

    #[test]
    fn constant_predictions_give_constant_upper_values() {
        let sw = MasterSwitches { test1: false, test2: false, subslots: true };
        let mut master = Master::new(cfg(sw), || Fixed { value: 0.7, stop_after: usize::MAX, seen: 0 }, 3);
        let mut orders = vec![];
        for m in 1..=31 {
            master.on_interval_start(m, 0);
            let order = master.block_order().unwrap();
            if orders.last() != Some(&order) {
                orders.push(order);
            }
            master.on_interval_end(&record(0.5));
            if m == 30 {
                // block 4 started at m = 16: windows up to 2^3 are full, 2^4 is not
                let u = master.upper();
                assert!(u[..4].iter().all(|&x| (x - 0.7).abs() < 1e-12));
                assert_eq!(u[4], 0.0);
            }
        }
        assert_eq!(orders, vec![0, 1, 2, 3, 4]);
        assert_eq!(master.counts().restarts, 0);
    }

    #[test]
    fn base_termination_restarts_at_order_zero() {
        let sw = MasterSwitches { test1: false, test2: false, subslots: false };
        let mut master = Master::new(cfg(sw), || Fixed { value: 0.0, stop_after: 2, seen: 0 }, 0);
        let mut orders = vec![];
        for m in 1..=8 {
            master.on_interval_start(m, 0);
            orders.push(master.block_order().unwrap());
            master.on_interval_end(&record(0.0));
        }
        // every order-1 instance stops at the end of its second interval
        assert_eq!(orders, vec![0, 1, 1, 0, 1, 1, 0, 1]);
        assert_eq!(master.counts().restarts, 2);
        assert_eq!(master.counts().terminations, 2);
        assert_eq!(master.stats().resets_c, 2);
    }

    #[test]
    fn mean_test_fires_on_large_costs() {
        let mut c = cfg(MasterSwitches { test1: false, test2: true, subslots: false });
        c.envelope = Envelope { c1: 1e-9, c2: 0.0, c3: 1e-9, c4: 0.0 };
        let mut master = Master::new(c, || Fixed { value: 0.0, stop_after: usize::MAX, seen: 0 }, 0);
        master.on_interval_start(1, 0);
        master.on_interval_end(&record(1.0));
        assert_eq!(master.counts().test2, 1);
        assert_eq!(master.block_order(), None);
    }
}
