use super::learner::{restart_window, MvpConfig, NsMvp, WINDOW_CAP};
use crate::sim::{IntervalRecord, Learner, LearnerStats, Telemetry};

/// Known quantities that set each epoch's restart windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingParams {
    pub b_star: f64,
    pub t_max: f64,
    pub delta_c: f64,
    pub delta_p: f64,
    pub window_cap: u64,
}

impl DoublingParams {
    pub fn new(b_star: f64, t_max: f64, delta_c: f64, delta_p: f64) -> Self {
        Self { b_star, t_max, delta_c, delta_p, window_cap: WINDOW_CAP }
    }

    /// `(W_c, W_P)` for epoch `n ≥ 1` covering intervals `2^{n-1} ..= 2^n - 1`.
    pub fn windows(&self, n: u32, num_states: usize, num_actions: usize) -> (u64, u64) {
        let sa = (num_states * num_actions) as f64;
        let span = 2f64.powi(n as i32 - 1);
        (
            restart_window(self.b_star * sa, span, self.delta_c, self.t_max, self.window_cap),
            restart_window(sa, span, self.delta_p, self.t_max, self.window_cap),
        )
    }
}

/// Restarts a fresh [`NsMvp`] at every power-of-two interval with windows
/// tuned to the epoch length.
#[derive(Debug, Clone)]
pub struct MvpDoubling {
    base: MvpConfig,
    params: DoublingParams,
    inner: NsMvp,
    m: u64,
    epoch: u32,
    retired: LearnerStats,
}

impl MvpDoubling {
    pub fn new(base: MvpConfig, params: DoublingParams) -> Self {
        let inner = NsMvp::new(Self::epoch_config(&base, &params, 1));
        Self { base, params, inner, m: 0, epoch: 1, retired: LearnerStats::default() }
    }

    fn epoch_config(base: &MvpConfig, params: &DoublingParams, n: u32) -> MvpConfig {
        let (wc, wp) = params.windows(n, base.dims.num_states, base.dims.num_actions);
        MvpConfig { window_c: wc, window_p: wp, ..*base }
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn inner(&self) -> &NsMvp {
        &self.inner
    }
}

impl Learner for MvpDoubling {
    fn on_interval_start(&mut self, m: usize, s1: usize) {
        self.m += 1;
        if self.m.is_power_of_two() && self.m > 1 {
            self.epoch = self.m.trailing_zeros() + 1;
            self.retired = self.retired + self.inner.stats();
            self.inner = NsMvp::new(Self::epoch_config(&self.base, &self.params, self.epoch));
        }
        self.inner.on_interval_start(m, s1);
    }

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.inner.choose_action(h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        self.inner.observe(h, s, a, cost, next)
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        self.inner.on_interval_end(record);
    }

    fn stats(&self) -> LearnerStats {
        self.retired + self.inner.stats()
    }

    fn telemetry(&self) -> Option<Telemetry> {
        let mut t = self.inner.telemetry()?;
        t.fields.push(("epoch", self.epoch as f64));
        Some(t)
    }
}
