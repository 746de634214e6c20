//! Optimistic value-table update shared by every MVP-style learner.

use serde::{Deserialize, Serialize};

use super::counters::Counters;

/// Numerical constants of the confidence terms.
///
/// `iota_scale` multiplies `ln(2SAHKm/δ)`; `var_coef` and `range_coef` are the
/// two bonus coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfidenceConstants {
    pub iota_scale: f64,
    pub var_coef: f64,
    pub range_coef: f64,
}

impl Default for ConfidenceConstants {
    fn default() -> Self {
        Self { iota_scale: 2048.0, var_coef: 7.0, range_coef: 49.0 }
    }
}

/// Problem sizes and known scalars every learner is configured with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemDims {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub episodes: usize,
    pub b_star: f64,
    pub delta: f64,
}

impl ProblemDims {
    /// Value bound `B = 16 B⋆`.
    pub fn big_b(&self) -> f64 {
        16.0 * self.b_star
    }
}

/// `ι_m = scale · ln(2 S A H K m / δ)`.
pub fn iota(dims: &ProblemDims, m: usize, consts: &ConfidenceConstants) -> f64 {
    let arg = 2.0
        * dims.num_states as f64
        * dims.num_actions as f64
        * dims.horizon as f64
        * dims.episodes as f64
        * m as f64
        / dims.delta;
    consts.iota_scale * arg.ln()
}

/// Lower confidence bound on a mean cost.
pub fn cost_lcb(mean: f64, m_plus: f64, iota: f64) -> f64 {
    (mean - (mean * iota / m_plus).sqrt() - iota / m_plus).max(0.0)
}

/// `𝕍(p, v) = p v² - (p v)²`, floored at zero. Returns `(p v, 𝕍)`.
#[inline]
pub fn mean_and_variance(row: &[f64], v: &[f64]) -> (f64, f64) {
    let mut first = 0.0;
    let mut second = 0.0;
    for (p, x) in row.iter().zip(v) {
        first += p * x;
        second += p * x * x;
    }
    (first, (second - first * first).max(0.0))
}

/// Bernstein-type bonus `max{c₁ √(𝕍ι/n), c₂ B √S ι / n}`.
#[inline]
pub fn bonus(
    variance: f64,
    n_plus: f64,
    iota: f64,
    big_b: f64,
    num_states: usize,
    consts: &ConfidenceConstants,
) -> f64 {
    let var_term = consts.var_coef * (variance * iota / n_plus).sqrt();
    let range_term = consts.range_coef * big_b * (num_states as f64).sqrt() * iota / n_plus;
    var_term.max(range_term)
}

/// Empirical quantities frozen at an update.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub iota: f64,
    pub mean_cost: Vec<f64>,
    pub cost_lcb: Vec<f64>,
    pub m_plus: Vec<f64>,
    pub n_plus: Vec<f64>,
    /// `P̂` rows over `S + 1` outcomes; an unvisited pair has an all-zero row.
    pub p_hat: Vec<f64>,
}

impl Estimates {
    pub fn from_counters(counters: &Counters, iota: f64) -> Self {
        let (ns, na) = (counters.num_states(), counters.num_actions());
        let w = ns + 1;
        let pairs = ns * na;
        let mut est = Self {
            iota,
            mean_cost: Vec::with_capacity(pairs),
            cost_lcb: Vec::with_capacity(pairs),
            m_plus: Vec::with_capacity(pairs),
            n_plus: Vec::with_capacity(pairs),
            p_hat: Vec::with_capacity(pairs * w),
        };
        for s in 0..ns {
            for a in 0..na {
                let m_plus = counters.m_plus(s, a);
                let n_plus = counters.n_plus(s, a);
                let mean = counters.mean_cost(s, a);
                est.mean_cost.push(mean);
                est.cost_lcb.push(cost_lcb(mean, m_plus, iota));
                est.m_plus.push(m_plus);
                est.n_plus.push(n_plus);
                est.p_hat.extend(counters.outcomes(s, a).iter().map(|&c| c as f64 / n_plus));
            }
        }
        est
    }

    pub fn row(&self, pair: usize, width: usize) -> &[f64] {
        &self.p_hat[pair * width..(pair + 1) * width]
    }
}

/// Layered `Q_h`, `V_h` for `h = 1..=H+1` plus the per-layer `P̂V` and
/// variance used by the tests and thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    q: Vec<f64>,
    v: Vec<f64>,
    pv: Vec<f64>,
    var: Vec<f64>,
    /// Widening bias `x` used by the last pass (0 without widening).
    pub bias: f64,
}

impl ValueTables {
    pub fn new(num_states: usize, num_actions: usize, horizon: usize) -> Self {
        let layer = num_states * num_actions;
        Self {
            num_states,
            num_actions,
            horizon,
            q: vec![0.0; horizon * layer],
            v: vec![0.0; (horizon + 1) * (num_states + 1)],
            pv: vec![0.0; horizon * layer],
            var: vec![0.0; horizon * layer],
            bias: 0.0,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    fn qi(&self, h: usize, s: usize, a: usize) -> usize {
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    pub fn q(&self, h: usize, s: usize, a: usize) -> f64 {
        self.q[self.qi(h, s, a)]
    }

    /// `V_h(s)`; `s` may be the goal index.
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.v[(h - 1) * (self.num_states + 1) + s]
    }

    pub fn v_layer(&self, h: usize) -> &[f64] {
        let w = self.num_states + 1;
        &self.v[(h - 1) * w..h * w]
    }

    /// `P̂_{s,a} V_{h+1}` as computed during the update.
    pub fn pv(&self, h: usize, s: usize, a: usize) -> f64 {
        self.pv[self.qi(h, s, a)]
    }

    /// `𝕍(P̂_{s,a}, V_{h+1})` as computed during the update.
    pub fn variance(&self, h: usize, s: usize, a: usize) -> f64 {
        self.var[self.qi(h, s, a)]
    }

    /// `argmin_a Q_h(s, a)`, lowest index on ties.
    pub fn greedy(&self, h: usize, s: usize) -> usize {
        let start = self.qi(h, s, 0);
        let row = &self.q[start..start + self.num_actions];
        let mut best = 0;
        for (a, &val) in row.iter().enumerate().skip(1) {
            if val < row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max_q(&self) -> f64 {
        self.q.iter().copied().fold(0.0, f64::max)
    }

    /// `max_{h ≤ H} ‖V_h‖_∞`.
    pub fn max_v(&self) -> f64 {
        let w = self.num_states + 1;
        self.v[..self.horizon * w].iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// One backward pass `Q_h = max{0, cost + P̂V_{h+1} - b_h - bias}`.
    pub fn backward_pass(
        &mut self,
        est: &Estimates,
        costs: &[f64],
        bias: f64,
        b_star: f64,
        consts: &ConfidenceConstants,
    ) {
        let (ns, na, horizon) = (self.num_states, self.num_actions, self.horizon);
        let w = ns + 1;
        let big_b = 16.0 * b_star;
        let range_base = consts.range_coef * big_b * (ns as f64).sqrt() * est.iota;
        self.bias = bias;
        let terminal = &mut self.v[horizon * w..];
        terminal[..ns].fill(2.0 * b_star);
        terminal[ns] = 0.0;
        for h in (1..=horizon).rev() {
            let (head, tail) = self.v.split_at_mut(h * w);
            let next = &tail[..w];
            let cur = &mut head[(h - 1) * w..];
            let layer = (h - 1) * ns * na;
            for s in 0..ns {
                let mut best = f64::INFINITY;
                for a in 0..na {
                    let pair = s * na + a;
                    let (pv, var) = mean_and_variance(est.row(pair, w), next);
                    let n_plus = est.n_plus[pair];
                    let b = (consts.var_coef * (var * est.iota / n_plus).sqrt())
                        .max(range_base / n_plus);
                    let q = (costs[pair] + pv - b - bias).max(0.0);
                    let i = layer + pair;
                    self.q[i] = q;
                    self.pv[i] = pv;
                    self.var[i] = var;
                    best = best.min(q);
                }
                cur[s] = best;
            }
            cur[ns] = 0.0;
        }
    }
}

/// Confidence widening: starting from `x = 1/(mH)`, doubles `x` until
/// `max Q ≤ B/4`.
pub fn widened_update(
    tables: &mut ValueTables,
    est: &Estimates,
    dims: &ProblemDims,
    m: usize,
    consts: &ConfidenceConstants,
) {
    let limit = dims.big_b() / 4.0;
    let mut x = 1.0 / (m as f64 * dims.horizon as f64);
    loop {
        tables.backward_pass(est, &est.cost_lcb, x, dims.b_star, consts);
        if tables.max_q() <= limit {
            return;
        }
        x *= 2.0;
        // x ≥ 1 already forces every Q below 2B⋆
        assert!(x <= dims.big_b(), "widening bias overflowed: x = {x}");
    }
}
