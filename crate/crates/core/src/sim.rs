//! Finite-horizon approximation driver: splits SSP episodes into intervals of
//! at most `H` steps, charges terminal costs and keeps the regret ledger.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    finite_horizon_policy_value, solve_segments, terminal_cost, DriftSequence, DriftStats,
    SegmentSolution, SspInstance, DEFAULT_TOL,
};

/// Horizon and terminal-cost scale of the approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonConfig {
    pub horizon: usize,
    pub b_star: f64,
    pub episodes: usize,
}

impl HorizonConfig {
    /// `H = ceil(4 T_max ln(8K))`.
    pub fn from_stats(stats: &DriftStats, episodes: usize) -> Self {
        let horizon = (4.0 * stats.t_max * (8.0 * episodes as f64).ln()).ceil().max(1.0) as usize;
        Self { horizon, b_star: stats.b_star, episodes }
    }

    pub fn terminal_cost_scale(&self) -> f64 {
        2.0 * self.b_star
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub cost: f64,
    pub next: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndReason {
    GoalReached,
    HorizonHit,
    LearnerRequested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    /// Global 1-based interval index.
    pub m: usize,
    /// 1-based episode the interval belongs to.
    pub episode: usize,
    pub start_state: usize,
    pub steps: Vec<Step>,
    pub end_reason: EndReason,
    pub terminal_cost: f64,
    /// Step costs plus the terminal cost.
    pub suffered_total: f64,
}

impl IntervalRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end_state(&self) -> usize {
        self.steps.last().map_or(self.start_state, |st| st.next)
    }
}

/// Cumulative reset and test counters exposed by a learner.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerStats {
    pub resets_c: u64,
    pub resets_p: u64,
    pub test1: u64,
    pub test2: u64,
    pub test3: u64,
}

impl std::ops::Add for LearnerStats {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            resets_c: self.resets_c + rhs.resets_c,
            resets_p: self.resets_p + rhs.resets_p,
            test1: self.test1 + rhs.test1,
            test2: self.test2 + rhs.test2,
            test3: self.test3 + rhs.test3,
        }
    }
}

/// Named scalar fields describing a learner's state after an interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Telemetry {
    pub fields: Vec<(&'static str, f64)>,
}

impl Telemetry {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.fields.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }
}

/// The finite-horizon learner driven by [`run_experiment`].
///
/// `h` is the 1-based step inside the current interval; the goal is the
/// outcome index `S`.
pub trait Learner {
    fn on_interval_start(&mut self, m: usize, s1: usize);

    fn choose_action(&mut self, h: usize, s: usize) -> usize;

    /// Feeds one transition; returns `true` to request a new interval.
    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool;

    fn on_interval_end(&mut self, record: &IntervalRecord);

    fn stats(&self) -> LearnerStats {
        LearnerStats::default()
    }

    fn telemetry(&self) -> Option<Telemetry> {
        None
    }
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn on_interval_start(&mut self, m: usize, s1: usize) {
        (**self).on_interval_start(m, s1)
    }

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        (**self).choose_action(h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        (**self).observe(h, s, a, cost, next)
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        (**self).on_interval_end(record)
    }

    fn stats(&self) -> LearnerStats {
        (**self).stats()
    }

    fn telemetry(&self) -> Option<Telemetry> {
        (**self).telemetry()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostNoise {
    #[default]
    Bernoulli,
    Deterministic,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub cost_noise: CostNoise,
    /// Per-episode step cap; `None` means `100 H K`.
    pub step_cap: Option<u64>,
    pub capture_intervals: bool,
    pub capture_telemetry: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub k: usize,
    pub cost: f64,
    pub vstar: f64,
    pub regret: f64,
    pub intervals: usize,
    pub resets_c: u64,
    pub resets_p: u64,
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Dynamic regret `R_K`.
    pub regret: f64,
    /// Interval-level regret against `π⋆_{k(m)}` including terminal costs.
    pub interval_regret: f64,
    pub intervals: usize,
    pub b_star: f64,
    pub wallclock_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    pub rows: Vec<EpisodeRow>,
    pub summary: RunSummary,
}

impl RegretLedger {
    pub fn episodes(&self) -> usize {
        self.rows.len()
    }

    /// `R_K - R̊_M - B⋆`; non-positive whenever the reduction's bound holds.
    pub fn fha_gap(&self) -> f64 {
        self.summary.regret - self.summary.interval_regret - self.summary.b_star
    }

    /// Mean per-episode regret over 1-based episodes `from..=to`.
    pub fn mean_regret(&self, from: usize, to: usize) -> f64 {
        let rows = &self.rows[from - 1..to];
        rows.iter().map(|r| r.cost - r.vstar).sum::<f64>() / rows.len() as f64
    }
}

/// Total dynamic regret and its cumulative series.
pub fn dynamic_regret(ledger: &RegretLedger) -> (f64, Vec<f64>) {
    let mut total = 0.0;
    let series = ledger
        .rows
        .iter()
        .map(|row| {
            total += row.cost - row.vstar;
            total
        })
        .collect();
    (total, series)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub ledger: RegretLedger,
    pub intervals: Vec<IntervalRecord>,
    pub telemetry: Vec<(usize, Telemetry)>,
}

/// Derives an independent stream seed from a master seed and a label.
pub fn stream_seed(master: u64, label: &str) -> u64 {
    // FNV-1a over the label, folded into the master seed with splitmix64
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub const ENV_STREAM: &str = "environment";
pub const LEARNER_STREAM: &str = "learner";

struct Environment<'a> {
    seq: &'a DriftSequence,
    solutions: Vec<SegmentSolution>,
    /// `V^{π⋆_k, H}_1` per segment over `S + 1` outcomes.
    horizon_values: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    noise: CostNoise,
}

impl Environment<'_> {
    fn sample_cost(&mut self, inst: &SspInstance, s: usize, a: usize) -> f64 {
        let mean = inst.cost(s, a);
        match self.noise {
            CostNoise::Deterministic => mean,
            CostNoise::Bernoulli => {
                if self.rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn sample_next(&mut self, inst: &SspInstance, s: usize, a: usize) -> usize {
        let row = inst.row(s, a);
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (t, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return t;
            }
        }
        // rounding left u above the cumulative sum
        row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
    }
}

/// Runs the learner over every episode of `seq`.
pub fn run_experiment<L: Learner + ?Sized>(
    seq: &DriftSequence,
    learner: &mut L,
    cfg: &HorizonConfig,
    seed: u64,
    options: &RunOptions,
) -> Result<RunOutput> {
    let started = Instant::now();
    let solutions = solve_segments(seq, DEFAULT_TOL)?;
    let n = seq.num_states();
    let goal = n;
    let horizon = cfg.horizon;
    let cf = terminal_cost(n, cfg.b_star);
    let horizon_values = seq
        .segments()
        .zip(&solutions)
        .map(|((_, inst), sol)| {
            finite_horizon_policy_value(inst, &sol.policy, horizon, &cf).swap_remove(0)
        })
        .collect();
    let mut env = Environment {
        seq,
        solutions,
        horizon_values,
        rng: ChaCha8Rng::seed_from_u64(stream_seed(seed, ENV_STREAM)),
        noise: options.cost_noise,
    };
    let step_cap = options
        .step_cap
        .unwrap_or_else(|| 100 * horizon as u64 * seq.episodes() as u64);

    let mut rows = Vec::with_capacity(seq.episodes());
    let mut intervals = Vec::new();
    let mut telemetry = Vec::new();
    let mut regret = 0.0;
    let mut interval_regret = 0.0;
    let mut m = 0;
    let mut record = IntervalRecord {
        m: 0,
        episode: 0,
        start_state: 0,
        steps: Vec::with_capacity(horizon),
        end_reason: EndReason::HorizonHit,
        terminal_cost: 0.0,
        suffered_total: 0.0,
    };

    for k in 1..=seq.episodes() {
        let seg = env.seq.segment_index(k);
        let inst = env.seq.segment(seg);
        let mut s = 0;
        let mut episode_cost = 0.0;
        let mut episode_steps: u64 = 0;
        while s != goal {
            m += 1;
            learner.on_interval_start(m, s);
            record.m = m;
            record.episode = k;
            record.start_state = s;
            record.steps.clear();
            let mut step_costs = 0.0;
            let mut reason = EndReason::HorizonHit;
            for h in 1..=horizon {
                let a = learner.choose_action(h, s);
                assert!(a < inst.num_actions(), "learner chose action {a} out of range");
                let c = env.sample_cost(inst, s, a);
                let next = env.sample_next(inst, s, a);
                let wants_new = learner.observe(h, s, a, c, next);
                record.steps.push(Step { state: s, action: a, cost: c, next });
                step_costs += c;
                episode_steps += 1;
                if episode_steps > step_cap {
                    return Err(Error::StepCapExceeded { episode: k, cap: step_cap });
                }
                s = next;
                if s == goal {
                    reason = EndReason::GoalReached;
                    break;
                }
                if wants_new {
                    reason = EndReason::LearnerRequested;
                    break;
                }
            }
            record.end_reason = reason;
            record.terminal_cost = if s == goal { 0.0 } else { cf[s] };
            record.suffered_total = step_costs + record.terminal_cost;
            interval_regret +=
                record.suffered_total - env.horizon_values[seg][record.start_state];
            episode_cost += step_costs;
            learner.on_interval_end(&record);
            if options.capture_telemetry {
                if let Some(t) = learner.telemetry() {
                    telemetry.push((m, t));
                }
            }
            if options.capture_intervals {
                intervals.push(record.clone());
            }
        }
        let vstar = env.solutions[seg].values[0];
        regret += episode_cost - vstar;
        let stats = learner.stats();
        rows.push(EpisodeRow {
            k,
            cost: episode_cost,
            vstar,
            regret,
            intervals: m,
            resets_c: stats.resets_c,
            resets_p: stats.resets_p,
            t1: stats.test1,
            t2: stats.test2,
            t3: stats.test3,
        });
    }

    let summary = RunSummary {
        regret,
        interval_regret,
        intervals: m,
        b_star: cfg.b_star,
        wallclock_secs: started.elapsed().as_secs_f64(),
    };
    Ok(RunOutput { ledger: RegretLedger { rows, summary }, intervals, telemetry })
}
