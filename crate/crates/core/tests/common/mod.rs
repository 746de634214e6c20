#![allow(dead_code)]

use nsslab::envgen::{hard_sequence_epochs, make_hard_sequence};
use nsslab::model::{drift_stats, DriftSequence, SspInstance, DEFAULT_TOL};
use nsslab::sim::{IntervalRecord, Learner, LearnerStats, Telemetry};

/// `V⋆_h` of the `H`-step problem with terminal cost `2B⋆`, by plain backward
/// induction; `out[h - 1]` has `S + 1` entries.
pub fn finite_horizon_optimal(inst: &SspInstance, horizon: usize, b_star: f64) -> Vec<Vec<f64>> {
    let n = inst.num_states();
    let mut layers = vec![vec![0.0; n + 1]; horizon + 1];
    for s in 0..n {
        layers[horizon][s] = 2.0 * b_star;
    }
    for h in (0..horizon).rev() {
        for s in 0..n {
            let mut best = f64::INFINITY;
            for a in 0..inst.num_actions() {
                let mut q = inst.cost(s, a);
                for (t, p) in inst.row(s, a).iter().enumerate() {
                    q += p * layers[h + 1][t];
                }
                best = best.min(q);
            }
            layers[h][s] = best;
        }
    }
    layers
}

/// Hard-sequence seeds `0, 1, 2, ..` whose sequence at `episodes` is free of
/// leaf collisions, i.e. has one stationary piece per constructed epoch; the
/// first `count` are returned with their sequences.
pub fn hard_seeds(episodes: usize, delta_c: f64, delta_p: f64, count: usize) -> Vec<(u64, DriftSequence)> {
    let (l_c, l_p) = hard_sequence_epochs(1.0, 3.0, 10, episodes, delta_c, delta_p);
    let epochs = (l_c.round() as usize).max(1) + (l_p.round() as usize).max(1);
    (0u64..)
        .filter_map(|seed| {
            let seq = make_hard_sequence(1.0, 3.0, 10, episodes, delta_c, delta_p, seed).ok()?;
            (drift_stats(&seq, DEFAULT_TOL).ok()?.num_pieces == epochs).then_some((seed, seq))
        })
        .take(count)
        .collect()
}

/// Forwards to an inner learner and calls `hook` at every interval start.
pub struct Recording<L, F> {
    pub inner: L,
    pub hook: F,
}

impl<L: Learner, F: FnMut(&L, usize, usize)> Learner for Recording<L, F> {
    fn on_interval_start(&mut self, m: usize, s1: usize) {
        self.inner.on_interval_start(m, s1);
        (self.hook)(&self.inner, m, s1);
    }

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.inner.choose_action(h, s)
    }

    fn observe(&mut self, h: usize, s: usize, a: usize, cost: f64, next: usize) -> bool {
        self.inner.observe(h, s, a, cost, next)
    }

    fn on_interval_end(&mut self, record: &IntervalRecord) {
        self.inner.on_interval_end(record)
    }

    fn stats(&self) -> LearnerStats {
        self.inner.stats()
    }

    fn telemetry(&self) -> Option<Telemetry> {
        self.inner.telemetry()
    }
}

/// Actions of the first `limit` intervals, one vector per interval.
pub fn action_trace(intervals: &[IntervalRecord], limit: usize) -> Vec<Vec<usize>> {
    intervals.iter().take(limit).map(|r| r.steps.iter().map(|s| s.action).collect()).collect()
}

pub struct BonusCase {
    pub monotone: bool,
    pub property_two: bool,
    /// Whether the variance branch of the bonus was the larger one at `v`.
    pub variance_active: bool,
}

/// One randomised case of the bonus properties.
pub fn bonus_case<R: rand::Rng>(rng: &mut R) -> BonusCase {
    use nsslab::mvp::{bonus, mean_and_variance, ConfidenceConstants};
    let consts = ConfidenceConstants::default();
    let states = rng.gen_range(1..=8);
    let n = rng.gen_range(1..=1000u64);
    let weights: Vec<f64> = (0..=states).map(|_| rng.gen::<f64>().powi(3)).collect();
    let total: f64 = weights.iter().sum();
    // empirical row: n draws from the weights
    let mut counts = vec![0u64; states + 1];
    for _ in 0..n {
        let mut u = rng.gen::<f64>() * total;
        let mut t = 0;
        while t < states && u >= weights[t] {
            u -= weights[t];
            t += 1;
        }
        counts[t] += 1;
    }
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let iota = (rng.gen_range(-7.0f64..10.0)).exp();
    let big_b = rng.gen_range(1.0..64.0);
    let mut v: Vec<f64> = (0..=states).map(|_| rng.gen::<f64>() * big_b).collect();
    v[states] = 0.0;
    let mut w: Vec<f64> = v.iter().map(|&x| (x + rng.gen::<f64>().powi(2) * big_b).min(big_b)).collect();
    w[states] = 0.0;
    if rng.gen_bool(0.3) {
        // move a single coordinate
        w = v.clone();
        let s = rng.gen_range(0..states);
        w[s] = rng.gen_range(v[s]..=big_b);
    }
    let c_hat = rng.gen::<f64>();
    let n_plus = n as f64;
    let f = |x: &[f64]| {
        let (pv, var) = mean_and_variance(&p, x);
        c_hat + pv - bonus(var, n_plus, iota, big_b, states, &consts)
    };
    let monotone = f(&v) <= f(&w);
    let (pv, var) = mean_and_variance(&p, &v);
    let full = bonus(var, n_plus, iota, big_b, states, &consts);
    let halves = consts.var_coef / 2.0 * (var * iota / n_plus).sqrt()
        + consts.range_coef / 2.0 * big_b * (states as f64).sqrt() * iota / n_plus;
    let property_two = pv - full <= pv - halves;
    let variance_active = consts.var_coef * (var * iota / n_plus).sqrt()
        > consts.range_coef * big_b * (states as f64).sqrt() * iota / n_plus;
    BonusCase { monotone, property_two, variance_active }
}
