//! Reference learners used to anchor regret comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{ssp_optimal_values, DriftSequence, PolicyTable, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::sim::{IntervalRecord, Learner};

/// Picks every action uniformly at random.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    num_actions: usize,
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(num_actions: usize, seed: u64) -> Self {
        Self { num_actions, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Learner for UniformRandom {
    fn on_interval_start(&mut self, _m: usize, _s1: usize) {}

    fn choose_action(&mut self, _h: usize, _s: usize) -> usize {
        self.rng.gen_range(0..self.num_actions)
    }

    fn observe(&mut self, _h: usize, _s: usize, _a: usize, _cost: f64, _next: usize) -> bool {
        false
    }

    fn on_interval_end(&mut self, _record: &IntervalRecord) {}
}

/// Plays the optimal policy of the first segment forever.
#[derive(Debug, Clone)]
pub struct FixedOptimalFirst {
    policy: PolicyTable,
}

impl FixedOptimalFirst {
    pub fn new(seq: &DriftSequence) -> Result<Self> {
        let (_, policy) = ssp_optimal_values(seq.segment(0), DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
        Ok(Self { policy })
    }

    pub fn policy(&self) -> &PolicyTable {
        &self.policy
    }
}

impl Learner for FixedOptimalFirst {
    fn on_interval_start(&mut self, _m: usize, _s1: usize) {}

    fn choose_action(&mut self, h: usize, s: usize) -> usize {
        self.policy.action(h, s)
    }

    fn observe(&mut self, _h: usize, _s: usize, _a: usize, _cost: f64, _next: usize) -> bool {
        false
    }

    fn on_interval_end(&mut self, _record: &IntervalRecord) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envgen::make_random_proper;
    use crate::model::drift_stats;
    use crate::sim::{run_experiment, HorizonConfig, RunOptions};

    #[test]
    fn uniform_covers_all_actions() {
        let mut l = UniformRandom::new(3, 1);
        let mut seen = [0; 3];
        for _ in 0..300 {
            seen[l.choose_action(1, 0)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 50));
    }

    #[test]
    fn fixed_optimal_has_small_regret_on_stationary_input() {
        let seq = DriftSequence::stationary(400, make_random_proper(3, 2, 0.2, 8).unwrap()).unwrap();
        let stats = drift_stats(&seq, DEFAULT_TOL).unwrap();
        let cfg = HorizonConfig::from_stats(&stats, 400);
        let mut l = FixedOptimalFirst::new(&seq).unwrap();
        let out = run_experiment(&seq, &mut l, &cfg, 2, &RunOptions::default()).unwrap();
        // zero-mean noise: |R_K| grows like √K
        assert!(out.ledger.summary.regret.abs() < 4.0 * stats.b_star * 400f64.sqrt());
    }
}
