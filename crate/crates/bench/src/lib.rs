//! Shared fixtures for the criterion benches.

use nsslab::envgen::make_random_proper;
use nsslab::model::SspInstance;
use nsslab::mvp::{Counters, ProblemDims};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub instance: SspInstance,
    pub counters: Counters,
    pub dims: ProblemDims,
}

/// Random proper instance plus counters filled with `visits` samples per pair.
pub fn fixture(states: usize, actions: usize, visits: usize, horizon: usize) -> Fixture {
    let instance = make_random_proper(states, actions, 0.1, 7).expect("valid sizes");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counters = Counters::new(states, actions);
    for s in 0..states {
        for a in 0..actions {
            for _ in 0..visits {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let next = instance
                    .row(s, a)
                    .iter()
                    .position(|p| {
                        acc += p;
                        u < acc
                    })
                    .unwrap_or(states);
                let cost = f64::from(rng.gen::<f64>() < instance.cost(s, a));
                counters.record(s, a, cost, next);
            }
        }
    }
    let dims = ProblemDims { num_states: states, num_actions: actions, horizon, episodes: 1000, b_star: 2.0, delta: 0.1 };
    Fixture { instance, counters, dims }
}
