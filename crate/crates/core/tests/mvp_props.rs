mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nsslab::envgen::make_random_proper;
use nsslab::mvp::{iota, widened_update, ConfidenceConstants, Counters, Estimates, ProblemDims, ValueTables};

fn filled(states: usize, actions: usize, visits: &[u8], seed: u64) -> Counters {
    let inst = make_random_proper(states, actions, 0.1, seed).unwrap();
    let mut c = Counters::new(states, actions);
    let mut k = 0usize;
    for s in 0..states {
        for a in 0..actions {
            let reps = visits[(s * actions + a) % visits.len()] as usize;
            for r in 0..reps {
                // deterministic spread over the outcomes that have mass
                let row = inst.row(s, a);
                let mut t = (k + r) % row.len();
                while row[t] == 0.0 {
                    t = (t + 1) % row.len();
                }
                c.record(s, a, ((k + r) % 3 == 0) as u8 as f64, t);
            }
            k += 7;
        }
    }
    c
}

proptest! {
    #[test]
    fn bonus_monotone_and_property_two(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let case = common::bonus_case(&mut rng);
        prop_assert!(case.monotone);
        prop_assert!(case.property_two);
    }

    #[test]
    fn widening_exits_at_the_first_feasible_doubling(
        states in 1usize..=4,
        actions in 1usize..=3,
        visits in prop::collection::vec(0u8..40, 1..12),
        seed in any::<u64>(),
        m in 1usize..500,
        horizon in 1usize..30,
        log_scale in -20.0f64..2.0,
    ) {
        let consts = ConfidenceConstants { iota_scale: log_scale.exp(), ..ConfidenceConstants::default() };
        let dims = ProblemDims { num_states: states, num_actions: actions, horizon, episodes: 100, b_star: 1.0, delta: 0.1 };
        let counters = filled(states, actions, &visits, seed);
        let est = Estimates::from_counters(&counters, iota(&dims, m, &consts));
        let mut tables = ValueTables::new(states, actions, horizon);
        widened_update(&mut tables, &est, &dims, m, &consts);
        let limit = dims.big_b() / 4.0;
        prop_assert!(tables.max_q() <= limit);
        let x = tables.bias;
        let x0 = 1.0 / (m as f64 * horizon as f64);
        if x != x0 {
            let mut probe = ValueTables::new(states, actions, horizon);
            probe.backward_pass(&est, &est.cost_lcb, x / 2.0, dims.b_star, &consts);
            prop_assert!(probe.max_q() > limit, "x = {x} was not minimal");
        }
    }

    #[test]
    fn cost_and_transition_counters_reset_independently(ops in prop::collection::vec((0u8..4, 0usize..3, 0usize..2, 0usize..4, any::<bool>()), 1..200)) {
        let (ns, na) = (3, 2);
        let mut c = Counters::new(ns, na);
        let mut cost_sum = vec![0.0; ns * na];
        let mut cost_n = vec![0u64; ns * na];
        let mut trans_n = vec![0u64; ns * na];
        let mut outcomes = vec![vec![0u64; ns + 1]; ns * na];
        for (op, s, a, next, bit) in ops {
            let i = s * na + a;
            match op {
                0 => {
                    for x in cost_sum.iter_mut() { *x = 0.0; }
                    cost_n.fill(0);
                    c.reset_cost();
                }
                1 => {
                    trans_n.fill(0);
                    for o in outcomes.iter_mut() { o.fill(0); }
                    c.reset_transitions();
                }
                _ => {
                    let cost = bit as u8 as f64;
                    cost_sum[i] += cost;
                    cost_n[i] += 1;
                    trans_n[i] += 1;
                    outcomes[i][next] += 1;
                    let flag = c.record(s, a, cost, next);
                    prop_assert_eq!(flag, cost_n[i].is_power_of_two() || trans_n[i].is_power_of_two());
                }
            }
            for s in 0..ns {
                for a in 0..na {
                    let i = s * na + a;
                    prop_assert_eq!(c.cost_sum(s, a), cost_sum[i]);
                    prop_assert_eq!(c.cost_count(s, a), cost_n[i]);
                    prop_assert_eq!(c.trans_count(s, a), trans_n[i]);
                    prop_assert_eq!(c.outcomes(s, a), outcomes[i].as_slice());
                }
            }
        }
    }
}
