use proptest::prelude::*;

use nsslab::envgen::make_random_proper;
use nsslab::model::{drift_stats, DriftSequence, DEFAULT_TOL};
use nsslab::mvp::{ConfidenceConstants, ProblemDims};
use nsslab::mvptest::{MvpTest, MvpTestConfig};
use nsslab::sim::{run_experiment, HorizonConfig, RunOptions};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn window_counters_and_correction_follow_the_reset_rules(
        seed in any::<u64>(),
        wc in 1u64..25,
        wp in 1u64..25,
        kappa in prop_oneof![Just(0.0), Just(0.5), Just(3.0)],
        reset_prob in 0.0f64..=1.0,
        log_scale in -12.0f64..0.0,
    ) {
        let inst = make_random_proper(3, 2, 0.15, seed).unwrap();
        let seq = DriftSequence::stationary(40, inst).unwrap();
        let stats = drift_stats(&seq, DEFAULT_TOL).unwrap();
        let horizon = HorizonConfig::from_stats(&stats, 40);
        let dims = ProblemDims { num_states: 3, num_actions: 2, horizon: horizon.horizon, episodes: 40, b_star: stats.b_star, delta: 0.1 };
        let mut cfg = MvpTestConfig::tuned(dims, stats.t_star, 0.1, 0.1);
        cfg.window_c = wc;
        cfg.window_p = wp;
        cfg.kappa_c = kappa;
        cfg.kappa_p = kappa;
        cfg.reset_prob = reset_prob;
        cfg.consts = ConfidenceConstants { iota_scale: log_scale.exp(), ..ConfidenceConstants::default() };
        let mut learner = MvpTest::new(cfg, seed);
        let opts = RunOptions { capture_telemetry: true, ..RunOptions::default() };
        let out = run_experiment(&seq, &mut learner, &horizon, seed, &opts).unwrap();
        let mut prev: Option<(f64, f64, f64)> = None;
        for (m, t) in &out.telemetry {
            let (nu_c, nu_p, eta) = (t.get("nu_c").unwrap(), t.get("nu_p").unwrap(), t.get("eta").unwrap());
            prop_assert!(nu_c <= nu_p, "interval {m}: nu_c {nu_c} > nu_p {nu_p}");
            prop_assert!(nu_c >= 1.0 && nu_c <= wc as f64 && nu_p <= wp as f64);
            if let Some((pc, pp, pe)) = prev {
                if nu_c == pc + 1.0 && nu_p == pp + 1.0 {
                    prop_assert!(eta <= pe, "interval {m}: eta rose from {pe} to {eta}");
                }
            }
            prev = Some((nu_c, nu_p, eta));
        }
    }
}
