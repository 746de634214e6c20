use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nsslab::master::{Envelope, MalgSchedule};
use nsslab::model::{ssp_optimal_values, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use nsslab::mvp::{iota, widened_update, ConfidenceConstants, Estimates, ValueTables};
use nsslab_bench::fixture;

fn value_iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("ssp_optimal_values");
    for (s, a) in [(5, 3), (20, 4), (50, 5)] {
        let f = fixture(s, a, 0, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("S{s}_A{a}")), &f.instance, |b, inst| {
            b.iter(|| ssp_optimal_values(black_box(inst), DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap())
        });
    }
    group.finish();
}

fn mvp_update(c: &mut Criterion) {
    let consts = ConfidenceConstants::default();
    let mut group = c.benchmark_group("mvp_update");
    for (s, a, h) in [(5, 3, 50), (20, 4, 100)] {
        let f = fixture(s, a, 40, h);
        let est = Estimates::from_counters(&f.counters, iota(&f.dims, 100, &consts));
        let mut tables = ValueTables::new(s, a, h);
        let id = format!("S{s}_A{a}_H{h}");
        group.bench_function(BenchmarkId::new("estimates", &id), |b| {
            b.iter(|| Estimates::from_counters(black_box(&f.counters), est.iota))
        });
        group.bench_function(BenchmarkId::new("backward_pass", &id), |b| {
            b.iter(|| tables.backward_pass(black_box(&est), &est.cost_lcb, 0.0, f.dims.b_star, &consts))
        });
        group.bench_function(BenchmarkId::new("widened_update", &id), |b| {
            b.iter(|| widened_update(&mut tables, black_box(&est), &f.dims, 100, &consts))
        });
    }
    group.finish();
}

fn malg(c: &mut Criterion) {
    let env = Envelope::for_mvp_base(2.0, 5, 3, 50, 1.0);
    c.bench_function("malg_build_order10", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        b.iter(|| MalgSchedule::build(10, &env, true, &mut rng))
    });
}

criterion_group!(benches, value_iteration, mvp_update, malg);
criterion_main!(benches);
