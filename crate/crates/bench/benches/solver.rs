use std::collections::BTreeMap;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use persuade_core::fixtures::fixture;
use persuade_core::{
    build_primal, classify_dippedness, nad, solve_lp, DiscreteProblem, Orientation,
};

fn bench_lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp_solve");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for &res in &[51usize, 101] {
        let fx = fixture("rs", &BTreeMap::new()).unwrap();
        let problem = DiscreteProblem::from_prior(fx.model.clone(), &fx.prior, res, res).unwrap();
        let built = build_primal(&problem).unwrap();
        group.bench_with_input(BenchmarkId::new("rs", res), &res, |b, _| {
            b.iter(|| solve_lp(&problem, &built).unwrap().value)
        });
    }
    group.finish();
}

fn bench_nad(c: &mut Criterion) {
    let mut group = c.benchmark_group("nad_shoot");
    group.sample_size(20);
    let fx = fixture("rs", &BTreeMap::new()).unwrap();
    for &steps in &[500usize, 2000] {
        group.bench_with_input(BenchmarkId::new("rs", steps), &steps, |b, &steps| {
            b.iter(|| {
                nad::nad_shoot_with(&fx.model, &fx.prior, Orientation::Dipped, steps)
                    .unwrap()
                    .a_hi
            })
        });
    }
    group.finish();
}

fn bench_triple_scan(c: &mut Criterion) {
    let fx = fixture("segpair", &BTreeMap::new()).unwrap();
    let t1 = fx.expected_t1.as_ref().unwrap();
    let t2 = fx.expected_t2.as_ref().unwrap();
    let mut pts = Vec::new();
    for k in 0..=2000 {
        let a = -1.0 + 2.0 * k as f64 / 2000.0;
        pts.push((a, t1(a)));
        pts.push((a, t2(a)));
    }
    c.bench_function("classify_dippedness/segpair_4002pts", |b| {
        b.iter(|| classify_dippedness(&pts).unwrap().verdict)
    });
}

criterion_group!(benches, bench_lp, bench_nad, bench_triple_scan);
criterion_main!(benches);
