//! Rayon-backed inner loops against their sequential twins. The outputs are
//! bit-identical by construction; only the throughput differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use bootperc_core::dynamics::{closure, ModelKind};
use bootperc_core::events::{enumerate_good_schedules, EventSpec, FamilySpec};
use bootperc_core::lattice::{Configuration, Rect, SampleSpec};
use bootperc_core::montecarlo::{estimate_event, estimate_event_seq, Predicate};
use bootperc_core::oracle::{exact_probability, exact_probability_seq};
use bootperc_core::analytic::{union_lower_bound, AnalyticContext};

fn bench_monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_event_i3");
    let pred = Predicate::InternallyFilled {
        side: 3,
        model: ModelKind::Modified,
    };
    for trials in [20_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| estimate_event(0.3, &pred, t, 42, 0.95).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| estimate_event_seq(0.3, &pred, t, 42, 0.95).unwrap());
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_probability_d2_5");
    group.sample_size(20);
    let pred = Predicate::Event(EventSpec::diagonal(2, 5).unwrap());
    group.bench_function("parallel", |b| {
        b.iter(|| exact_probability(0.3, &pred, 28).unwrap());
    });
    group.bench_function("sequential", |b| {
        b.iter(|| exact_probability_seq(0.3, &pred, 28).unwrap());
    });
    group.finish();
}

fn bench_union_bound(c: &mut Criterion) {
    let ctx = AnalyticContext::new(0.2).unwrap();
    let spec = FamilySpec::new(vec![2, 6, 14, 30], 2, None, 2_000_000).unwrap();
    let family = enumerate_good_schedules(&spec).unwrap();
    c.bench_function("union_lower_bound_3_scales", |b| {
        b.iter(|| union_lower_bound(&ctx, 40, black_box(&family)).unwrap());
    });
}

fn bench_closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("closure_1024");
    group.sample_size(10);
    let domain = Rect::new(0, 0, 1023, 1023).unwrap();
    let cfg = Configuration::sample(&SampleSpec::new(0.1, 7, domain).unwrap());
    group.bench_function("modified", |b| {
        b.iter(|| closure(black_box(&cfg), ModelKind::Modified));
    });
    group.bench_function("classical", |b| {
        b.iter(|| closure(black_box(&cfg), ModelKind::Classical));
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_monte_carlo,
    bench_oracle,
    bench_union_bound,
    bench_closure
);
criterion_main!(benches);
