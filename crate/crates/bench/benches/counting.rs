use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use entsearch_bench::problem;
use entsearch_core::counting::{build_count_state, predicted_ancilla_distribution, qft_in_place};
use entsearch_core::qstate::moments;
use entsearch_core::C64;

fn qft(c: &mut Criterion) {
    let mut group = c.benchmark_group("qft");
    for k in [6u32, 10, 14] {
        let p = 1usize << k;
        let v: Vec<C64> = (0..p)
            .map(|i| C64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        group.throughput(Throughput::Elements(p as u64));
        group.bench_function(BenchmarkId::from_parameter(p), |b| {
            let mut buf = v.clone();
            b.iter(|| qft_in_place(black_box(&mut buf)).unwrap());
        });
    }
    group.finish();
}

fn circuit(c: &mut Criterion) {
    let mut group = c.benchmark_group("count_circuit");
    group.sample_size(20);
    for (q, p) in [(6u32, 32usize), (8, 64), (10, 128)] {
        let (state, good) = problem(q, 2, 3, 5);
        group.bench_function(BenchmarkId::new(format!("N={}", 1 << q), p), |b| {
            b.iter(|| build_count_state(black_box(&state), &good, p).unwrap());
        });
    }
    group.finish();
}

fn prediction(c: &mut Criterion) {
    let (state, good) = problem(10, 2, 3, 6);
    let m = moments(&state, &good).unwrap();
    c.bench_function("predicted_ancilla_distribution/P=1024", |b| {
        b.iter(|| predicted_ancilla_distribution(black_box(&m), 1024).unwrap());
    });
}

criterion_group!(benches, qft, circuit, prediction);
criterion_main!(benches);
