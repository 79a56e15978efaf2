use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpool::harness::{random_density, stream, verify_three_observer_with, verify_two_observer_with};
use qpool::pooling::{pool_symmetric, pool_symmetric_multi_with, NormMode};
use qpool::{DensityMatrix, Execution};
use std::hint::black_box;

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn states(n: usize, dim: usize) -> Vec<DensityMatrix> {
    let mut rng = stream(1);
    (0..n).map(|_| random_density(dim, dim, &mut rng).unwrap()).collect()
}

fn two_observer_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_two_observer");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| verify_two_observer_with(exec, black_box(200), 2..=5, 1e-10, 42))
        });
    }
    group.finish();
}

fn three_observer_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_three_observer");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| verify_three_observer_with(exec, black_box(100), 3, 7))
        });
    }
    group.finish();
}

fn permutation_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("pool_symmetric_multi");
    for n in [3, 5, 6] {
        let input = states(n, 4);
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &input, |b, s| {
                b.iter(|| pool_symmetric_multi_with(exec, black_box(s), NormMode::Trace).unwrap())
            });
        }
    }
    group.finish();
}

fn pairwise(c: &mut Criterion) {
    let s = states(2, 8);
    c.bench_function("pool_symmetric/dim8", |b| {
        b.iter(|| pool_symmetric(black_box(&s[0]), black_box(&s[1])).unwrap())
    });
}

criterion_group!(benches, two_observer_suite, three_observer_suite, permutation_sum, pairwise);
criterion_main!(benches);
