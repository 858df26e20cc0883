use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use switchtrack::{project, project_oracle, InteriorSimplexVector, LowerBounds};

fn simplex(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn instance(n: usize) -> (InteriorSimplexVector, LowerBounds) {
    let mut r = ChaCha8Rng::seed_from_u64(n as u64);
    let w = InteriorSimplexVector::new(simplex(&mut r, n)).unwrap();
    // roughly half the components end up clamped
    let beta = LowerBounds::new(simplex(&mut r, n).into_iter().map(|b| 0.5 * b).collect()).unwrap();
    (w, beta)
}

fn bench_projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    for e in [8, 12, 16, 20] {
        let n = 1usize << e;
        let (w, beta) = instance(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("linear", n), &n, |b, _| {
            b.iter(|| project(black_box(&w), black_box(&beta)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sort_oracle", n), &n, |b, _| {
            b.iter(|| project_oracle(black_box(&w), black_box(&beta)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_projection);
criterion_main!(benches);
