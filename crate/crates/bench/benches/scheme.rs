use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crround_core::mc::sample_r;
use crround_core::rng::seeded;
use crround_core::{CrScheme, FractionalPoint, UniformMatroid, DEFAULT_POLYTOPE_TOL};

fn select(c: &mut Criterion) {
    let mut group = c.benchmark_group("select");
    for (n, k) in [(10, 3), (100, 10), (1000, 100)] {
        let x = FractionalPoint::symmetric(k, n).unwrap();
        let m = UniformMatroid::with_size(n, k).unwrap();
        let scheme = CrScheme::uniform(&m, &x, DEFAULT_POLYTOPE_TOL).unwrap();
        let mut rng = seeded(1);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n={n},k={k}")),
            &n,
            |b, _| {
                b.iter(|| {
                    let realized = sample_r(&x, &mut rng);
                    black_box(scheme.select(&realized, &mut rng).unwrap())
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, select);
criterion_main!(benches);
