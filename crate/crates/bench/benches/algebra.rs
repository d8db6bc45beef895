use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use convgraph::random::random_factor;
use convgraph::{Direction, VarId};

fn pairwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [8usize, 32, 128] {
        let f = random_factor(&mut rng, &[(VarId(0), n), (VarId(1), n)], 0.1, 1.0);
        let g = random_factor(&mut rng, &[(VarId(1), n), (VarId(2), n)], 0.1, 1.0);
        group.bench_with_input(BenchmarkId::new("convolve", n), &n, |b, _| {
            b.iter(|| f.convolve(&g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("multiply", n), &n, |b, _| {
            b.iter(|| f.multiply(&g).unwrap())
        });
    }
    group.finish();
}

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("dft");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // Powers of two and a prime, which goes through the Bluestein path.
    for n in [64usize, 256, 257] {
        let f = random_factor(&mut rng, &[(VarId(0), n), (VarId(1), n)], 0.1, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| f.dft(Direction::Forward))
        });
    }
    group.finish();
}

criterion_group!(algebra, pairwise, transform);
criterion_main!(algebra);
