use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use convgraph::speedup::{bench_instance, solve_direct, solve_fft, Template};

fn paths(c: &mut Criterion, template: Template, sizes: &[usize]) {
    let mut group = c.benchmark_group(format!("{template}-4"));
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for &a in sizes {
        let inst = bench_instance(&mut rng, template, 4, a);
        group.bench_with_input(BenchmarkId::new("direct", a), &inst, |b, inst| {
            b.iter(|| solve_direct(inst).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fft", a), &inst, |b, inst| {
            b.iter(|| solve_fft(inst).unwrap())
        });
    }
    group.finish();
}

fn chain(c: &mut Criterion) {
    paths(c, Template::Chain, &[16, 64, 256]);
}

fn star(c: &mut Criterion) {
    paths(c, Template::Star, &[16, 64, 256]);
}

criterion_group!(speedup, chain, star);
criterion_main!(speedup);
