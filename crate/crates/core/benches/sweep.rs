use criterion::{criterion_group, criterion_main, Criterion};

use parity_kit::chord::Flavor;
use parity_kit::oracle::{
    axiom_sweep, axiom_sweep_sequential, enumerate_diagrams, sweep, sweep_sequential,
    verify_class_consistency, NamedParity,
};

fn axioms(c: &mut Criterion) {
    let mut g = c.benchmark_group("axiom_sweep_free_n3");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| axiom_sweep(3, Flavor::Free, NamedParity::OrientedGaussian).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| axiom_sweep_sequential(3, Flavor::Free, NamedParity::OrientedGaussian).unwrap())
    });
    g.finish();
}

fn classes(c: &mut Criterion) {
    let all = enumerate_diagrams(5, Flavor::Free).unwrap();
    let mut g = c.benchmark_group("class_consistency_n5");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| sweep(&all, |d| verify_class_consistency(d).is_ok()))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| sweep_sequential(&all, |d| verify_class_consistency(d).is_ok()))
    });
    g.finish();
}

criterion_group!(benches, axioms, classes);
criterion_main!(benches);
