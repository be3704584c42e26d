use criterion::{criterion_group, criterion_main, Criterion};
use hdbp_core::oracle::{enumerate_counts, r_event_polynomial, span_polynomial, EnumerationOptions};

fn enumeration(c: &mut Criterion) {
    let opts = EnumerationOptions::default();
    let mut group = c.benchmark_group("enumerate_counts");
    group.sample_size(10);
    group.bench_function("4x3", |b| b.iter(|| enumerate_counts(4, 3, &opts).unwrap()));
    group.bench_function("5x4", |b| b.iter(|| enumerate_counts(5, 4, &opts).unwrap()));
    group.finish();
}

fn polynomials(c: &mut Criterion) {
    let mut group = c.benchmark_group("polynomials");
    group.sample_size(10);
    group.bench_function("span/4", |b| b.iter(|| span_polynomial(4).unwrap()));
    group.bench_function("r_event/4", |b| b.iter(|| r_event_polynomial(4).unwrap()));
    group.finish();
}

criterion_group!(benches, enumeration, polynomials);
criterion_main!(benches);
