use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use std::hint::black_box;

use isomeasure::{chain_verify_thm1, chain_verify_thm2, Rearrangement, TransportMap};
use isomeasure_bench::fixtures;

fn evaluate(c: &mut Criterion) {
    let mut g = c.benchmark_group("transport");
    for (name, m) in fixtures(4) {
        let apex = DVector::from_fn(5, |i, _| if i == 4 { 1.0 } else { 0.0 });
        let first = TransportMap::for_measure(Rearrangement::ExponentialToGaussian, &m).unwrap();
        let second = TransportMap::for_measure(Rearrangement::GaussianToExponential, &m).unwrap();
        let mut ws = first.workspace();
        g.bench_function(format!("evaluate/{name}"), |b| {
            b.iter(|| first.evaluate(black_box(apex.as_slice()), &mut ws))
        });
        g.bench_function(format!("probe_exponential/{name}"), |b| b.iter(|| first.probe(black_box(&apex)).unwrap()));
        g.bench_function(format!("probe_gaussian/{name}"), |b| b.iter(|| second.probe(black_box(&apex)).unwrap()));
    }
    g.finish();
}

fn chains(c: &mut Criterion) {
    let mut g = c.benchmark_group("chain");
    g.sample_size(10);
    for (name, m) in fixtures(3) {
        g.bench_function(format!("first/{name}"), |b| b.iter(|| chain_verify_thm1(&m, 10_000, black_box(1)).unwrap()));
        g.bench_function(format!("second/{name}"), |b| b.iter(|| chain_verify_thm2(&m, 10_000, black_box(1)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, evaluate, chains);
criterion_main!(benches);
