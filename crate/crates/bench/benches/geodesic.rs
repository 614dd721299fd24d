//! Cost of a full geodesic-plus-transport run, the per-sample trace pass,
//! and the indicatrix norm estimate that dominates the bound checks.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use finslerlab_core::chart::{catalog, CatalogParams};
use finslerlab_core::fundamental::mean_cartan_norm;
use finslerlab_core::geodesic::{trace_series, transport_run, IntegrateOptions};

fn bench_geodesic(c: &mut Criterion) {
    let funk = catalog("funk_ball", 2, &CatalogParams::default()).unwrap();
    let opts = IntegrateOptions::default();
    let v0 = vec![0.3, -1.0];

    let mut group = c.benchmark_group("geodesic");
    group.sample_size(20);
    group.bench_function("transport-run-funk", |b| {
        b.iter(|| {
            transport_run(
                &funk.spec,
                black_box(&funk.basepoint),
                black_box(&funk.base_direction),
                black_box(&v0),
                &opts,
            )
            .unwrap()
        })
    });
    group.bench_function("trace-series-funk", |b| {
        let (path, frame) =
            transport_run(&funk.spec, &funk.basepoint, &funk.base_direction, &v0, &opts).unwrap();
        b.iter(|| trace_series(&funk.spec, black_box(&path), black_box(&frame)).unwrap())
    });
    group.bench_function("mean-torsion-norm-funk", |b| {
        let x = vec![0.3, -0.2];
        b.iter(|| mean_cartan_norm(&funk.spec, black_box(&x), 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_geodesic);
criterion_main!(benches);
