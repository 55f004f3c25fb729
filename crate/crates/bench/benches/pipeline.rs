use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leafdens_core::synth::{generate, SynthConfig};
use leafdens_core::{
    agglomerate, density_from_ccd, distance_matrix, normalize_leaf, trig_moments, DistanceKind,
    Linkage, StepDensity,
};

fn dataset(per_group: usize) -> leafdens_core::Dataset {
    generate(&SynthConfig {
        per_group,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn bench_density(c: &mut Criterion) {
    let ds = dataset(1);
    let seq = &ds.sequences()[0];
    c.bench_function("density_from_ccd", |b| b.iter(|| density_from_ccd(seq)));
    c.bench_function("normalize_leaf", |b| b.iter(|| normalize_leaf(seq)));
    let d = normalize_leaf(seq);
    c.bench_function("trig_moments_r5", |b| b.iter(|| trig_moments(&d, 5).unwrap()));
}

fn bench_matrix(c: &mut Criterion) {
    let ds = dataset(5);
    let densities: Vec<StepDensity> = ds.sequences().iter().map(normalize_leaf).collect();
    let labels = ds.ids();
    let mut group = c.benchmark_group("distance_matrix");
    for kind in DistanceKind::all(5) {
        group.bench_with_input(BenchmarkId::from_parameter(kind.tag()), &kind, |b, &kind| {
            b.iter(|| distance_matrix(&densities, &labels, kind).unwrap())
        });
    }
    group.finish();

    let dm = distance_matrix(&densities, &labels, DistanceKind::L1).unwrap();
    c.bench_function("agglomerate_complete", |b| {
        b.iter(|| agglomerate(&dm, Linkage::Complete).unwrap())
    });
}

criterion_group!(benches, bench_density, bench_matrix);
criterion_main!(benches);
