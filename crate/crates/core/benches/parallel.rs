//! Sequential against rayon execution for the two hot loops: BEM matrix
//! assembly and a spectral ε-sweep. Build without default features to
//! measure the fallback alone.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holelab_core::bem3::{assemble, BemOptions, CartesianDataFamily};
use holelab_core::continuation::{default_spheres, linspace, sweep, Problem, TargetSet};
use holelab_core::mesh3::{icosphere, GeometryPair};
use holelab_core::spectral::ZonalDataFamily;
use holelab_core::{Dimension, EpsPoly, Execution, Frame};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bem_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("bem_assembly");
    group.sample_size(10);
    let data = CartesianDataFamily::new()
        .with_inner([0, 0, 1], EpsPoly::constant(1.0))
        .with_outer([0, 0, 0], EpsPoly::constant(0.5));
    for s in [1, 2] {
        let pair =
            GeometryPair::new(icosphere(1.0, s).unwrap(), icosphere(1.0, s).unwrap()).unwrap();
        for (name, exec) in MODES {
            let opts = BemOptions {
                exec,
                ..BemOptions::default()
            };
            group.bench_with_input(
                BenchmarkId::new(name, 2 * pair.inner.len()),
                &pair,
                |b, pair| b.iter(|| assemble(black_box(pair), &data, -0.4, &opts).unwrap()),
            );
        }
    }
    group.finish();
}

fn spectral_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_sweep");
    let g = default_spheres(Dimension::new(5).unwrap());
    let mut data = ZonalDataFamily::new();
    for l in 0..=12 {
        data = data.with_inner(l, EpsPoly::new(vec![1.0 / (l + 1) as f64, 0.5]));
    }
    let problem = Problem::Spectral {
        geometry: g.clone(),
        data,
    };
    let targets = [TargetSet::new(
        Frame::Macroscopic,
        (0..64)
            .map(|k| g.point(0.5 + k as f64 * 0.2, (k as f64 * 0.37).cos()))
            .collect(),
    )];
    let grid = linspace(0.01, 0.5, 200);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sweep(black_box(&problem), &grid, &targets, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bem_assembly, spectral_sweep);
criterion_main!(benches);
