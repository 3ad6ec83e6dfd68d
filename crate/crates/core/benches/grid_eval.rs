//! Grid-scale benchmarks for the data-parallel entry points.
//!
//! Every benchmark registers under a mode label derived from the `parallel`
//! feature, so running
//!
//! ```text
//! cargo bench -p weierstrass
//! cargo bench -p weierstrass --no-default-features
//! ```
//!
//! fills the same groups with `parallel/...` and `sequential/...` entries
//! for a direct comparison in criterion's report.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use weierstrass::domain::{build_domain, sample_grid, GridSpec};
use weierstrass::geometry::curvature_at;
use weierstrass::holo::ArctanSum;
use weierstrass::immersion::Engine;
use weierstrass::intersect::self_intersections;
use weierstrass::mesh::build_mesh;
use weierstrass::quad::QuadratureConfig;
use weierstrass::Complex;
use weierstrass::ConstructionParams;

const MODE: &str = if cfg!(feature = "parallel") {
    "parallel"
} else {
    "sequential"
};

// Mirror of the crate-internal parallel shim, for a like-for-like grid map.
#[cfg(feature = "parallel")]
fn bench_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn bench_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

fn bench_batch_eval(c: &mut Criterion) {
    let params = ConstructionParams::new(vec![0.0], 0.1).unwrap();
    let spec = build_domain(&params).unwrap();
    let data = ArctanSum::new(&params).unwrap();
    let quad = QuadratureConfig::default();
    let engine = Engine::new(&data, quad).with_domain(&spec);

    let mut group = c.benchmark_group("immersion_batch");
    for nx in [100usize, 200] {
        let pts = sample_grid(&spec, &GridSpec::new(nx, 41)).unwrap();
        let zs: Vec<Complex> = pts.iter().map(|p| p.z()).collect();
        group.bench_with_input(BenchmarkId::new(MODE, nx), &zs, |b, zs| {
            b.iter(|| engine.eval_batch(zs).unwrap());
        });
    }
    group.finish();
}

fn bench_curvature_grid(c: &mut Criterion) {
    let params = ConstructionParams::new(vec![-0.2, 0.2], 0.05).unwrap();
    let spec = build_domain(&params).unwrap();
    let data = ArctanSum::new(&params).unwrap();
    let pts = sample_grid(&spec, &GridSpec::new(250, 21)).unwrap();
    let zs: Vec<Complex> = pts.iter().map(|p| p.z()).collect();

    let mut group = c.benchmark_group("curvature_grid");
    group.bench_with_input(BenchmarkId::new(MODE, zs.len()), &zs, |b, zs| {
        b.iter(|| {
            bench_map(zs, |z| curvature_at(&data, *z).unwrap().k)
                .into_iter()
                .fold(0.0f64, f64::min)
        });
    });
    group.finish();
}

fn bench_mesh_and_scan(c: &mut Criterion) {
    let params = ConstructionParams::new(vec![0.0], 0.1).unwrap();
    let quad = QuadratureConfig::default();
    let grid = GridSpec::new(200, 21);

    let mut group = c.benchmark_group("mesh_pipeline");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(MODE, "build"), |b| {
        b.iter(|| build_mesh(&params, &grid, &quad).unwrap());
    });
    let mesh = build_mesh(&params, &grid, &quad).unwrap();
    group.bench_function(BenchmarkId::new(MODE, "self_intersect"), |b| {
        b.iter(|| self_intersections(&mesh).unwrap());
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_batch_eval,
    bench_curvature_grid,
    bench_mesh_and_scan
);
criterion_main!(benches);
