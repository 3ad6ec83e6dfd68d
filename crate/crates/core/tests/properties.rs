//! Cross-module invariants: Cauchy-Riemann structure, conformality, path
//! independence, curvature identities, discrete-vs-analytic curvature.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weierstrass::domain::{build_domain, sample_grid, GridSpec};
use weierstrass::geometry::curvature_at;
use weierstrass::holo::{continuation_check, ArctanSum, Helicoid, HoloData};
use weierstrass::immersion::{helicoid_oracle, tangent_frame, Engine};
use weierstrass::quad::QuadratureConfig;
use weierstrass::Complex;
use weierstrass::ConstructionParams;

fn params(points: &[f64], a: f64) -> ConstructionParams {
    ConstructionParams::new(points.to_vec(), a).unwrap()
}

/// Random interior point of the domain (margin away from the rim so small
/// finite-difference stencils stay inside).
fn random_interior(rng: &mut ChaCha8Rng, p: &ConstructionParams, shrink: f64) -> Complex {
    let spec = build_domain(p).unwrap();
    loop {
        let x: f64 = rng.random_range(-0.5 + 1e-3..0.5 - 1e-3);
        let w = spec.width_at(x).unwrap();
        let y = rng.random_range(-1.0..1.0) * w * shrink;
        let z = Complex::new(x, y);
        if spec.contains(z) {
            return z;
        }
    }
}

#[test]
fn cauchy_riemann_finite_differences() {
    let step = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [params(&[0.0], 0.25), params(&[-0.2, 0.2], 0.1)] {
        let data = ArctanSum::new(&p).unwrap();
        for _ in 0..200 {
            let z = random_interior(&mut rng, &p, 0.8);
            let d = data.dz_h(z).unwrap();
            let at = |dx: f64, dy: f64| data.h(z + Complex::new(dx, dy)).unwrap();
            let du_dx = (at(step, 0.0).re - at(-step, 0.0).re) / (2.0 * step);
            let du_dy = (at(0.0, step).re - at(0.0, -step).re) / (2.0 * step);
            let dv_dx = (at(step, 0.0).im - at(-step, 0.0).im) / (2.0 * step);
            let dv_dy = (at(0.0, step).im - at(0.0, -step).im) / (2.0 * step);
            let scale = d.norm();
            assert!((du_dx - d.re).abs() <= 1e-6 * scale, "du/dx at {z}");
            assert!((-du_dy - d.im).abs() <= 1e-6 * scale, "du/dy at {z}");
            assert!((dv_dy - d.re).abs() <= 1e-6 * scale, "dv/dy at {z}");
            assert!((dv_dx - d.im).abs() <= 1e-6 * scale, "dv/dx at {z}");
        }
    }
}

#[test]
fn real_axis_values_are_real() {
    for p in [params(&[0.0], 0.25), params(&[-0.3, 0.0, 0.3], 0.05)] {
        let data = ArctanSum::new(&p).unwrap();
        for i in 0..=1000 {
            let x = -0.5 + i as f64 / 1000.0;
            let h = data.h(Complex::new(x, 0.0)).unwrap();
            assert!(h.im.abs() <= 1e-12, "v({x}, 0) = {}", h.im);
        }
    }
}

proptest! {
    #[test]
    fn conjugate_symmetry(x in -0.5f64..0.5, frac in -1.0f64..1.0, a in 0.02f64..0.45) {
        let p = params(&[-0.2, 0.2], a);
        let spec = build_domain(&p).unwrap();
        let w = spec.width_at(x).unwrap();
        let z = Complex::new(x, frac * w);
        let data = ArctanSum::new(&p).unwrap();
        let h = data.h(z).unwrap();
        let hc = data.h(z.conj()).unwrap();
        prop_assert!((hc - h.conj()).norm() <= 1e-12 * h.norm().max(1.0));
        let d = data.dz_h(z).unwrap();
        let dc = data.dz_h(z.conj()).unwrap();
        prop_assert!((dc - d.conj()).norm() <= 1e-12 * d.norm().max(1.0));
    }

    #[test]
    fn curvature_nonpositive_and_dual(x in -0.5f64..0.5, frac in -1.0f64..1.0) {
        let p = params(&[-0.1, 0.3], 0.08);
        let spec = build_domain(&p).unwrap();
        let w = spec.width_at(x).unwrap();
        let z = Complex::new(x, frac * w);
        let data = ArctanSum::new(&p).unwrap();
        let c = curvature_at(&data, z).unwrap();
        prop_assert!(c.k <= 0.0);
        prop_assert!((c.k - c.k_weierstrass).abs() <= 1e-12 * c.k.abs());
        let len: f64 = c.normal.iter().map(|t| t * t).sum::<f64>().sqrt();
        prop_assert!((len - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn continuation_battery_100_paths() {
    let quad = QuadratureConfig::default();
    for p in [params(&[0.0], 0.25), params(&[-0.2, 0.2], 0.1)] {
        let data = ArctanSum::new(&p).unwrap();
        let spec = build_domain(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            // Random staircase: along the axis, then up, then along a short
            // horizontal run at reduced height, then vertical to target.
            let x1: f64 = rng.random_range(-0.45..0.45);
            let x2: f64 = rng.random_range(-0.45..0.45);
            let wmin = spec
                .width_at(x1)
                .unwrap()
                .min(spec.width_at(x2).unwrap())
                .min(
                    (0..=20)
                        .map(|i| {
                            let t = i as f64 / 20.0;
                            spec.width_at(x1 * (1.0 - t) + x2 * t).unwrap()
                        })
                        .fold(f64::INFINITY, f64::min),
                );
            let y_mid = rng.random_range(-0.9..0.9) * wmin;
            let y_end = rng.random_range(-0.9..0.9) * spec.width_at(x2).unwrap();
            let path = [
                Complex::new(0.0, 0.0),
                Complex::new(x1, 0.0),
                Complex::new(x1, y_mid),
                Complex::new(x2, y_mid),
                Complex::new(x2, y_end),
            ];
            if !spec.contains_path(&path, 64) {
                continue;
            }
            let dev = continuation_check(&data, &path, &quad).unwrap();
            worst = worst.max(dev);
        }
        assert!(worst <= 1e-9, "worst deviation {worst:e}");
    }
}

#[test]
fn immersion_finite_difference_consistency() {
    // Central differences of F match the closed-form frame. Truncation is
    // |h'|^2 h^2 / 6 relative, so the 1e-6 budget at step 1e-4 needs
    // |h'| <= ~25; the a = 1/4 member satisfies that everywhere.
    let step = 1e-4;
    let quad = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = params(&[0.0], 0.25);
    let data = ArctanSum::new(&p).unwrap();
    let engine = Engine::new(&data, quad);
    for _ in 0..1000 {
        let z = random_interior(&mut rng, &p, 0.7);
        let s = engine.eval(z).unwrap();
        let fd = |dz: Complex| {
            let hi = engine.eval(z + dz).unwrap().f;
            let lo = engine.eval(z - dz).unwrap().f;
            [
                (hi[0] - lo[0]) / (2.0 * dz.norm()),
                (hi[1] - lo[1]) / (2.0 * dz.norm()),
                (hi[2] - lo[2]) / (2.0 * dz.norm()),
            ]
        };
        let fx = fd(Complex::new(step, 0.0));
        let fy = fd(Complex::new(0.0, step));
        let scale_x: f64 = s.fx.iter().map(|c| c * c).sum::<f64>().sqrt();
        let scale_y: f64 = s.fy.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in 0..3 {
            assert!(
                (fx[c] - s.fx[c]).abs() <= 1e-6 * scale_x.max(1.0),
                "dF/dx[{c}] at {z}: {} vs {}",
                fx[c],
                s.fx[c]
            );
            assert!(
                (fy[c] - s.fy[c]).abs() <= 1e-6 * scale_y.max(1.0),
                "dF/dy[{c}] at {z}: {} vs {}",
                fy[c],
                s.fy[c]
            );
        }
    }
}

#[test]
fn conformality_of_the_frame() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let p = params(&[-0.2, 0.2], 0.1);
    let data = ArctanSum::new(&p).unwrap();
    for _ in 0..500 {
        let z = random_interior(&mut rng, &p, 1.0);
        let s = data.sample(z).unwrap();
        let (fx, fy) = tangent_frame(&s);
        let chv2 = s.v.cosh().powi(2);
        let nx: f64 = fx.iter().map(|c| c * c).sum();
        let ny: f64 = fy.iter().map(|c| c * c).sum();
        let dot: f64 = (0..3).map(|i| fx[i] * fy[i]).sum();
        assert!((nx - chv2).abs() <= 1e-10 * chv2, "|Fx|^2 at {z}");
        assert!((ny - chv2).abs() <= 1e-10 * chv2, "|Fy|^2 at {z}");
        assert!(dot.abs() <= 1e-10 * chv2, "Fx.Fy at {z}");
    }
}

#[test]
fn path_independence_of_the_integral() {
    let quad = QuadratureConfig::default();
    let p = params(&[0.0], 0.25);
    let spec = build_domain(&p).unwrap();
    let data = ArctanSum::new(&p).unwrap();
    let engine = Engine::new(&data, quad).with_domain(&spec);
    // Interior width floor is w(0) = 0.0625, so |y| <= 0.05 staircases are
    // safe anywhere.
    for (x, y) in [(0.3, 0.04), (-0.42, -0.03), (0.11, 0.05)] {
        let z = Complex::new(x, y);
        let direct = engine.eval(z).unwrap();
        let detour = [
            Complex::new(0.0, 0.0),
            Complex::new(x / 2.0, 0.0),
            Complex::new(x / 2.0, y / 2.0),
            Complex::new(x, y / 2.0),
            Complex::new(x, y),
        ];
        let via = engine.eval_along(&detour).unwrap();
        for c in 0..3 {
            assert!(
                (direct.f[c] - via.f[c]).abs() <= 4.0 * quad.abs_tol,
                "component {c} at ({x}, {y}): {} vs {}",
                direct.f[c],
                via.f[c]
            );
        }
    }
}

#[test]
fn weierstrass_route_matches_closed_form_integration() {
    let quad = QuadratureConfig::default();
    let p = params(&[-0.2, 0.2], 0.1);
    let spec = build_domain(&p).unwrap();
    let data = ArctanSum::new(&p).unwrap();
    let engine = Engine::new(&data, quad).with_domain(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..25 {
        let z = random_interior(&mut rng, &p, 1.0);
        let a = engine.eval(z).unwrap().f;
        let b = engine.weierstrass_eval(z).unwrap();
        for c in 0..3 {
            assert!(
                (a[c] - b[c]).abs() <= 1e-8,
                "component {c} at {z}: {} vs {}",
                a[c],
                b[c]
            );
        }
    }
}

#[test]
fn helicoid_end_to_end_spot_grid() {
    let quad = QuadratureConfig::default();
    let engine = Engine::new(&Helicoid, quad);
    let zs: Vec<Complex> = (0..21)
        .flat_map(|i| {
            (0..21).map(move |j| {
                Complex::new(-1.0 + i as f64 / 10.0, -1.0 + j as f64 / 10.0)
            })
        })
        .collect();
    let batch = engine.eval_batch(&zs).unwrap();
    let mut worst = 0.0f64;
    for s in &batch {
        let oracle = helicoid_oracle(s.z);
        for c in 0..3 {
            worst = worst.max((s.f[c] - oracle[c]).abs());
        }
    }
    assert!(worst < 1e-8, "worst error {worst:e}");
}

/// Discrete angle-defect curvature against the analytic value, away from the
/// pinch (discretization-limited, hence the loose 5% tolerance).
#[test]
fn angle_defect_matches_analytic_curvature() {
    let p = params(&[0.0], 0.25);
    let spec = build_domain(&p).unwrap();
    let data = ArctanSum::new(&p).unwrap();
    let quad = QuadratureConfig::default();
    let engine = Engine::new(&data, quad).with_domain(&spec);

    // Fine local patch around (0.3, 0).
    let center = Complex::new(0.3, 0.0);
    let h = 2.5e-3;
    let n = 13usize;
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            pts.push(Complex::new(
                center.re + (i as f64 - (n as f64 - 1.0) / 2.0) * h,
                center.im + (j as f64 - (n as f64 - 1.0) / 2.0) * h,
            ));
        }
    }
    let grid = engine.eval_batch(&pts).unwrap();
    let pos = |i: usize, j: usize| grid[i * n + j].f;

    // Interior vertex angle defect over the 6-triangle fan of the
    // structured triangulation, normalized by a third of the fan area.
    let (ci, cj) = (n / 2, n / 2);
    let p0 = pos(ci, cj);
    let fan = [
        pos(ci + 1, cj),
        pos(ci + 1, cj + 1),
        pos(ci, cj + 1),
        pos(ci - 1, cj),
        pos(ci - 1, cj - 1),
        pos(ci, cj - 1),
    ];
    let mut angle_sum = 0.0;
    let mut area_sum = 0.0;
    for t in 0..6 {
        let (a, b) = (fan[t], fan[(t + 1) % 6]);
        let u = [a[0] - p0[0], a[1] - p0[1], a[2] - p0[2]];
        let v = [b[0] - p0[0], b[1] - p0[1], b[2] - p0[2]];
        let du: f64 = u.iter().map(|c| c * c).sum::<f64>().sqrt();
        let dv: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let dot: f64 = (0..3).map(|k| u[k] * v[k]).sum();
        let cross = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        let cross_norm: f64 = cross.iter().map(|c| c * c).sum::<f64>().sqrt();
        angle_sum += (dot / (du * dv)).clamp(-1.0, 1.0).acos();
        area_sum += 0.5 * cross_norm;
    }
    let discrete_k = (std::f64::consts::TAU - angle_sum) / (area_sum / 3.0);
    let analytic = curvature_at(&data, center).unwrap().k;
    assert!(
        (discrete_k - analytic).abs() <= 0.05 * analytic.abs(),
        "discrete {discrete_k} vs analytic {analytic}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn grid_samples_always_contained(
        nx in 2usize..40,
        half_ny in 1usize..12,
        a in 0.03f64..0.45,
        b in -0.4f64..0.4,
    ) {
        let p = params(&[b], a);
        let spec = build_domain(&p).unwrap();
        let grid = GridSpec::new(nx, 2 * half_ny + 1);
        let pts = sample_grid(&spec, &grid).unwrap();
        prop_assert_eq!(pts.len(), nx * (2 * half_ny + 1));
        for q in &pts {
            prop_assert!(spec.contains(q.z()));
        }
        // Center row is exactly the axis.
        prop_assert!(pts.iter().any(|q| q.y == 0.0));
    }
}

#[test]
fn helicoid_rim_separation_exceeds_one() {
    // |F(x, ±1) - F(x, 0)| = sinh(1) > 1 for every column of the helicoid.
    let quad = QuadratureConfig::default();
    let engine = Engine::new(&Helicoid, quad);
    for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        let f0 = engine.eval(Complex::new(x, 0.0)).unwrap().f;
        for y in [1.0, -1.0] {
            let f = engine.eval(Complex::new(x, y)).unwrap().f;
            let sep = ((f[0] - f0[0]).powi(2) + (f[1] - f0[1]).powi(2) + (f[2] - f0[2]).powi(2))
                .sqrt();
            assert!((sep - 1.0f64.sinh()).abs() < 1e-9);
            assert!(sep > 1.0);
        }
    }
}

#[test]
fn helicoid_mesh_is_embedded() {
    use weierstrass::intersect::self_intersections;
    use weierstrass::mesh::build_helicoid_mesh;
    let mesh = build_helicoid_mesh(
        (-1.0, 1.0),
        (-1.0, 1.0),
        &GridSpec::new(48, 25),
        &QuadratureConfig::default(),
    )
    .unwrap();
    let rep = self_intersections(&mesh).unwrap();
    assert!(rep.is_embedded(), "pairs: {:?}", rep.pairs);
}

#[test]
fn half_gap_domain_breaks_nearest_point_property() {
    // The alternate split rule exists for comparison: with marked heights
    // [-0.2, 0.2] it puts the split at +0.2, so abscissas left of it can be
    // nearer to the second height than to the first.
    use weierstrass::domain::{build_domain_with, SplitRule};
    let p = params(&[-0.2, 0.2], 0.1);
    let spec = build_domain_with(&p, SplitRule::HalfGap).unwrap();
    assert_eq!(spec.splits, vec![-0.5, 0.2, 0.5]);
    let x = 0.1; // in piece 0 under half-gap, but nearest to b_2 = 0.2
    let (lo, hi) = spec.piece_range(0);
    assert!(lo <= x && x <= hi);
    assert!((x - 0.2f64).abs() < (x - (-0.2f64)).abs());
}
