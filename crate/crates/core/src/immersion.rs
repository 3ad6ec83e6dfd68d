//! Evaluation of the minimal immersion by path integration.
//!
//! Writing `h = u + iv`, the immersion has the closed-form differential
//!
//! ```text
//! dF/dx = (sinh v cos u,  sinh v sin u, 1)
//! dF/dy = (cosh v sin u, -cosh v cos u, 0)
//! ```
//!
//! Integrating the real one-forms instead of the raw Weierstrass integrand
//! sidesteps complex logarithms entirely and makes two facts exact by
//! construction: `F(x, 0) = (0, 0, x)` on the axis (where `v = 0` kills the
//! first two components of `dF/dx`), and the third coordinate equals `x`
//! everywhere. Every evaluation walks the staircase `(0,0) -> (x,0) -> (x,y)`;
//! only the vertical leg needs quadrature, where the first two components
//! combine into the single complex integrand `-i cosh(v) e^(iu)`.
//!
//! The raw Weierstrass integral (with Gauss map `e^(ih)` and height
//! differential `dz`) is retained in [`Engine::weierstrass_eval`] as an
//! independent cross-check route.

use std::cell::Cell;
use std::collections::HashMap;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::holo::{HoloData, HoloSample};
use crate::quad::{integrate, QuadratureConfig};
use crate::util::map_slice;
use crate::Complex;

/// The immersion value and tangent frame at one domain point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmersionSample {
    pub z: Complex,
    /// Position in R^3.
    pub f: [f64; 3],
    /// Tangent vector dF/dx (closed form).
    pub fx: [f64; 3],
    /// Tangent vector dF/dy (closed form).
    pub fy: [f64; 3],
    /// Accumulated quadrature error bound for `f`.
    pub quad_error: f64,
}

/// Closed-form tangent vectors from the holomorphic sample.
pub fn tangent_frame(s: &HoloSample) -> ([f64; 3], [f64; 3]) {
    let (su, cu) = s.u.sin_cos();
    let (shv, chv) = (s.v.sinh(), s.v.cosh());
    let fx = [shv * cu, shv * su, 1.0];
    let fy = [chv * su, -chv * cu, 0.0];
    (fx, fy)
}

/// Closed-form helicoid immersion `(sinh y sin x, -sinh y cos x, x)`,
/// the exact integral of the differential above for `h(z) = z`.
pub fn helicoid_oracle(z: Complex) -> [f64; 3] {
    let (x, y) = (z.re, z.im);
    [y.sinh() * x.sin(), -y.sinh() * x.cos(), x]
}

/// Immersion evaluator over pluggable holomorphic data.
///
/// An attached [`DomainSpec`] makes every entry point reject points outside
/// the domain; without one (helicoid mode) all of `C` is accepted.
#[derive(Debug, Clone)]
pub struct Engine<'a, H: HoloData> {
    data: &'a H,
    domain: Option<&'a DomainSpec>,
    quad: QuadratureConfig,
    axis_fault: f64,
}

impl<'a, H: HoloData> Engine<'a, H> {
    pub fn new(data: &'a H, quad: QuadratureConfig) -> Self {
        Self {
            data,
            domain: None,
            quad,
            axis_fault: 0.0,
        }
    }

    pub fn with_domain(mut self, spec: &'a DomainSpec) -> Self {
        self.domain = Some(spec);
        self
    }

    /// Corrupt the third component by `eps * y`. Negative-control hook for
    /// the verification suite; leave at 0 for real runs.
    pub fn with_axis_fault(mut self, eps: f64) -> Self {
        self.axis_fault = eps;
        self
    }

    pub fn data(&self) -> &H {
        self.data
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    fn check_domain(&self, z: Complex) -> Result<()> {
        if let Some(spec) = self.domain {
            if !spec.contains(z) {
                return Err(Error::OutsideDomain { x: z.re, y: z.im });
            }
        }
        Ok(())
    }

    /// Vertical-leg integrand `-i cosh(v(x, t)) exp(i u(x, t))` at fixed x.
    fn leg_integral(&self, x: f64, y0: f64, y1: f64, tol: f64) -> Result<(Complex, f64)> {
        let holo_err: Cell<Option<Error>> = Cell::new(None);
        let cfg = QuadratureConfig {
            abs_tol: tol,
            ..self.quad
        };
        let res = integrate(
            |t| match self.data.h(Complex::new(x, t)) {
                Ok(h) => {
                    let phase = Complex::new(0.0, h.re).exp();
                    Complex::new(0.0, -h.im.cosh()) * phase
                }
                Err(e) => {
                    holo_err.set(Some(e));
                    Complex::new(0.0, 0.0)
                }
            },
            y0,
            y1,
            &cfg,
        );
        if let Some(e) = holo_err.take() {
            return Err(e);
        }
        let r = res?;
        Ok((r.value, r.error))
    }

    fn finish(&self, z: Complex, planar: Complex, quad_error: f64) -> Result<ImmersionSample> {
        let s = self.data.sample(z)?;
        let (fx, fy) = tangent_frame(&s);
        let mut f = [planar.re, planar.im, z.re];
        if self.axis_fault != 0.0 {
            f[2] += self.axis_fault * z.im;
        }
        Ok(ImmersionSample {
            z,
            f,
            fx,
            fy,
            quad_error,
        })
    }

    /// Evaluate `F` at one point along the staircase path.
    pub fn eval(&self, z: Complex) -> Result<ImmersionSample> {
        self.check_domain(z)?;
        let (planar, err) = if z.im == 0.0 {
            (Complex::new(0.0, 0.0), 0.0)
        } else {
            self.leg_integral(z.re, 0.0, z.im, self.quad.abs_tol)?
        };
        self.finish(z, planar, err)
    }

    /// Evaluate a batch, sharing the axis anchor of every column.
    ///
    /// Points with equal `x` are accumulated outward from `y = 0`, each
    /// segment getting an equal share of the tolerance budget, so every
    /// returned value stays within `abs_tol` of the exact integral (hence
    /// within `2 abs_tol` of an independent [`Engine::eval`]). Column order
    /// does not influence results, so the parallel and sequential builds
    /// agree bit for bit.
    pub fn eval_batch(&self, zs: &[Complex]) -> Result<Vec<ImmersionSample>> {
        for &z in zs {
            self.check_domain(z)?;
        }
        let mut columns: HashMap<u64, Vec<(usize, f64)>> = HashMap::new();
        for (i, z) in zs.iter().enumerate() {
            columns.entry(z.re.to_bits()).or_default().push((i, z.im));
        }
        let columns: Vec<(f64, Vec<(usize, f64)>)> = columns
            .into_iter()
            .map(|(bits, entries)| (f64::from_bits(bits), entries))
            .collect();

        let per_column = map_slice(&columns, |(x, entries)| self.eval_column(*x, entries));

        let mut out = vec![None; zs.len()];
        for col in per_column {
            for (idx, sample) in col? {
                out[idx] = Some(sample);
            }
        }
        Ok(out.into_iter().map(|s| s.unwrap()).collect())
    }

    /// Accumulate one column. `entries` are (original index, y) pairs.
    fn eval_column(&self, x: f64, entries: &[(usize, f64)]) -> Result<Vec<(usize, ImmersionSample)>> {
        let mut ys: Vec<f64> = entries.iter().map(|&(_, y)| y).collect();
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ys.dedup();

        // Unique heights above and below the axis, ordered outward from 0.
        let pos: Vec<f64> = ys.iter().copied().filter(|&y| y > 0.0).collect();
        let neg: Vec<f64> = ys.iter().rev().copied().filter(|&y| y < 0.0).collect();

        let mut reached: HashMap<u64, (Complex, f64)> = HashMap::new();
        reached.insert(0.0f64.to_bits(), (Complex::new(0.0, 0.0), 0.0));

        for run in [&pos, &neg] {
            let nseg = run.len().max(1);
            let tol = self.quad.abs_tol / nseg as f64;
            let mut anchor_y = 0.0;
            let mut acc = Complex::new(0.0, 0.0);
            let mut err = 0.0;
            for &y in run.iter() {
                let (v, e) = self.leg_integral(x, anchor_y, y, tol)?;
                acc += v;
                err += e;
                anchor_y = y;
                reached.insert(y.to_bits(), (acc, err));
            }
        }

        entries
            .iter()
            .map(|&(idx, y)| {
                let (planar, err) = reached[&y.to_bits()];
                Ok((idx, self.finish(Complex::new(x, y), planar, err)?))
            })
            .collect()
    }

    /// Integrate `dF` along an arbitrary polyline from the base point.
    ///
    /// Used to confirm path independence: any in-domain staircase to `z`
    /// must agree with [`Engine::eval`] up to the quadrature budget.
    pub fn eval_along(&self, path: &[Complex]) -> Result<ImmersionSample> {
        if path.is_empty() || path[0] != Complex::new(0.0, 0.0) {
            return Err(Error::PathOutsideDomain { segment: 0 });
        }
        if let Some(spec) = self.domain {
            if !spec.contains_path(path, 64) {
                return Err(Error::PathOutsideDomain { segment: 0 });
            }
        }
        let nseg = (path.len() - 1).max(1);
        let tol = self.quad.abs_tol / nseg as f64;
        let mut f = [0.0f64; 3];
        let mut err = 0.0;
        for (seg, pair) in path.windows(2).enumerate() {
            let (z0, dz) = (pair[0], pair[1] - pair[0]);
            let holo_err: Cell<Option<Error>> = Cell::new(None);
            let cfg = QuadratureConfig {
                abs_tol: tol,
                ..self.quad
            };
            let r = integrate(
                |t| match self.data.sample(z0 + dz * t) {
                    Ok(s) => {
                        let (fx, fy) = tangent_frame(&s);
                        [
                            fx[0] * dz.re + fy[0] * dz.im,
                            fx[1] * dz.re + fy[1] * dz.im,
                            fx[2] * dz.re + fy[2] * dz.im,
                        ]
                    }
                    Err(e) => {
                        holo_err.set(Some(e));
                        [0.0; 3]
                    }
                },
                0.0,
                1.0,
                &cfg,
            );
            if holo_err.take().is_some() {
                return Err(Error::PathOutsideDomain { segment: seg });
            }
            let r = r?;
            for c in 0..3 {
                f[c] += r.value[c];
            }
            err += r.error;
        }
        let z = *path.last().unwrap();
        let s = self.data.sample(z)?;
        let (fx, fy) = tangent_frame(&s);
        if self.axis_fault != 0.0 {
            f[2] += self.axis_fault * z.im;
        }
        Ok(ImmersionSample {
            z,
            f,
            fx,
            fy,
            quad_error: err,
        })
    }

    /// Independent route: the raw Weierstrass integral
    /// `F = Re int ( (g^-1 - g)/2, i (g^-1 + g)/2, 1 ) dz` with
    /// `g = exp(ih)`, i.e. integrand `(-i sin h, i cos h, 1)`, taken along
    /// the same staircase. Exercises the full complex integrand including
    /// the horizontal leg.
    pub fn weierstrass_eval(&self, z: Complex) -> Result<[f64; 3]> {
        self.check_domain(z)?;
        let legs = [
            (Complex::new(0.0, 0.0), Complex::new(z.re, 0.0)),
            (Complex::new(z.re, 0.0), z),
        ];
        let mut w = [Complex::new(0.0, 0.0); 3];
        for (z0, z1) in legs {
            if z0 == z1 {
                continue;
            }
            let dz = z1 - z0;
            let integrands: [(usize, fn(Complex) -> Complex); 2] = [
                (0, |h| -Complex::i() * h.sin()),
                (1, |h| Complex::i() * h.cos()),
            ];
            for (comp, f) in integrands {
                let holo_err: Cell<Option<Error>> = Cell::new(None);
                let r = integrate(
                    |t| match self.data.h(z0 + dz * t) {
                        Ok(h) => f(h) * dz,
                        Err(e) => {
                            holo_err.set(Some(e));
                            Complex::new(0.0, 0.0)
                        }
                    },
                    0.0,
                    1.0,
                    &self.quad,
                )?;
                if let Some(e) = holo_err.take() {
                    return Err(e);
                }
                w[comp] += r.value;
            }
            w[2] += dz;
        }
        Ok([w[0].re, w[1].re, w[2].re])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_domain;
    use crate::holo::{ArctanSum, Helicoid};
    use crate::params::ConstructionParams;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn axis_maps_to_axis() {
        let params = ConstructionParams::new(vec![-0.2, 0.2], 0.1).unwrap();
        let data = ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad());
        for t in [-0.5, -0.21, 0.0, 0.13, 0.5] {
            let s = engine.eval(Complex::new(t, 0.0)).unwrap();
            assert_eq!(s.f, [0.0, 0.0, t]);
            assert_eq!(s.quad_error, 0.0);
        }
    }

    #[test]
    fn helicoid_closed_form() {
        let engine = Engine::new(&Helicoid, quad());
        let z = Complex::new(std::f64::consts::FRAC_PI_2, 1.0);
        let s = engine.eval(z).unwrap();
        let expect = [1.0f64.sinh(), 0.0, std::f64::consts::FRAC_PI_2];
        for c in 0..3 {
            assert!(
                (s.f[c] - expect[c]).abs() < 1e-9,
                "component {c}: {} vs {}",
                s.f[c],
                expect[c]
            );
        }
        assert!((s.f[0] - 1.175_201_193_643_801_4).abs() < 1e-6);
        let oracle = helicoid_oracle(z);
        for c in 0..3 {
            assert!((s.f[c] - oracle[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn helicoid_oracle_basics() {
        assert_eq!(helicoid_oracle(Complex::new(0.0, 0.0)), [0.0, 0.0, 0.0]);
        assert_eq!(helicoid_oracle(Complex::new(0.8, 0.0)), [0.0, 0.0, 0.8]);
    }

    #[test]
    fn pinch_column_evaluates_finitely() {
        let params = ConstructionParams::new(vec![0.0], 0.25).unwrap();
        let spec = build_domain(&params).unwrap();
        let data = ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad()).with_domain(&spec);
        let w = spec.half_width(0, 0.0);
        let s = engine.eval(Complex::new(0.0, w)).unwrap();
        assert!(s.f.iter().all(|c| c.is_finite()));
        assert!(s.quad_error < 1e-9);
        // Cross-check against the raw Weierstrass route.
        let w3 = engine.weierstrass_eval(Complex::new(0.0, w)).unwrap();
        for c in 0..3 {
            assert!(
                (s.f[c] - w3[c]).abs() < 1e-8,
                "component {c}: {} vs {}",
                s.f[c],
                w3[c]
            );
        }
    }

    #[test]
    fn domain_guard_rejects_outside() {
        let params = ConstructionParams::new(vec![0.0], 0.25).unwrap();
        let spec = build_domain(&params).unwrap();
        let data = ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad()).with_domain(&spec);
        assert!(matches!(
            engine.eval(Complex::new(0.0, 0.07)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn batch_of_one_matches_eval() {
        let engine = Engine::new(&Helicoid, quad());
        let z = Complex::new(0.4, 0.3);
        let single = engine.eval(z).unwrap();
        let batch = engine.eval_batch(&[z]).unwrap();
        assert_eq!(batch.len(), 1);
        assert_eq!(batch[0].f, single.f);
    }

    #[test]
    fn batch_matches_independent_eval_within_budget() {
        let params = ConstructionParams::new(vec![0.0], 0.1).unwrap();
        let spec = build_domain(&params).unwrap();
        let data = ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad()).with_domain(&spec);
        let x = 0.17;
        let w = spec.half_width(0, x);
        let zs: Vec<Complex> = (-5..=5)
            .map(|i| Complex::new(x, w * i as f64 / 5.0))
            .collect();
        let batch = engine.eval_batch(&zs).unwrap();
        for (z, b) in zs.iter().zip(&batch) {
            let single = engine.eval(*z).unwrap();
            for c in 0..3 {
                assert!(
                    (b.f[c] - single.f[c]).abs() <= 2.0 * engine.quad.abs_tol,
                    "at {z} component {c}"
                );
            }
        }
    }

    #[test]
    fn batch_partial_sums_consistent() {
        let params = ConstructionParams::new(vec![0.0], 0.1).unwrap();
        let spec = build_domain(&params).unwrap();
        let data = ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad()).with_domain(&spec);
        let x = -0.23;
        let w = spec.half_width(0, x);
        let ys = [0.2 * w, 0.5 * w, 0.9 * w];
        let zs: Vec<Complex> = ys.iter().map(|&y| Complex::new(x, y)).collect();
        let batch = engine.eval_batch(&zs).unwrap();
        for i in 0..ys.len() - 1 {
            let seg = integrate(
                |t| {
                    let h = data.h(Complex::new(x, t)).unwrap();
                    Complex::new(0.0, -h.im.cosh()) * Complex::new(0.0, h.re).exp()
                },
                ys[i],
                ys[i + 1],
                &quad(),
            )
            .unwrap();
            let got = Complex::new(
                batch[i + 1].f[0] - batch[i].f[0],
                batch[i + 1].f[1] - batch[i].f[1],
            );
            assert!(
                (got - seg.value).norm() <= 2.0 * engine.quad.abs_tol,
                "segment {i}: {got} vs {}",
                seg.value
            );
        }
    }

    #[test]
    fn symmetric_pair_shares_height() {
        let params = ConstructionParams::new(vec![0.0], 0.2).unwrap();
        let data = ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad());
        let zs = [Complex::new(0.3, 0.02), Complex::new(0.3, -0.02)];
        let batch = engine.eval_batch(&zs).unwrap();
        assert_eq!(batch[0].f[2], 0.3);
        assert_eq!(batch[1].f[2], 0.3);
    }

    #[test]
    fn axis_fault_breaks_height() {
        let engine = Engine::new(&Helicoid, quad()).with_axis_fault(1e-3);
        let s = engine.eval(Complex::new(0.5, 0.4)).unwrap();
        assert!((s.f[2] - 0.5).abs() > 1e-4);
    }
}
