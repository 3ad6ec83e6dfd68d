//! Branch-consistent evaluation of the holomorphic data.
//!
//! The Gauss map of every surface in the family is `g = exp(i h(z))` with
//!
//! ```text
//! h(z) = sum_{j=1..n}  arctan((z - b_j)/a) / (2^(j-1) a),
//! h'(z) = sum_{j=1..n}  2^(1-j) / ((z - b_j)^2 + a^2).
//! ```
//!
//! Each term uses the principal complex arctan. Its branch cut for the j-th
//! term sits on the vertical ray `x = b_j, |y| >= a`, while the domain at
//! `x = b_j` only reaches `|y| <= a^(3/2)/2 < a`, so the principal branch is
//! analytic on the whole domain and coincides with the analytic continuation
//! from the base point `z = 0`. [`continuation_check`] validates that choice
//! against direct integration of `h'`.
//!
//! The weights `2^(1-j)` span orders of magnitude for larger `n`, so both
//! sums accumulate with compensated summation.

use crate::error::{Error, Result};
use crate::params::ConstructionParams;
use crate::quad::{integrate, QuadratureConfig};
use crate::util::KahanComplex;
use crate::Complex;

/// Distance to `b_j ± ia` below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-12;

/// Value of the holomorphic data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoloSample {
    /// Domain point `x + iy`.
    pub z: Complex,
    /// `h(z)`.
    pub h: Complex,
    /// Real part `u = Re h`.
    pub u: f64,
    /// Imaginary part `v = Im h`.
    pub v: f64,
    /// Derivative `h'(z)`.
    pub dzh: Complex,
}

/// The pluggable holomorphic data driving the immersion.
///
/// The family's arctan sum is [`ArctanSum`]; the classical helicoid
/// (`h(z) = z`) is [`Helicoid`] and serves as the end-to-end quadrature
/// oracle.
pub trait HoloData: Sync {
    fn h(&self, z: Complex) -> Result<Complex>;
    fn dz_h(&self, z: Complex) -> Result<Complex>;

    fn sample(&self, z: Complex) -> Result<HoloSample> {
        let h = self.h(z)?;
        Ok(HoloSample {
            z,
            h,
            u: h.re,
            v: h.im,
            dzh: self.dz_h(z)?,
        })
    }
}

/// Weighted arctan sum pinned at the prescribed heights.
#[derive(Debug, Clone)]
pub struct ArctanSum {
    points: Vec<f64>,
    a: f64,
    /// Coefficients `1 / (2^(j-1) a)` of each arctan term.
    coeffs: Vec<f64>,
    /// Weights `2^(1-j)` of each derivative term.
    weights: Vec<f64>,
}

impl ArctanSum {
    pub fn new(params: &ConstructionParams) -> Result<Self> {
        params.validate()?;
        let coeffs = (0..params.n())
            .map(|j| params.weight(j) / params.a)
            .collect();
        let weights = (0..params.n()).map(|j| params.weight(j)).collect();
        Ok(Self {
            points: params.points.clone(),
            a: params.a,
            coeffs,
            weights,
        })
    }

    fn guard_poles(&self, z: Complex) -> Result<()> {
        for &b in &self.points {
            for sign in [1.0, -1.0] {
                let pole = Complex::new(b, sign * self.a);
                let dist = (z - pole).norm();
                if dist <= POLE_GUARD {
                    return Err(Error::NearPole {
                        re: pole.re,
                        im: pole.im,
                        dist,
                    });
                }
            }
        }
        Ok(())
    }
}

impl HoloData for ArctanSum {
    fn h(&self, z: Complex) -> Result<Complex> {
        self.guard_poles(z)?;
        let mut acc = KahanComplex::default();
        for (&b, &c) in self.points.iter().zip(&self.coeffs) {
            let w = (z - b) / self.a;
            acc.add(w.atan() * c);
        }
        Ok(acc.value())
    }

    fn dz_h(&self, z: Complex) -> Result<Complex> {
        self.guard_poles(z)?;
        let a2 = self.a * self.a;
        let mut acc = KahanComplex::default();
        for (&b, &w) in self.points.iter().zip(&self.weights) {
            let d = z - b;
            acc.add(w / (d * d + a2));
        }
        Ok(acc.value())
    }
}

/// `h'` through its expanded real/imaginary form.
///
/// Algebraically identical to [`HoloData::dz_h`]; kept as an independent
/// route for cross-checks:
///
/// ```text
/// 2^(1-j) [ (x-b)^2 + a^2 - y^2 - 2i (x-b) y ]
///   / ( [(x-b)^2 + a^2 - y^2]^2 + 4 (x-b)^2 y^2 )
/// ```
pub fn dz_h_expanded(data: &ArctanSum, z: Complex) -> Result<Complex> {
    data.guard_poles(z)?;
    let (x, y) = (z.re, z.im);
    let a2 = data.a * data.a;
    let mut acc = KahanComplex::default();
    for (&b, &w) in data.points.iter().zip(&data.weights) {
        let dx = x - b;
        let p = dx * dx + a2 - y * y;
        let q = 2.0 * dx * y;
        let denom = p * p + q * q;
        acc.add(Complex::new(w * p / denom, -w * q / denom));
    }
    Ok(acc.value())
}

/// Classical helicoid data `h(z) = z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Helicoid;

impl HoloData for Helicoid {
    fn h(&self, z: Complex) -> Result<Complex> {
        Ok(z)
    }

    fn dz_h(&self, _z: Complex) -> Result<Complex> {
        Ok(Complex::new(1.0, 0.0))
    }
}

/// Evaluate `h` with full sample metadata.
pub fn eval_h(params: &ConstructionParams, z: Complex) -> Result<HoloSample> {
    ArctanSum::new(params)?.sample(z)
}

/// Evaluate `h'` alone.
pub fn eval_dz_h(params: &ConstructionParams, z: Complex) -> Result<Complex> {
    ArctanSum::new(params)?.dz_h(z)
}

/// Consistency of the closed form against analytic continuation.
///
/// Integrates `h'` along the polyline (which must start at the base point 0)
/// with adaptive quadrature and returns the largest deviation
/// `|h(vertex) - (h(0) + int h' dz)|` over the vertices. For an analytic
/// branch this is bounded by quadrature error.
pub fn continuation_check(
    data: &ArctanSum,
    path: &[Complex],
    quad: &QuadratureConfig,
) -> Result<f64> {
    if path.is_empty() {
        return Ok(0.0);
    }
    if path[0].norm() != 0.0 {
        return Err(Error::PathOutsideDomain { segment: 0 });
    }
    let h0 = data.h(path[0])?;
    let mut acc = h0;
    let mut worst = 0.0f64;
    for (seg, pair) in path.windows(2).enumerate() {
        let (z0, z1) = (pair[0], pair[1]);
        let dz = z1 - z0;
        let pole_hit = std::cell::Cell::new(false);
        let contrib = integrate(
            |t| match data.dz_h(z0 + dz * t) {
                Ok(d) => d * dz,
                Err(_) => {
                    pole_hit.set(true);
                    Complex::new(0.0, 0.0)
                }
            },
            0.0,
            1.0,
            quad,
        );
        if pole_hit.get() {
            return Err(Error::PathOutsideDomain { segment: seg });
        }
        acc += contrib?.value;
        let direct = data.h(z1)?;
        worst = worst.max((direct - acc).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(points: &[f64], a: f64) -> ConstructionParams {
        ConstructionParams::new(points.to_vec(), a).unwrap()
    }

    #[test]
    fn h_at_base_point_is_zero() {
        let s = eval_h(&params(&[0.0], 0.5), Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(s.h, Complex::new(0.0, 0.0));
    }

    #[test]
    fn h_on_real_axis_single_point() {
        // 2 * atan(1) = pi/2 at x = 1/2 with b = 0, a = 1/2.
        let s = eval_h(&params(&[0.0], 0.5), Complex::new(0.5, 0.0)).unwrap();
        assert!((s.u - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(s.v, 0.0);
    }

    #[test]
    fn h_two_points_at_origin() {
        // 10 atan(2) + 5 atan(-2) = 5 atan(2).
        let s = eval_h(&params(&[-0.2, 0.2], 0.1), Complex::new(0.0, 0.0)).unwrap();
        let expect = 5.0 * 2.0f64.atan();
        assert!((s.h.re - expect).abs() < 1e-12, "got {}", s.h.re);
        assert_eq!(s.h.im, 0.0);
    }

    #[test]
    fn dz_h_single_point_origin() {
        let d = eval_dz_h(&params(&[0.0], 0.1), Complex::new(0.0, 0.0)).unwrap();
        assert!((d.re - 100.0).abs() < 1e-10);
        assert_eq!(d.im, 0.0);
    }

    #[test]
    fn dz_h_two_points_at_left_height() {
        let d = eval_dz_h(&params(&[-0.2, 0.2], 0.1), Complex::new(-0.2, 0.0)).unwrap();
        let expect = 100.0 + 0.5 / (0.16 + 0.01);
        assert!((d.re - expect).abs() < 1e-9, "got {}", d.re);
    }

    #[test]
    fn dz_h_matches_central_difference_of_h() {
        let data = ArctanSum::new(&params(&[0.0], 0.5)).unwrap();
        let eps = 1e-5;
        for z in [
            Complex::new(0.3, 0.05),
            Complex::new(-0.4, -0.1),
            Complex::new(0.0, 0.2),
        ] {
            let d = data.dz_h(z).unwrap();
            let fd_x = (data.h(z + eps).unwrap() - data.h(z - eps).unwrap()) / (2.0 * eps);
            let fd_y = (data.h(z + Complex::new(0.0, eps)).unwrap()
                - data.h(z - Complex::new(0.0, eps)).unwrap())
                / Complex::new(0.0, 2.0 * eps);
            assert!((fd_x - d).norm() / d.norm() < 1e-8, "x-step at {z}");
            assert!((fd_y - d).norm() / d.norm() < 1e-8, "y-step at {z}");
        }
    }

    #[test]
    fn expanded_form_matches_complex_form() {
        let data = ArctanSum::new(&params(&[-0.2, 0.2], 0.1)).unwrap();
        for z in [
            Complex::new(0.11, 0.02),
            Complex::new(-0.37, -0.04),
            Complex::new(0.2, 0.01),
        ] {
            let a = data.dz_h(z).unwrap();
            let b = dz_h_expanded(&data, z).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm(), "at {z}: {a} vs {b}");
        }
    }

    #[test]
    fn pole_guard_rejects() {
        let data = ArctanSum::new(&params(&[0.0], 0.1)).unwrap();
        let err = data.h(Complex::new(0.0, 0.1)).unwrap_err();
        assert!(matches!(err, Error::NearPole { .. }));
        let err = data.dz_h(Complex::new(0.0, -0.1 + 1e-13)).unwrap_err();
        assert!(matches!(err, Error::NearPole { .. }));
    }

    #[test]
    fn continuation_constant_path_is_exact() {
        let data = ArctanSum::new(&params(&[0.0], 0.5)).unwrap();
        let path = [Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)];
        let dev = continuation_check(&data, &path, &QuadratureConfig::default()).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn continuation_real_axis() {
        let data = ArctanSum::new(&params(&[0.0], 0.5)).unwrap();
        let path = [Complex::new(0.0, 0.0), Complex::new(0.5, 0.0)];
        let dev = continuation_check(&data, &path, &QuadratureConfig::default()).unwrap();
        assert!(dev < 1e-9, "dev = {dev:e}");
    }

    #[test]
    fn continuation_l_shaped_path() {
        let data = ArctanSum::new(&params(&[-0.2, 0.2], 0.1)).unwrap();
        let path = [
            Complex::new(0.0, 0.0),
            Complex::new(0.1, 0.0),
            Complex::new(0.1, 0.01),
        ];
        let dev = continuation_check(&data, &path, &QuadratureConfig::default()).unwrap();
        assert!(dev < 1e-9, "dev = {dev:e}");
    }

    #[test]
    fn continuation_requires_base_point() {
        let data = ArctanSum::new(&params(&[0.0], 0.5)).unwrap();
        let path = [Complex::new(0.1, 0.0), Complex::new(0.2, 0.0)];
        assert!(matches!(
            continuation_check(&data, &path, &QuadratureConfig::default()),
            Err(Error::PathOutsideDomain { segment: 0 })
        ));
    }
}
