//! Pointwise differential geometry and curvature sweeps.
//!
//! For Gauss map `g = exp(ih)` and height differential `dz` the Gauss
//! curvature collapses to
//!
//! ```text
//! K = -|h'|^2 / cosh^4(v),        v = Im h,
//! ```
//!
//! which is what [`curvature_at`] reports. The same quantity is recomputed
//! through the general Weierstrass formula
//!
//! ```text
//! K = -[ 4 |g'| |g| / (|phi| (1 + |g|^2)^2) ]^2,
//! ```
//!
//! expanded with `|g| = e^(-v)` and `|g'| = |g| |h'|`; the two routes share
//! their inputs but exercise different floating-point algebra (`cosh`
//! against `exp`), so their agreement to near machine precision is a strong
//! coding check. Minimality links the second fundamental form to the
//! curvature by `|A|^2 = -2K`.
//!
//! [`blowup_sweep`] tabulates `|K_a|` at the marked heights (where it must
//! dominate `(2^(1-j)/a^2)^2` and hence blow up like `a^-4`) and its
//! supremum away from them (which stays bounded as `a` shrinks).

use serde::Serialize;

use crate::domain::{build_domain, sample_grid, GridSpec};
use crate::error::Result;
use crate::holo::{ArctanSum, HoloData};
use crate::params::ConstructionParams;
use crate::util::map_slice;
use crate::Complex;

/// Curvature data at one domain point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub z: Complex,
    /// Gauss curvature, always <= 0.
    pub k: f64,
    /// Same quantity through the general Weierstrass formula.
    pub k_weierstrass: f64,
    /// Unit normal in R^3.
    pub normal: [f64; 3],
    /// Conformal factor cosh^2(v).
    pub conf: f64,
}

/// Gauss curvature, unit normal and conformal factor at `z`.
pub fn curvature_at<H: HoloData>(data: &H, z: Complex) -> Result<CurvatureSample> {
    let s = data.sample(z)?;
    let dzh_norm_sq = s.dzh.norm_sqr();
    let chv = s.v.cosh();
    let k = -dzh_norm_sq / (chv * chv * chv * chv);

    // Independent algebra: |g| = e^-v, |g'| = |g| |h'|, |phi| = 1.
    let g_abs = (-s.v).exp();
    let g_abs_sq = g_abs * g_abs;
    let denom = (1.0 + g_abs_sq) * (1.0 + g_abs_sq);
    let bracket = 4.0 * g_abs_sq * dzh_norm_sq.sqrt() / denom;
    let k_weierstrass = -(bracket * bracket);

    // n = (2 Re g, 2 Im g, |g|^2 - 1) / (|g|^2 + 1) with g = e^(-v) e^(iu).
    let (su, cu) = s.u.sin_cos();
    let scale = 1.0 / (g_abs_sq + 1.0);
    let normal = [
        2.0 * g_abs * cu * scale,
        2.0 * g_abs * su * scale,
        (g_abs_sq - 1.0) * scale,
    ];

    Ok(CurvatureSample {
        z,
        k,
        k_weierstrass,
        normal,
        conf: chv * chv,
    })
}

/// Convenience wrapper building the arctan data from parameters.
pub fn gauss_curvature(params: &ConstructionParams, z: Complex) -> Result<CurvatureSample> {
    curvature_at(&ArctanSum::new(params)?, z)
}

/// Squared norm of the second fundamental form, `|A|^2 = -2K`.
pub fn second_ff_norm<H: HoloData>(data: &H, z: Complex) -> Result<f64> {
    Ok(-2.0 * curvature_at(data, z)?.k)
}

/// One sweep entry: curvature magnitudes at a fixed pinch value.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub a: f64,
    /// `|K_a(b_j)|` per marked height.
    pub k_at_points: Vec<f64>,
    /// Supremum of `|K_a|` over the region at least `delta` away in `x`
    /// from every marked height.
    pub sup_off_axis: f64,
    /// Columns used by the converged off-axis estimate.
    pub off_axis_nx: usize,
}

/// Blowup/boundedness data across a decreasing list of pinch values.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupSweep {
    pub points: Vec<f64>,
    pub delta: f64,
    pub entries: Vec<SweepEntry>,
}

impl BlowupSweep {
    /// Every `|K_a(b_j)|` must dominate the single-term lower bound
    /// `(2^(1-j)/a^2)^2`: on the axis all derivative terms are positive.
    /// Returns the worst ratio `measured / bound` (>= 1 when satisfied).
    pub fn lower_bound_margin(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for e in &self.entries {
            for (j, &k) in e.k_at_points.iter().enumerate() {
                let lead = 0.5f64.powi(j as i32) / (e.a * e.a);
                worst = worst.min(k / (lead * lead));
            }
        }
        worst
    }

    /// Ratio of the off-axis suprema of the two smallest pinch values;
    /// the bounded-curvature claim shows as stabilization (ratio near 1).
    pub fn off_axis_stabilization(&self) -> Option<f64> {
        let n = self.entries.len();
        if n < 2 {
            return None;
        }
        let (prev, last) = (&self.entries[n - 2], &self.entries[n - 1]);
        let ratio = last.sup_off_axis / prev.sup_off_axis;
        Some(ratio.max(1.0 / ratio))
    }

    /// Least-squares slope of `log |K_a(b_j)|` against `log (1/a)`.
    pub fn blowup_slope(&self, j: usize) -> f64 {
        let xs: Vec<f64> = self.entries.iter().map(|e| (1.0 / e.a).ln()).collect();
        let ys: Vec<f64> = self.entries.iter().map(|e| e.k_at_points[j].ln()).collect();
        linear_slope(&xs, &ys)
    }

    /// Same slope restricted to the final decade `a in [a_min, 10 a_min]`.
    pub fn blowup_slope_last_decade(&self, j: usize) -> f64 {
        let a_min = self.entries.last().map(|e| e.a).unwrap_or(0.0);
        let picked: Vec<&SweepEntry> = self
            .entries
            .iter()
            .filter(|e| e.a <= 10.0 * a_min)
            .collect();
        let xs: Vec<f64> = picked.iter().map(|e| (1.0 / e.a).ln()).collect();
        let ys: Vec<f64> = picked.iter().map(|e| e.k_at_points[j].ln()).collect();
        linear_slope(&xs, &ys)
    }
}

pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Supremum of `|K_a|` over the grid restricted to
/// `min_j |x - b_j| >= delta`, refining the grid until the estimate moves
/// by less than 1%.
pub fn off_axis_sup(
    params: &ConstructionParams,
    delta: f64,
    start_nx: usize,
) -> Result<(f64, usize)> {
    let data = ArctanSum::new(params)?;
    let spec = build_domain(params)?;
    let mut nx = start_nx.max(16);
    let mut prev: Option<f64> = None;
    // Columns exactly on the delta-boundary, where the supremum tends to sit.
    let mut boundary: Vec<Complex> = Vec::new();
    for &b in &params.points {
        for x in [b - delta, b + delta] {
            if !(crate::domain::X_MIN..=crate::domain::X_MAX).contains(&x) {
                continue;
            }
            if params.points.iter().any(|bj| (x - bj).abs() < delta) {
                continue;
            }
            for k in spec.pieces_at(x).collect::<Vec<_>>() {
                let w = spec.half_width(k, x);
                for row in 0..33 {
                    let y = w * ((row as f64 - 16.0) / 16.0);
                    boundary.push(Complex::new(x, y));
                }
            }
        }
    }
    loop {
        let grid = GridSpec::new(nx, 17);
        let pts = sample_grid(&spec, &grid)?;
        let mut kept: Vec<Complex> = pts
            .iter()
            .map(|p| p.z())
            .filter(|z| params.points.iter().all(|b| (z.re - b).abs() >= delta))
            .collect();
        kept.extend_from_slice(&boundary);
        let sup = map_slice(&kept, |z| {
            curvature_at(&data, *z).map(|c| c.k.abs()).unwrap_or(0.0)
        })
        .into_iter()
        .fold(0.0f64, f64::max);
        if let Some(p) = prev {
            if (sup - p).abs() <= 0.01 * sup || nx > 4096 {
                return Ok((sup, nx));
            }
        }
        prev = Some(sup);
        nx *= 2;
    }
}

/// Tabulate `|K_a(b_j)|` and the off-axis supremum across a sweep.
pub fn blowup_sweep(points: &[f64], a_values: &[f64], delta: f64) -> Result<BlowupSweep> {
    let mut entries = Vec::with_capacity(a_values.len());
    for &a in a_values {
        let params = ConstructionParams::new(points.to_vec(), a)?;
        let data = ArctanSum::new(&params)?;
        let k_at_points = points
            .iter()
            .map(|&b| Ok(curvature_at(&data, Complex::new(b, 0.0))?.k.abs()))
            .collect::<Result<Vec<f64>>>()?;
        let (sup_off_axis, off_axis_nx) = off_axis_sup(&params, delta, 64)?;
        entries.push(SweepEntry {
            a,
            k_at_points,
            sup_off_axis,
            off_axis_nx,
        });
    }
    Ok(BlowupSweep {
        points: points.to_vec(),
        delta,
        entries,
    })
}
