//! Numerical certification of the construction.
//!
//! Each check measures one claim about the family on a structured grid and
//! records the measured margin against its threshold:
//!
//! * height identity `x3(F(x,y)) = x` (exact by construction of the
//!   integrator, so the margin doubles as an integrator fault detector);
//! * the oscillation bound `max_y |u(x,y) - u(x,0)| < 1` together with the
//!   derivative-level inequalities it is integrated from;
//! * the graph property `<dF/dy(x,y), dF/dy(x,0)> > cosh(v)/2` and strict
//!   monotonicity of each level curve along its line direction;
//! * boundary separation `|F(x, ±w) - F(x,0)| >= r_0 > 0` with the explicit
//!   exponential lower bound on the projected separation;
//! * embeddedness of the triangulated surface plus the decomposition of the
//!   near-axis annulus into two multi-valued graphs;
//! * Cauchy-style convergence of `F` and its finite-difference first and
//!   second derivatives on compact sets away from the marked heights;
//! * spiraling rate: turns of `u(x, 0)` over dyadic height windows.
//!
//! Inequalities that are theorems hold up to quadrature/rounding slack and
//! are asserted; quantities the construction only claims to exist (the
//! separation radius `r_0` and its dependence on the number of points) are
//! measured and recorded without a pass/fail verdict.

use serde::Serialize;

use crate::domain::{build_domain, grid_columns, omega_zero, DomainSpec, GridSpec};
use crate::error::{Error, Result};
use crate::holo::{ArctanSum, HoloData};
use crate::immersion::{Engine, ImmersionSample};
use crate::mesh::{build_mesh, SurfaceMesh};
use crate::params::ConstructionParams;
use crate::quad::QuadratureConfig;
use crate::util::map_slice;
use crate::Complex;

/// Rounding/quadrature slack granted to strict analytic inequalities.
pub const ANALYTIC_SLACK: f64 = 1e-9;

/// One certified (or measured) claim.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The mathematical statement being checked.
    pub anchor: String,
    pub pass: bool,
    /// Measured quantity (direction documented by the anchor).
    pub margin: f64,
    /// Threshold the margin is compared against.
    pub tolerance: f64,
    /// Domain point attaining the worst margin, when meaningful.
    pub worst_z: Option<[f64; 2]>,
}

impl CheckRecord {
    fn measured(name: &str, anchor: &str, value: f64, worst: Option<[f64; 2]>) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            pass: true,
            margin: value,
            tolerance: 0.0,
            worst_z: worst,
        }
    }
}

/// Machine-readable verification outcome.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub params: ConstructionParams,
    pub grid: GridSpec,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Spiraling measurement near one marked height.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SheetCount {
    /// Marked-height index (0-based).
    pub j: usize,
    /// Height offset above `b_j`.
    pub t: f64,
    /// `|u(b_j + t, 0) - u(b_j + 2t, 0)|`.
    pub du: f64,
    /// Turns of the level-curve direction across the window: `du / 2 pi`.
    pub turns: f64,
    /// First-order prediction `1 / (4 pi t)`.
    pub predicted: f64,
}

/// Turns of the spiral between heights `b_j + t` and `b_j + 2t`.
pub fn sheet_count(params: &ConstructionParams, j: usize, t: f64) -> Result<SheetCount> {
    let spec = build_domain(params)?;
    if j >= params.n() {
        return Err(Error::InvalidParams(format!("point index {j} out of range")));
    }
    let b = params.points[j];
    let (_, hi) = spec.piece_range(j);
    if !(t > 0.0) || b + 2.0 * t > hi {
        return Err(Error::InvalidParams(format!(
            "window [b+t, b+2t] = [{}, {}] leaves piece {j} (ends at {hi})",
            b + t,
            b + 2.0 * t
        )));
    }
    let data = ArctanSum::new(params)?;
    let u1 = data.h(Complex::new(b + t, 0.0))?.re;
    let u2 = data.h(Complex::new(b + 2.0 * t, 0.0))?.re;
    let du = (u1 - u2).abs();
    Ok(SheetCount {
        j,
        t,
        du,
        turns: du / std::f64::consts::TAU,
        predicted: 1.0 / (4.0 * std::f64::consts::PI * t),
    })
}

/// Per-pair convergence data on the compact region.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergencePair {
    pub a_coarse: f64,
    pub a_fine: f64,
    /// sup |F_coarse - F_fine| over the region grid.
    pub sup_f: f64,
    /// sup over first central differences (step `fd_step`).
    pub sup_d1: f64,
    /// sup over second central differences, scaled by cosh^2 v of the finer
    /// member so the metric stays meaningful where the conformal factor is
    /// large.
    pub sup_d2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub a_values: Vec<f64>,
    pub delta: f64,
    pub fd_step: f64,
    pub tolerance: f64,
    pub pairs: Vec<ConvergencePair>,
    pub checks: Vec<CheckRecord>,
}

const STENCIL: [(f64, f64); 9] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (1.0, 1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
    (-1.0, -1.0),
];

fn norm3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Cauchy-criterion proxy for uniform C^2 convergence on `K_delta`.
///
/// For each consecutive pair of pinch values, measures the sup difference of
/// `F`, of its first central differences and of its (conformally scaled)
/// second central differences over a shared grid on the compact region.
/// Passes require every sequence to decrease strictly and the last
/// differences to drop below `tolerance`.
pub fn check_convergence(
    points: &[f64],
    a_values: &[f64],
    delta: f64,
    grid: &GridSpec,
    quad: &QuadratureConfig,
    fd_step: f64,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if a_values.len() < 3 {
        return Err(Error::InvalidParams(
            "convergence needs at least 3 pinch values".into(),
        ));
    }
    for w in a_values.windows(2) {
        if !(w[0] > w[1]) {
            return Err(Error::InvalidParams(
                "pinch values must decrease strictly".into(),
            ));
        }
    }
    let specs: Vec<DomainSpec> = a_values
        .iter()
        .map(|&a| build_domain(&ConstructionParams::new(points.to_vec(), a)?))
        .collect::<Result<_>>()?;
    let region = omega_zero(&specs, delta)?;
    let pts = region.sample_grid(grid, 2.0 * fd_step)?;

    // Evaluate the full stencil for every member of the family.
    let mut stencil_pts = Vec::with_capacity(pts.len() * STENCIL.len());
    for p in &pts {
        for (sx, sy) in STENCIL {
            stencil_pts.push(Complex::new(p.x + sx * fd_step, p.y + sy * fd_step));
        }
    }
    let mut fields: Vec<Vec<ImmersionSample>> = Vec::with_capacity(a_values.len());
    let mut conf: Vec<Vec<f64>> = Vec::with_capacity(a_values.len());
    for &a in a_values {
        let params = ConstructionParams::new(points.to_vec(), a)?;
        let data = ArctanSum::new(&params)?;
        let engine = Engine::new(&data, *quad);
        fields.push(engine.eval_batch(&stencil_pts)?);
        conf.push(
            pts.iter()
                .map(|p| {
                    let v = data.h(p.z()).map(|h| h.im).unwrap_or(0.0);
                    v.cosh().powi(2)
                })
                .collect(),
        );
    }

    let h = fd_step;
    let d1 = |f: &[ImmersionSample], c: usize| -> [[f64; 3]; 2] {
        let mut out = [[0.0; 3]; 2];
        for (m, (ip, im)) in [(c + 1, c + 2), (c + 3, c + 4)].into_iter().enumerate() {
            for q in 0..3 {
                out[m][q] = (f[ip].f[q] - f[im].f[q]) / (2.0 * h);
            }
        }
        out
    };
    let d2 = |f: &[ImmersionSample], c: usize| -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for q in 0..3 {
            out[0][q] = (f[c + 1].f[q] - 2.0 * f[c].f[q] + f[c + 2].f[q]) / (h * h);
            out[1][q] = (f[c + 3].f[q] - 2.0 * f[c].f[q] + f[c + 4].f[q]) / (h * h);
            out[2][q] =
                (f[c + 5].f[q] - f[c + 6].f[q] - f[c + 7].f[q] + f[c + 8].f[q]) / (4.0 * h * h);
        }
        out
    };

    let mut pairs = Vec::new();
    for w in 0..a_values.len() - 1 {
        let (fa, fb) = (&fields[w], &fields[w + 1]);
        let scale = &conf[w + 1];
        let mut sup_f = 0.0f64;
        let mut sup_d1 = 0.0f64;
        let mut sup_d2 = 0.0f64;
        for (i, _) in pts.iter().enumerate() {
            let c = STENCIL.len() * i;
            sup_f = sup_f.max(norm3(&fa[c].f, &fb[c].f));
            let (da, db) = (d1(fa, c), d1(fb, c));
            for m in 0..2 {
                sup_d1 = sup_d1.max(norm3(&da[m], &db[m]));
            }
            let (sa, sb) = (d2(fa, c), d2(fb, c));
            for m in 0..3 {
                sup_d2 = sup_d2.max(norm3(&sa[m], &sb[m]) / scale[i]);
            }
        }
        pairs.push(ConvergencePair {
            a_coarse: a_values[w],
            a_fine: a_values[w + 1],
            sup_f,
            sup_d1,
            sup_d2,
        });
    }

    let mut checks = Vec::new();
    let mut min_drop = f64::INFINITY;
    let mut worst_pair = 0usize;
    for w in 0..pairs.len() - 1 {
        for (cur, nxt) in [
            (pairs[w].sup_f, pairs[w + 1].sup_f),
            (pairs[w].sup_d1, pairs[w + 1].sup_d1),
            (pairs[w].sup_d2, pairs[w + 1].sup_d2),
        ] {
            if cur - nxt < min_drop {
                min_drop = cur - nxt;
                worst_pair = w;
            }
        }
    }
    checks.push(CheckRecord {
        name: "convergence.decreasing".into(),
        anchor: "sup-differences of F, D1 F, D2 F between consecutive a decrease strictly".into(),
        pass: min_drop > 0.0,
        margin: min_drop,
        tolerance: 0.0,
        worst_z: Some([pairs[worst_pair].a_coarse, pairs[worst_pair].a_fine]),
    });
    let last = pairs.last().unwrap();
    let last_max = last.sup_f.max(last.sup_d1).max(last.sup_d2);
    checks.push(CheckRecord {
        name: "convergence.last-difference".into(),
        anchor: "final sup-difference of F and its FD derivatives below tolerance".into(),
        pass: last_max < tolerance,
        margin: last_max,
        tolerance,
        worst_z: None,
    });

    // Limit partition: region abscissas sit strictly between the marked
    // heights bounding their piece (immediate from x3 = x; recorded).
    let mut min_gap = f64::INFINITY;
    let mut worst = None;
    for p in &pts {
        for &b in points {
            let gap = (p.x - b).abs();
            if gap < min_gap {
                min_gap = gap;
                worst = Some([p.x, p.y]);
            }
        }
    }
    checks.push(CheckRecord {
        name: "convergence.limit-partition".into(),
        anchor: "x3 of compact-region samples stays strictly between adjacent marked heights"
            .into(),
        pass: min_gap > 0.0,
        margin: min_gap,
        tolerance: 0.0,
        worst_z: worst,
    });

    Ok(ConvergenceReport {
        a_values: a_values.to_vec(),
        delta,
        fd_step,
        tolerance,
        pairs,
        checks,
    })
}

/// Grid-based verifier for one family member.
pub struct Verifier {
    params: ConstructionParams,
    spec: DomainSpec,
    data: ArctanSum,
    grid: GridSpec,
    quad: QuadratureConfig,
    axis_fault: f64,
    /// When set, the default convergence run asserts its final difference
    /// against this tolerance; otherwise it is recorded as a measurement.
    convergence_tolerance: Option<f64>,
}

impl Verifier {
    pub fn new(
        params: &ConstructionParams,
        grid: &GridSpec,
        quad: &QuadratureConfig,
    ) -> Result<Self> {
        grid.validate()?;
        quad.validate()?;
        Ok(Self {
            params: params.clone(),
            spec: build_domain(params)?,
            data: ArctanSum::new(params)?,
            grid: grid.clone(),
            quad: *quad,
            axis_fault: 0.0,
            convergence_tolerance: None,
        })
    }

    /// Negative-control hook: corrupt the integrator's third component.
    pub fn with_axis_fault(mut self, eps: f64) -> Self {
        self.axis_fault = eps;
        self
    }

    /// Assert the default convergence run's final difference against `tol`.
    pub fn with_convergence_tolerance(mut self, tol: f64) -> Self {
        self.convergence_tolerance = Some(tol);
        self
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    fn engine(&self) -> Engine<'_, ArctanSum> {
        Engine::new(&self.data, self.quad)
            .with_domain(&self.spec)
            .with_axis_fault(self.axis_fault)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.spec
    }

    /// `x3(F(x, y)) = x` up to the quadrature budget (0 in exact arithmetic).
    pub fn check_height(&self) -> Result<CheckRecord> {
        let cols = grid_columns(&self.spec, &self.grid)?;
        let engine = self.engine();
        let per_col = map_slice(&cols, |col| -> Result<(f64, [f64; 2])> {
            let zs: Vec<Complex> = col.ys.iter().map(|&y| Complex::new(col.x, y)).collect();
            let samples = engine.eval_batch(&zs)?;
            let mut worst = (0.0f64, [col.x, 0.0]);
            for s in &samples {
                let dev = (s.f[2] - s.z.re).abs();
                if dev > worst.0 {
                    worst = (dev, [s.z.re, s.z.im]);
                }
            }
            Ok(worst)
        });
        let mut margin = 0.0f64;
        let mut worst = None;
        for r in per_col {
            let (dev, z) = r?;
            if dev >= margin {
                margin = dev;
                worst = Some(z);
            }
        }
        Ok(CheckRecord {
            name: "height.identity".into(),
            anchor: "x3(F(x,y)) = x".into(),
            pass: margin <= self.quad.abs_tol,
            margin,
            tolerance: self.quad.abs_tol,
            worst_z: worst,
        })
    }

    /// `max_y |u(x,y) - u(x,0)| < 1` plus the integrated bound it follows
    /// from.
    pub fn check_u_oscillation(&self) -> Result<Vec<CheckRecord>> {
        let cols = grid_columns(&self.spec, &self.grid)?;
        let a2 = self.params.a * self.params.a;
        let per_col = map_slice(&cols, |col| -> Result<(f64, [f64; 2], f64)> {
            let u0 = self.data.h(Complex::new(col.x, 0.0))?.re;
            let mut osc = 0.0f64;
            let mut worst = [col.x, 0.0];
            for &y in &col.ys {
                let u = self.data.h(Complex::new(col.x, y))?.re;
                let dev = (u - u0).abs();
                if dev > osc {
                    osc = dev;
                    worst = [col.x, y];
                }
            }
            // Column bound: integrate the derivative inequality to the rim.
            let w = col.ys.last().copied().unwrap_or(0.0);
            let mut bound = 0.0;
            for (j, &b) in self.params.points.iter().enumerate() {
                let d = (col.x - b).abs();
                let denom = (col.x - b) * (col.x - b) + a2;
                bound += 2.0 * self.params.weight(j) * d * w * w / (denom * denom);
            }
            Ok((osc, worst, bound - osc))
        });

        let mut max_osc = 0.0f64;
        let mut worst = None;
        let mut min_bound_margin = f64::INFINITY;
        let mut worst_bound = None;
        for r in per_col {
            let (osc, z, diff) = r?;
            if osc >= max_osc {
                max_osc = osc;
                worst = Some(z);
            }
            if diff < min_bound_margin {
                min_bound_margin = diff;
                worst_bound = Some(z);
            }
        }
        Ok(vec![
            CheckRecord {
                name: "u-oscillation.unit".into(),
                anchor: "max_y |u(x,y) - u(x,0)| < 1".into(),
                pass: max_osc < 1.0,
                margin: max_osc,
                tolerance: 1.0,
                worst_z: worst,
            },
            CheckRecord {
                name: "u-oscillation.integral-bound".into(),
                anchor: "osc_y u(x) <= 2 sum_j 2^(1-j) |x-b_j| w^2 / ((x-b_j)^2 + a^2)^2".into(),
                pass: min_bound_margin > -ANALYTIC_SLACK,
                margin: min_bound_margin,
                tolerance: ANALYTIC_SLACK,
                worst_z: worst_bound,
            },
        ])
    }

    /// Pointwise inequalities the oscillation/separation chain rests on.
    pub fn check_chain_inequalities(&self) -> Result<Vec<CheckRecord>> {
        let cols = grid_columns(&self.spec, &self.grid)?;
        let a2 = self.params.a * self.params.a;
        let n = self.params.n();

        struct ColOut {
            dyu: (f64, [f64; 2]),
            dyv: (f64, [f64; 2]),
            minv: (f64, [f64; 2]),
        }
        let per_col = map_slice(&cols, |col| -> Result<ColOut> {
            let mut dyu = (f64::INFINITY, [col.x, 0.0]);
            let mut dyv = (f64::INFINITY, [col.x, 0.0]);
            let mut minv = (f64::INFINITY, [col.x, 0.0]);
            let w = col.ys.last().copied().unwrap_or(0.0);
            let sk = (col.x - self.params.points[col.piece]).powi(2) + a2;
            for &y in &col.ys {
                let z = Complex::new(col.x, y);
                let s = self.data.sample(z)?;
                // Cauchy-Riemann: du/dy = -Im h', dv/dy = Re h'.
                let du_dy = -s.dzh.im;
                let dv_dy = s.dzh.re;
                let mut dyu_bound = 0.0;
                let mut dyv_bound = 0.0;
                for (j, &b) in self.params.points.iter().enumerate() {
                    let denom = (col.x - b) * (col.x - b) + a2;
                    let wj = self.params.weight(j);
                    dyu_bound += 4.0 * wj * (col.x - b).abs() * y.abs() / (denom * denom);
                    dyv_bound += 0.375 * wj / denom;
                }
                let m1 = dyu_bound - du_dy.abs();
                if m1 < dyu.0 {
                    dyu = (m1, [z.re, z.im]);
                }
                let m2 = dv_dy - dyv_bound;
                if m2 < dyv.0 {
                    dyv = (m2, [z.re, z.im]);
                }
                // Rim band w/2 <= |y| <= w.
                if y.abs() >= 0.5 * w && y.abs() > 0.0 {
                    let rhs = sk.powf(-0.25) / (11.0 * 2.0f64.powi(n as i32 - 1));
                    let m3 = s.v.abs() - rhs;
                    if m3 < minv.0 {
                        minv = (m3, [z.re, z.im]);
                    }
                }
            }
            Ok(ColOut { dyu, dyv, minv })
        });

        let mut dyu = (f64::INFINITY, None);
        let mut dyv = (f64::INFINITY, None);
        let mut minv = (f64::INFINITY, None);
        for r in per_col {
            let c = r?;
            if c.dyu.0 < dyu.0 {
                dyu = (c.dyu.0, Some(c.dyu.1));
            }
            if c.dyv.0 < dyv.0 {
                dyv = (c.dyv.0, Some(c.dyv.1));
            }
            if c.minv.0 < minv.0 {
                minv = (c.minv.0, Some(c.minv.1));
            }
        }
        Ok(vec![
            CheckRecord {
                name: "chain.du-dy-bound".into(),
                anchor: "|du/dy| <= 4 sum_j 2^(1-j) |x-b_j| |y| / ((x-b_j)^2 + a^2)^2".into(),
                pass: dyu.0 > -ANALYTIC_SLACK,
                margin: dyu.0,
                tolerance: ANALYTIC_SLACK,
                worst_z: dyu.1,
            },
            CheckRecord {
                name: "chain.dv-dy-lower".into(),
                anchor: "dv/dy >= (3/8) sum_j 2^(1-j) / ((x-b_j)^2 + a^2)".into(),
                pass: dyv.0 > -ANALYTIC_SLACK,
                margin: dyv.0,
                tolerance: ANALYTIC_SLACK,
                worst_z: dyv.1,
            },
            CheckRecord {
                name: "chain.min-v-band".into(),
                anchor: "|v| > ((x-b_k)^2 + a^2)^(-1/4) / (11 * 2^(n-1)) for w/2 <= |y| <= w"
                    .into(),
                pass: minv.0 > -ANALYTIC_SLACK,
                margin: minv.0,
                tolerance: ANALYTIC_SLACK,
                worst_z: minv.1,
            },
        ])
    }

    /// Level curves are graphs: tangent stays within 60 degrees of its axis
    /// direction, and the projection onto that direction grows strictly.
    pub fn check_graph_property(&self) -> Result<Vec<CheckRecord>> {
        let cols = grid_columns(&self.spec, &self.grid)?;
        let engine = self.engine();
        struct ColOut {
            angle: (f64, [f64; 2]),
            mono: (f64, [f64; 2]),
        }
        let per_col = map_slice(&cols, |col| -> Result<ColOut> {
            let u0 = self.data.h(Complex::new(col.x, 0.0))?.re;
            let dir = [u0.sin(), -u0.cos()];
            let mut angle = (f64::INFINITY, [col.x, 0.0]);
            for &y in &col.ys {
                let s = self.data.sample(Complex::new(col.x, y))?;
                let (su, cu) = s.u.sin_cos();
                let chv = s.v.cosh();
                // <dF/dy(x,y), dF/dy(x,0)> = cosh v cos(u - u0).
                let dot = chv * (su * dir[0] + (-cu) * dir[1]);
                let m = dot - 0.5 * chv;
                if m < angle.0 {
                    angle = (m, [col.x, y]);
                }
            }
            let zs: Vec<Complex> = col.ys.iter().map(|&y| Complex::new(col.x, y)).collect();
            let samples = engine.eval_batch(&zs)?;
            let mut mono = (f64::INFINITY, [col.x, 0.0]);
            for pair in samples.windows(2) {
                let p0 = pair[0].f[0] * dir[0] + pair[0].f[1] * dir[1];
                let p1 = pair[1].f[0] * dir[0] + pair[1].f[1] * dir[1];
                let m = p1 - p0;
                if m < mono.0 {
                    mono = (m, [pair[1].z.re, pair[1].z.im]);
                }
            }
            Ok(ColOut { angle, mono })
        });

        let mut angle = (f64::INFINITY, None);
        let mut mono = (f64::INFINITY, None);
        for r in per_col {
            let c = r?;
            if c.angle.0 < angle.0 {
                angle = (c.angle.0, Some(c.angle.1));
            }
            if c.mono.0 < mono.0 {
                mono = (c.mono.0, Some(c.mono.1));
            }
        }
        Ok(vec![
            CheckRecord {
                name: "graph.tangent-angle".into(),
                anchor: "<dF/dy(x,y), dF/dy(x,0)> > cosh(v)/2".into(),
                pass: angle.0 > 0.0,
                margin: angle.0,
                tolerance: 0.0,
                worst_z: angle.1,
            },
            CheckRecord {
                name: "graph.level-curve-monotone".into(),
                anchor: "projection of (F1,F2)(x,.) onto (sin u(x,0), -cos u(x,0)) is strictly increasing".into(),
                pass: mono.0 > 0.0,
                margin: mono.0,
                tolerance: 0.0,
                worst_z: mono.1,
            },
        ])
    }

    /// Boundary separation and its exponential lower bound; also returns the
    /// measured separation radius per piece.
    pub fn check_separation(&self) -> Result<(Vec<CheckRecord>, SeparationEstimate)> {
        let cols = grid_columns(&self.spec, &self.grid)?;
        let engine = self.engine();
        let a2 = self.params.a * self.params.a;
        let n = self.params.n();
        struct ColOut {
            piece: usize,
            sep: f64,
            bound_margin: f64,
            x: f64,
        }
        let per_col = map_slice(&cols, |col| -> Result<ColOut> {
            let w = col.ys.last().copied().unwrap_or(0.0);
            let zs = [
                Complex::new(col.x, -w),
                Complex::new(col.x, 0.0),
                Complex::new(col.x, w),
            ];
            let s = engine.eval_batch(&zs)?;
            let sep_plus = norm3(&s[2].f, &s[1].f);
            let sep_minus = norm3(&s[0].f, &s[1].f);

            // Projected separation against the closed-form lower bound.
            let u0 = self.data.h(Complex::new(col.x, 0.0))?.re;
            let dir = [u0.sin(), -u0.cos()];
            let proj = |p: &[f64; 3], q: &[f64; 3]| (p[0] - q[0]) * dir[0] + (p[1] - q[1]) * dir[1];
            let lhs_plus = proj(&s[2].f, &s[1].f);
            let lhs_minus = -proj(&s[0].f, &s[1].f);
            let sk = (col.x - self.params.points[col.piece]).powi(2) + a2;
            let rhs = sk.powf(0.75) / 16.0
                * (sk.powf(-0.25) / (11.0 * 2.0f64.powi(n as i32 - 1))).exp();
            Ok(ColOut {
                piece: col.piece,
                sep: sep_plus.min(sep_minus),
                bound_margin: lhs_plus.min(lhs_minus) - rhs,
                x: col.x,
            })
        });

        let mut per_piece = vec![f64::INFINITY; self.spec.pieces()];
        let mut bound = (f64::INFINITY, None);
        let mut worst_sep = (f64::INFINITY, None);
        for r in per_col {
            let c = r?;
            per_piece[c.piece] = per_piece[c.piece].min(c.sep);
            if c.sep < worst_sep.0 {
                worst_sep = (c.sep, Some([c.x, 0.0]));
            }
            if c.bound_margin < bound.0 {
                bound = (c.bound_margin, Some([c.x, 0.0]));
            }
        }
        let r0 = per_piece.iter().cloned().fold(f64::INFINITY, f64::min);

        let mut checks = vec![
            CheckRecord {
                name: "separation.positive".into(),
                anchor: "min_x |F(x, ±w(x)) - F(x, 0)| = r0 > 0".into(),
                pass: r0 > 0.0,
                margin: r0,
                tolerance: 0.0,
                worst_z: worst_sep.1,
            },
            CheckRecord {
                name: "separation.lower-bound".into(),
                anchor: "<F(x,±w)-F(x,0), dF/dy(x,0)> > s^(3/4)/16 * exp(s^(-1/4)/(11*2^(n-1))), s = (x-b_k)^2+a^2".into(),
                pass: bound.0 > -ANALYTIC_SLACK,
                margin: bound.0,
                tolerance: ANALYTIC_SLACK,
                worst_z: bound.1,
            },
        ];
        for (k, rk) in per_piece.iter().enumerate() {
            checks.push(CheckRecord::measured(
                &format!("separation.r0.piece-{}", k + 1),
                "measured per-piece separation radius r_k",
                *rk,
                None,
            ));
        }
        Ok((
            checks,
            SeparationEstimate {
                r0,
                per_piece,
            },
        ))
    }

    /// Embeddedness of the triangulated surface plus the two-multi-graph
    /// decomposition of the near-axis annulus.
    pub fn check_embedding(&self, mesh: &SurfaceMesh) -> Result<Vec<CheckRecord>> {
        let report = crate::intersect::self_intersections(mesh)?;
        let mut checks = vec![CheckRecord {
            name: "embedding.no-self-intersection".into(),
            anchor: "no transversal intersection among non-adjacent mesh triangles".into(),
            pass: report.is_embedded(),
            margin: report.pairs.len() as f64,
            tolerance: 0.0,
            worst_z: report.pairs.first().map(|&(i, _)| {
                let c = mesh.triangle_domain_centroid(i);
                [c.re, c.im]
            }),
        }];
        checks.push(self.check_multi_graph_decomposition(mesh)?);
        Ok(checks)
    }

    /// Near-axis annulus decomposes by sign of y into two components, each
    /// single-valued per (sheet, angle) bin of the unwrapped direction.
    fn check_multi_graph_decomposition(&self, mesh: &SurfaceMesh) -> Result<CheckRecord> {
        // Separation radius straight from the mesh rims.
        let mut r0 = f64::INFINITY;
        for v in &mesh.vertices {
            let Some(w) = self.spec.width_at(v.domain[0]) else {
                continue;
            };
            if v.domain[1].abs() == w {
                let rho = (v.position[0].powi(2) + v.position[1].powi(2)).sqrt();
                r0 = r0.min(rho);
            }
        }
        if !r0.is_finite() || r0 <= 0.0 {
            return Ok(CheckRecord {
                name: "embedding.multi-graph-decomposition".into(),
                anchor: "0 < x1^2 + x2^2 < r0^2 splits by sign(y) into two multi-valued graphs"
                    .into(),
                pass: false,
                margin: r0,
                tolerance: 0.0,
                worst_z: None,
            });
        }

        const BIN: f64 = std::f64::consts::FRAC_PI_4;
        // A bin's members may come from columns whose reference phase spans
        // the bin width plus twice the 1-radian tangent-deviation bound;
        // anything wider means two spiral sheets collapsed into one bin.
        const ALLOWED: f64 = BIN + 2.0 + 0.5;
        let mut bins: std::collections::HashMap<(i64, i64), (f64, f64, [f64; 2])> =
            std::collections::HashMap::new();
        let mut populated = [false, false];
        for v in &mesh.vertices {
            let y = v.domain[1];
            if y == 0.0 {
                continue;
            }
            let rho = (v.position[0].powi(2) + v.position[1].powi(2)).sqrt();
            if !(rho > 0.0 && rho < r0) {
                continue;
            }
            let side = if y > 0.0 { 0 } else { 1 };
            populated[side] = true;
            let reference = if side == 0 {
                v.u_axis - std::f64::consts::FRAC_PI_2
            } else {
                v.u_axis + std::f64::consts::FRAC_PI_2
            };
            let theta_raw = v.position[1].atan2(v.position[0]);
            let lift = ((reference - theta_raw) / std::f64::consts::TAU).round();
            let theta = theta_raw + std::f64::consts::TAU * lift;
            let cell = (side as i64, (theta / BIN).floor() as i64);
            let e = bins
                .entry(cell)
                .or_insert((f64::INFINITY, f64::NEG_INFINITY, v.domain));
            e.0 = e.0.min(reference);
            e.1 = e.1.max(reference);
        }

        let mut worst_ratio = 0.0f64;
        let mut worst = None;
        for (lo, hi, dom) in bins.values() {
            let ratio = (hi - lo) / ALLOWED;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = Some(*dom);
            }
        }
        let pass = populated[0] && populated[1] && worst_ratio < 1.0;
        Ok(CheckRecord {
            name: "embedding.multi-graph-decomposition".into(),
            anchor: "0 < x1^2 + x2^2 < r0^2 splits by sign(y) into two multi-valued graphs, single-valued per (sheet, angle) bin".into(),
            pass,
            margin: worst_ratio,
            tolerance: 1.0,
            worst_z: worst,
        })
    }

    /// All checks for one family member, plus spiral measurements and a
    /// convergence run over a halving ladder ending at this `a`.
    pub fn run_all(&self) -> Result<VerificationReport> {
        let mut checks = Vec::new();
        checks.push(self.check_height()?);
        checks.extend(self.check_u_oscillation()?);
        checks.extend(self.check_chain_inequalities()?);
        checks.extend(self.check_graph_property()?);
        let (sep_checks, _) = self.check_separation()?;
        checks.extend(sep_checks);

        // The fault hook targets the path integrator, so the height check
        // above carries it; the embedding scan runs on the clean mesh.
        let mesh = build_mesh(&self.params, &self.grid, &self.quad)?;
        checks.extend(self.check_embedding(&mesh)?);

        // Spiral turns at a quarter of each piece's upper margin.
        for j in 0..self.params.n() {
            let (_, hi) = self.spec.piece_range(j);
            let t = 0.25 * (hi - self.params.points[j]);
            if let Ok(sc) = sheet_count(&self.params, j, t) {
                checks.push(CheckRecord::measured(
                    &format!("sheet-count.point-{}", j + 1),
                    "turns of u(x,0) across [b_j + t, b_j + 2t] against 1/(4 pi t)",
                    sc.turns,
                    Some([sc.t, sc.predicted]),
                ));
            }
        }

        // Convergence over a halving ladder ending at the configured a,
        // using a delta that keeps the compact region nonempty.
        let delta = self.default_delta();
        let ladder = [8.0, 4.0, 2.0, 1.0]
            .iter()
            .map(|m| m * self.params.a)
            .filter(|a| *a <= 0.5)
            .collect::<Vec<_>>();
        let ladder = if ladder.len() < 3 {
            let mut l = vec![self.params.a * 4.0, self.params.a * 2.0, self.params.a];
            while l[0] > 0.5 {
                l = l.into_iter().map(|a| a * 0.5).collect();
            }
            l
        } else {
            ladder
        };
        let conv = check_convergence(
            &self.params.points,
            &ladder,
            delta,
            &GridSpec::new(self.grid.nx.min(48), 7),
            &self.quad,
            1e-3,
            self.convergence_tolerance.unwrap_or(f64::INFINITY),
        )?;
        for mut rec in conv.checks {
            // Without a configured tolerance the default ladder is a smoke
            // measurement: monotonicity across an arbitrary halving ladder is
            // only guaranteed along subsequences, so record, don't assert.
            if self.convergence_tolerance.is_none()
                && (rec.name == "convergence.last-difference"
                    || rec.name == "convergence.decreasing")
            {
                rec.pass = true;
                rec.tolerance = 0.0;
            }
            checks.push(rec);
        }

        Ok(VerificationReport {
            params: self.params.clone(),
            grid: self.grid.clone(),
            checks,
        })
    }

    /// Largest delta at 0.1 that keeps every piece's off-strip part
    /// nonempty, shrinking when pieces are narrow.
    fn default_delta(&self) -> f64 {
        let mut delta = 0.1f64;
        for k in 0..self.spec.pieces() {
            let (lo, hi) = self.spec.piece_range(k);
            let b = self.params.points[k];
            let room = (b - lo).max(hi - b);
            delta = delta.min(0.5 * room);
        }
        delta
    }
}

/// Measured separation radii.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationEstimate {
    /// Overall `r0 = min_k r_k`.
    pub r0: f64,
    /// Per-piece minima.
    pub per_piece: Vec<f64>,
}
