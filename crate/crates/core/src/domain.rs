//! The pinched strip domain, membership tests and sampling grids.
//!
//! The domain is a union of pieces, one per marked height `b_k`. Piece `k`
//! covers the x-range between consecutive split abscissas and has half-width
//!
//! ```text
//! w_k(x) = ((x - b_k)^2 + a^2)^(3/4) / 2,
//! ```
//!
//! so it pinches down to half-width `a^(3/2)/2` above `b_k`. The splits are
//! the midpoints `(b_k + b_{k+1})/2`, which makes `b_k` the nearest marked
//! height everywhere on piece `k` — the property every embedding inequality
//! relies on — and makes the half-width continuous across splits. An
//! alternative split rule that places the boundary at half the *gap value*
//! `(b_{k+1} - b_k)/2` is available for comparison only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ConstructionParams;
use crate::Complex;

/// X-extent of the domain.
pub const X_MIN: f64 = -0.5;
pub const X_MAX: f64 = 0.5;

/// How split abscissas between consecutive pieces are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRule {
    /// Midpoints `(b_k + b_{k+1})/2`; the rule all certification uses.
    #[default]
    Midpoint,
    /// Half-gap values `(b_{k+1} - b_k)/2` read as absolute abscissas.
    /// Breaks the nearest-point property; provided for comparison only.
    HalfGap,
}

/// A validated piecewise domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub params: ConstructionParams,
    /// `n + 1` split abscissas `-1/2 = s_0 < s_1 < ... < s_n = 1/2`;
    /// piece `k` (0-based) covers `[s_k, s_{k+1}]`.
    pub splits: Vec<f64>,
}

impl DomainSpec {
    /// Half-width of piece `k` at abscissa `x`.
    pub fn half_width(&self, k: usize, x: f64) -> f64 {
        let d = x - self.params.points[k];
        (d * d + self.params.a * self.params.a).powf(0.75) * 0.5
    }

    /// Number of pieces.
    pub fn pieces(&self) -> usize {
        self.params.n()
    }

    /// X-range `[s_k, s_{k+1}]` of piece `k`.
    pub fn piece_range(&self, k: usize) -> (f64, f64) {
        (self.splits[k], self.splits[k + 1])
    }

    /// Pieces whose x-range contains `x` (two at a split abscissa).
    pub fn pieces_at(&self, x: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.pieces()).filter(move |&k| self.splits[k] <= x && x <= self.splits[k + 1])
    }

    /// Membership test, boundary inclusive.
    pub fn contains(&self, z: Complex) -> bool {
        let (x, y) = (z.re, z.im);
        if !(X_MIN..=X_MAX).contains(&x) {
            return false;
        }
        self.pieces_at(x).any(|k| y.abs() <= self.half_width(k, x))
    }

    /// Canonical half-width at `x`: the owning piece's width, with the
    /// lower-indexed piece winning at split abscissas. Sampling always goes
    /// through this so seam columns of adjacent strips agree bit for bit
    /// (the two pieces' widths coincide there mathematically, but not
    /// always in the last float ulp).
    pub fn width_at(&self, x: f64) -> Option<f64> {
        self.pieces_at(x).next().map(|k| self.half_width(k, x))
    }

    /// Membership of a whole polyline (every segment sampled densely).
    pub fn contains_path(&self, path: &[Complex], samples_per_segment: usize) -> bool {
        path.windows(2).all(|pair| {
            (0..=samples_per_segment).all(|i| {
                let t = i as f64 / samples_per_segment as f64;
                self.contains(pair[0] + (pair[1] - pair[0]) * t)
            })
        }) && path.iter().all(|z| self.contains(*z))
    }
}

/// Structured sampling grid: `nx` columns per piece, `ny` samples per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    /// Odd, so `y = 0` is always sampled.
    pub ny: usize,
    /// Optional sub-rectangle `[x0, x1, y0, y1]` for compact-subset studies.
    #[serde(default)]
    pub clip: Option<[f64; 4]>,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny, clip: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 {
            return Err(Error::InvalidGrid(format!("nx = {} < 2", self.nx)));
        }
        if self.ny < 3 || self.ny % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "ny = {} must be odd and at least 3",
                self.ny
            )));
        }
        Ok(())
    }
}

/// A grid sample: domain point plus the piece it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub piece: usize,
}

impl GridPoint {
    pub fn z(&self) -> Complex {
        Complex::new(self.x, self.y)
    }
}

/// One sampling column: fixed `x`, heights ordered bottom to top with the
/// center row exactly at `y = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridColumn {
    pub x: f64,
    pub piece: usize,
    pub ys: Vec<f64>,
}

/// Column-major view of the structured grid (pieces in order, `nx` columns
/// each). Flattening the columns reproduces [`sample_grid`] exactly.
pub fn grid_columns(spec: &DomainSpec, grid: &GridSpec) -> Result<Vec<GridColumn>> {
    grid.validate()?;
    let half = (grid.ny / 2) as f64;
    let mut cols = Vec::with_capacity(spec.pieces() * grid.nx);
    for k in 0..spec.pieces() {
        let (x0, x1) = spec.piece_range(k);
        for i in 0..grid.nx {
            let t = i as f64 / (grid.nx - 1) as f64;
            let x = x0 * (1.0 - t) + x1 * t;
            let w = spec.width_at(x).unwrap_or_else(|| spec.half_width(k, x));
            let ys = (0..grid.ny)
                .map(|row| w * ((row as f64 - half) / half))
                .collect();
            cols.push(GridColumn { x, piece: k, ys });
        }
    }
    Ok(cols)
}

/// Build the piecewise domain for the given parameters.
pub fn build_domain(params: &ConstructionParams) -> Result<DomainSpec> {
    build_domain_with(params, SplitRule::Midpoint)
}

/// Build with an explicit split rule.
pub fn build_domain_with(params: &ConstructionParams, rule: SplitRule) -> Result<DomainSpec> {
    params.validate()?;
    let b = &params.points;
    let mut splits = Vec::with_capacity(b.len() + 1);
    splits.push(X_MIN);
    for k in 0..b.len().saturating_sub(1) {
        let s = match rule {
            SplitRule::Midpoint => 0.5 * (b[k] + b[k + 1]),
            SplitRule::HalfGap => 0.5 * (b[k + 1] - b[k]),
        };
        splits.push(s);
    }
    splits.push(X_MAX);
    for w in splits.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParams(format!(
                "split abscissas not increasing: {} then {} (rule {rule:?})",
                w[0], w[1]
            )));
        }
    }
    Ok(DomainSpec {
        params: params.clone(),
        splits,
    })
}

/// Sample a structured grid over every piece.
///
/// Columns are uniform in `x` over each piece (endpoints included); each
/// column is uniform in `y` over `[-w_k(x), w_k(x)]` with the center row
/// exactly at `y = 0` and the extreme rows exactly at `±w_k(x)`. With a
/// `clip` rectangle, columns and rows outside it are dropped.
pub fn sample_grid(spec: &DomainSpec, grid: &GridSpec) -> Result<Vec<GridPoint>> {
    grid.validate()?;
    let mut out = Vec::new();
    let half = (grid.ny / 2) as f64;
    for k in 0..spec.pieces() {
        let (x0, x1) = spec.piece_range(k);
        for i in 0..grid.nx {
            let t = i as f64 / (grid.nx - 1) as f64;
            let x = x0 * (1.0 - t) + x1 * t;
            if let Some([cx0, cx1, _, _]) = grid.clip {
                if x < cx0 || x > cx1 {
                    continue;
                }
            }
            let w = spec.width_at(x).unwrap_or_else(|| spec.half_width(k, x));
            for row in 0..grid.ny {
                let y = w * ((row as f64 - half) / half);
                if let Some([_, _, cy0, cy1]) = grid.clip {
                    if y < cy0 || y > cy1 {
                        continue;
                    }
                }
                out.push(GridPoint { x, y, piece: k });
            }
        }
    }
    Ok(out)
}

/// Compact region `K_delta`: points at least `delta` away (in `x`) from every
/// marked height and inside every listed domain.
///
/// With half-widths increasing in `a`, intersecting a family over decreasing
/// `a` effectively means the smallest-`a` domain; the predicate nevertheless
/// checks all of them.
#[derive(Debug, Clone)]
pub struct CompactRegion {
    specs: Vec<DomainSpec>,
    delta: f64,
}

impl CompactRegion {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn contains(&self, z: Complex) -> bool {
        let clear = self.specs[0]
            .params
            .points
            .iter()
            .all(|b| (z.re - b).abs() >= self.delta);
        clear && self.specs.iter().all(|s| s.contains(z))
    }

    /// Admissible x-intervals: piece ranges with the delta-strips removed.
    pub fn x_intervals(&self) -> Vec<(f64, f64)> {
        let spec = &self.specs[0];
        let mut out = Vec::new();
        for k in 0..spec.pieces() {
            let (lo, hi) = spec.piece_range(k);
            // Remove |x - b_j| < delta for every j, not just the piece's own.
            let mut segments = vec![(lo, hi)];
            for &b in &spec.params.points {
                let mut next = Vec::new();
                for (s0, s1) in segments {
                    let (c0, c1) = (b - self.delta, b + self.delta);
                    if c1 <= s0 || c0 >= s1 {
                        next.push((s0, s1));
                    } else {
                        if s0 < c0 {
                            next.push((s0, c0));
                        }
                        if c1 < s1 {
                            next.push((c1, s1));
                        }
                    }
                }
                segments = next;
            }
            out.extend(segments);
        }
        out
    }

    /// Minimum half-width over all member domains at `x` (for the piece
    /// owning `x` in each).
    pub fn min_half_width(&self, x: f64) -> f64 {
        self.specs
            .iter()
            .map(|s| {
                s.pieces_at(x)
                    .map(|k| s.half_width(k, x))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Structured grid over the region, shrunk by `margin` on every side so
    /// finite-difference stencils of that radius stay inside.
    pub fn sample_grid(&self, grid: &GridSpec, margin: f64) -> Result<Vec<GridPoint>> {
        grid.validate()?;
        let mut out = Vec::new();
        let half = (grid.ny / 2) as f64;
        for (ival_idx, (lo, hi)) in self.x_intervals().into_iter().enumerate() {
            let (lo, hi) = (lo + margin, hi - margin);
            if !(lo < hi) {
                continue;
            }
            for i in 0..grid.nx {
                let t = i as f64 / (grid.nx - 1) as f64;
                let x = lo * (1.0 - t) + hi * t;
                // Width must admit the stencil at x-margin and x+margin too.
                let w = self
                    .min_half_width(x)
                    .min(self.min_half_width(x - margin))
                    .min(self.min_half_width(x + margin))
                    - margin;
                if !(w > 0.0) {
                    continue;
                }
                for row in 0..grid.ny {
                    let y = w * ((row as f64 - half) / half);
                    out.push(GridPoint {
                        x,
                        y,
                        piece: ival_idx,
                    });
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyRegion { delta: self.delta });
        }
        Ok(out)
    }
}

/// Build the compact region `K_delta` over a family of domains.
pub fn omega_zero(specs: &[DomainSpec], delta: f64) -> Result<CompactRegion> {
    if specs.is_empty() {
        return Err(Error::InvalidParams("no domains given".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("delta = {delta} must be > 0")));
    }
    let points = &specs[0].params.points;
    for s in specs {
        if &s.params.points != points {
            return Err(Error::InvalidParams(
                "domains in a family must share marked heights".into(),
            ));
        }
    }
    let region = CompactRegion {
        specs: specs.to_vec(),
        delta,
    };
    if region.x_intervals().is_empty() {
        return Err(Error::EmptyRegion { delta });
    }
    Ok(region)
}
