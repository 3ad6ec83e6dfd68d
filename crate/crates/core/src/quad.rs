//! Adaptive quadrature on real intervals.
//!
//! A 15-point Kronrod rule with its embedded 7-point Gauss rule supplies the
//! local error estimate; intervals whose estimate exceeds their share of the
//! tolerance budget are bisected, each half inheriting half the budget. The
//! estimate keys on the Gauss/Kronrod discrepancy of the integrand values
//! themselves, so regions where the integrand is large or rough are split
//! first regardless of interval length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// Identifier of the fixed rule driving the adaptive splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    #[default]
    GaussKronrod15,
}

/// Absolute-tolerance configuration for all path integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Absolute tolerance on each integral.
    pub abs_tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: u32,
    /// Fixed rule used on every subinterval.
    #[serde(default)]
    pub rule: QuadRule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 40,
            rule: QuadRule::GaussKronrod15,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "abs_tol = {} must be positive",
                self.abs_tol
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidGrid("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// Values an integrand may take: closed under the vector-space operations the
/// rule needs, with a norm for error estimates.
pub trait QuadValue: Copy + Send {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

impl QuadValue for [f64; 3] {
    fn zero() -> Self {
        [0.0; 3]
    }
    fn add(self, o: Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
    fn sub(self, o: Self) -> Self {
        [self[0] - o[0], self[1] - o[1], self[2] - o[2]]
    }
    fn scale(self, s: f64) -> Self {
        [self[0] * s, self[1] * s, self[2] * s]
    }
    fn norm(self) -> f64 {
        (self[0] * self[0] + self[1] * self[1] + self[2] * self[2]).sqrt()
    }
}

// Kronrod-15 abscissae on [-1, 1] (positive half) and weights; the embedded
// Gauss-7 rule uses every other abscissa. Tabulated beyond f64 precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-7/Kronrod-15 evaluation over `[lo, hi]`.
///
/// Returns the Kronrod value and `|K15 - G7|` as the error estimate.
fn gk15<V: QuadValue>(f: &impl Fn(f64) -> V, lo: f64, hi: f64) -> (V, f64) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (lo + hi);

    let mut kronrod = V::zero();
    let mut gauss = V::zero();

    // Gauss-7 nodes are the odd-indexed Kronrod abscissae (including the
    // midpoint at i = 7).
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let contrib = if i == 7 {
            f(mid)
        } else {
            f(mid - half * x).add(f(mid + half * x))
        };
        kronrod = kronrod.add(contrib.scale(wk));
        if i % 2 == 1 {
            gauss = gauss.add(contrib.scale(WG[i / 2]));
        }
    }

    let kron = kronrod.scale(half);
    let gau = gauss.scale(half);
    (kron, kron.sub(gau).norm())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V> {
    pub value: V,
    /// Sum of per-interval error estimates.
    pub error: f64,
    /// Number of subintervals in the final partition.
    pub intervals: usize,
}

/// Integrate `f` over `[lo, hi]` (either orientation) to absolute tolerance.
///
/// Errors with [`Error::QuadratureNoConverge`] if the budget cannot be met
/// within `max_depth` bisections; the achieved error is reported.
pub fn integrate<V: QuadValue>(
    f: impl Fn(f64) -> V,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult<V>> {
    if lo == hi {
        return Ok(QuadResult {
            value: V::zero(),
            error: 0.0,
            intervals: 0,
        });
    }
    let (a, b, sign) = if lo <= hi {
        (lo, hi, 1.0)
    } else {
        (hi, lo, -1.0)
    };

    let mut value = V::zero();
    let mut error = 0.0f64;
    let mut intervals = 0usize;
    // Depth-first stack of (lo, hi, tol, depth).
    let mut stack = vec![(a, b, cfg.abs_tol, 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        if e <= tol || depth >= cfg.max_depth {
            value = value.add(v);
            error += e;
            intervals += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * tol, depth + 1));
            stack.push((mid, hi, 0.5 * tol, depth + 1));
        }
    }

    if error > cfg.abs_tol {
        return Err(Error::QuadratureNoConverge {
            requested: cfg.abs_tol,
            achieved: error,
        });
    }
    Ok(QuadResult {
        value: value.scale(sign),
        error,
        intervals,
    })
}
