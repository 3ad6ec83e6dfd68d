//! Run configuration: JSON file plus flag overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use weierstrass::domain::GridSpec;
use weierstrass::quad::QuadratureConfig;

fn default_nx() -> usize {
    200
}
fn default_ny() -> usize {
    41
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_ny")]
    pub ny: usize,
    #[serde(default)]
    pub clip: Option<[f64; 4]>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: default_nx(),
            ny: default_ny(),
            clip: None,
        }
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            clip: self.clip,
        }
    }
}

/// Full resolved configuration; serialized into every output for
/// reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Marked heights b_1 < ... < b_n.
    #[serde(default)]
    pub points: Vec<f64>,
    /// Pinch parameter.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quad: QuadratureConfig,
    /// Decreasing pinch values for sweeps.
    #[serde(default = "default_sweep")]
    pub sweep: Option<Vec<f64>>,
    /// Off-axis margin for curvature suprema and compact regions.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Assert the verify-time convergence difference against this tolerance.
    #[serde(default)]
    pub convergence_tolerance: Option<f64>,
    /// Clip generated meshes to the ball of radius min(r0/2, 1/4).
    #[serde(default)]
    pub clip: bool,
    /// Helicoid oracle mode.
    #[serde(default)]
    pub helicoid: bool,
    /// Use the half-gap split rule (comparison only).
    #[serde(default)]
    pub half_gap_splits: bool,
    /// Output paths by role (mesh, report, blowup_csv, convergence_csv,
    /// r0_csv).
    #[serde(default)]
    pub outputs: BTreeMap<String, PathBuf>,
}

fn default_delta() -> f64 {
    0.1
}

/// Finishes in seconds at the default grid sizes.
fn default_sweep() -> Option<Vec<f64>> {
    Some(vec![0.2, 0.1, 0.05, 0.025, 0.0125])
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            a: None,
            grid: GridConfig::default(),
            quad: QuadratureConfig::default(),
            sweep: default_sweep(),
            delta: default_delta(),
            convergence_tolerance: None,
            clip: false,
            helicoid: false,
            half_gap_splits: false,
            outputs: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn echo(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| "{}".into())
    }
}
