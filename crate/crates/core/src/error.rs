//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("evaluation within {dist:.3e} of the singular point ({re}, {im})")]
    NearPole { re: f64, im: f64, dist: f64 },

    #[error("path leaves the domain at segment {segment}")]
    PathOutsideDomain { segment: usize },

    #[error("quadrature did not reach tolerance {requested:.3e} (achieved {achieved:.3e})")]
    QuadratureNoConverge { requested: f64, achieved: f64 },

    #[error("compact region is empty: delta = {delta} exhausts the x-range")]
    EmptyRegion { delta: f64 },

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("unsupported mesh format {0:?} (expected obj, ply or ply-binary)")]
    UnsupportedFormat(String),

    #[error("malformed mesh file: {0}")]
    MalformedMesh(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
