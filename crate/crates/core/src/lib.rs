//! Numerical engine for a one-parameter family of embedded minimal disks whose
//! Gauss curvature concentrates at prescribed heights on the vertical axis.
//!
//! The surfaces are produced through the Weierstrass representation with
//! Gauss map `g = exp(i h(z))` and height differential `dz`, where
//!
//! ```text
//! h(z) = sum_j  arctan((z - b_j)/a) / (2^(j-1) a)
//! ```
//!
//! on a pinched strip domain around the real axis. As the pinch parameter `a`
//! shrinks, the curvature at the marked heights `b_j` grows like `a^-4` while
//! staying bounded away from them, and the surface splits into multi-valued
//! graphs spiraling into the planes `x3 = b_j`.
//!
//! The crate is organised around that pipeline:
//!
//! * [`holo`] — branch-consistent evaluation of `h`, its real/imaginary parts
//!   and its derivative;
//! * [`domain`] — the pinched strips, membership tests and sampling grids;
//! * [`immersion`] — path integration of the closed-form differential of the
//!   immersion;
//! * [`geometry`] — unit normal, Gauss curvature (two independent formulas)
//!   and curvature sweeps in `a`;
//! * [`verify`] — numerical certification of the embedding inequalities,
//!   convergence and spiraling estimates;
//! * [`mesh`] / [`export`] — structured surface meshes, OBJ/PLY writers and
//!   machine-readable reports.
//!
//! All evaluation is pure; batch entry points are data-parallel when the
//! `parallel` feature (default) is enabled and fall back to sequential loops
//! otherwise.

pub mod domain;
pub mod error;
pub mod export;
pub mod geometry;
pub mod holo;
pub mod immersion;
pub mod intersect;
pub mod mesh;
pub mod params;
pub mod quad;
pub mod verify;

mod util;

pub use error::{Error, Result};
pub use params::ConstructionParams;

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
