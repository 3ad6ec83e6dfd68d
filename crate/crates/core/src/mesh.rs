//! Structured surface meshes over the immersion.
//!
//! Each domain piece becomes one structured strip: `nx` columns, `ny` rows
//! per column, two triangles per grid cell, oriented so the triangle normal
//! agrees with the analytic unit normal (the frame `dF/dx x dF/dy`). Vertex
//! positions are the immersion values bit-for-bit; the only geometry-altering
//! step is optional clipping to a centered ball, which subdivides crossing
//! triangles at the sphere.

use serde::{Deserialize, Serialize};

use crate::domain::{grid_columns, GridColumn, GridSpec};
use crate::error::Result;
use crate::holo::HoloData;
use crate::immersion::Engine;
use crate::params::ConstructionParams;
use crate::quad::QuadratureConfig;
use crate::util::map_slice;
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshVertex {
    /// Position in R^3 (exactly the immersion value).
    pub position: [f64; 3],
    /// Domain point (x, y) that produced it.
    pub domain: [f64; 2],
    /// Domain piece index.
    pub piece: usize,
    /// Spiral phase of the vertex's column: `u(x, 0)`. Drives the
    /// sheet/angle decomposition of the near-axis multi-valued graphs.
    pub u_axis: f64,
}

/// Inputs echoed into every mesh for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshProvenance {
    /// Construction parameters, absent in helicoid mode.
    pub params: Option<ConstructionParams>,
    pub grid: GridSpec,
    pub quad: QuadratureConfig,
    /// Ball radius applied by clipping, if any.
    pub clip_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub vertices: Vec<MeshVertex>,
    pub triangles: Vec<[u32; 3]>,
    pub provenance: MeshProvenance,
}

impl SurfaceMesh {
    /// Geometric normal of triangle `t` (not normalized).
    pub fn triangle_normal(&self, t: usize) -> [f64; 3] {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (
            self.vertices[i as usize].position,
            self.vertices[j as usize].position,
            self.vertices[k as usize].position,
        );
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    }

    /// Domain centroid of triangle `t`.
    pub fn triangle_domain_centroid(&self, t: usize) -> Complex {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (
            self.vertices[i as usize].domain,
            self.vertices[j as usize].domain,
            self.vertices[k as usize].domain,
        );
        Complex::new((a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0)
    }
}

fn rect_columns(x_range: (f64, f64), y_range: (f64, f64), grid: &GridSpec) -> Vec<GridColumn> {
    (0..grid.nx)
        .map(|i| {
            let t = i as f64 / (grid.nx - 1) as f64;
            let x = x_range.0 * (1.0 - t) + x_range.1 * t;
            let ys = (0..grid.ny)
                .map(|row| {
                    let s = row as f64 / (grid.ny - 1) as f64;
                    y_range.0 * (1.0 - s) + y_range.1 * s
                })
                .collect();
            GridColumn { x, piece: 0, ys }
        })
        .collect()
}

fn build_from_columns<H: HoloData>(
    engine: &Engine<'_, H>,
    cols: Vec<GridColumn>,
    grid: &GridSpec,
    provenance: MeshProvenance,
) -> Result<SurfaceMesh> {
    // One batch per column (parallel over columns); the axis anchor of each
    // column is shared exactly as in eval_batch.
    let evaluated = map_slice(&cols, |col| -> Result<Vec<MeshVertex>> {
        let zs: Vec<Complex> = col.ys.iter().map(|&y| Complex::new(col.x, y)).collect();
        let samples = engine.eval_batch(&zs)?;
        let u_axis = engine.data().h(Complex::new(col.x, 0.0))?.re;
        Ok(samples
            .iter()
            .map(|s| MeshVertex {
                position: s.f,
                domain: [s.z.re, s.z.im],
                piece: col.piece,
                u_axis,
            })
            .collect())
    });

    let mut vertices = Vec::with_capacity(cols.len() * grid.ny);
    for col in evaluated {
        vertices.extend(col?);
    }

    // Strips: columns of one piece are contiguous, nx columns each.
    let mut triangles = Vec::new();
    let pieces = cols.len() / grid.nx;
    for k in 0..pieces {
        let base = (k * grid.nx * grid.ny) as u32;
        for i in 0..(grid.nx - 1) as u32 {
            for row in 0..(grid.ny - 1) as u32 {
                let v00 = base + i * grid.ny as u32 + row;
                let v10 = base + (i + 1) * grid.ny as u32 + row;
                let v01 = v00 + 1;
                let v11 = v10 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
    }

    Ok(SurfaceMesh {
        vertices,
        triangles,
        provenance,
    })
}

/// Build the structured mesh of the immersion over its domain.
pub fn build_mesh(
    params: &ConstructionParams,
    grid: &GridSpec,
    quad: &QuadratureConfig,
) -> Result<SurfaceMesh> {
    let spec = crate::domain::build_domain(params)?;
    build_mesh_on(&spec, grid, quad)
}

/// Build over an explicit domain (e.g. one with the alternate split rule).
pub fn build_mesh_on(
    spec: &crate::domain::DomainSpec,
    grid: &GridSpec,
    quad: &QuadratureConfig,
) -> Result<SurfaceMesh> {
    grid.validate()?;
    quad.validate()?;
    let data = crate::holo::ArctanSum::new(&spec.params)?;
    let engine = Engine::new(&data, *quad).with_domain(spec);
    let cols = grid_columns(spec, grid)?;
    build_from_columns(
        &engine,
        cols,
        grid,
        MeshProvenance {
            params: Some(spec.params.clone()),
            grid: grid.clone(),
            quad: *quad,
            clip_radius: None,
        },
    )
}

/// Build a helicoid mesh over a rectangle (the quadrature oracle surface).
pub fn build_helicoid_mesh(
    x_range: (f64, f64),
    y_range: (f64, f64),
    grid: &GridSpec,
    quad: &QuadratureConfig,
) -> Result<SurfaceMesh> {
    grid.validate()?;
    quad.validate()?;
    let data = crate::holo::Helicoid;
    let engine = Engine::new(&data, *quad);
    let cols = rect_columns(x_range, y_range, grid);
    build_from_columns(
        &engine,
        cols,
        grid,
        MeshProvenance {
            params: None,
            grid: grid.clone(),
            quad: *quad,
            clip_radius: None,
        },
    )
}

fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn lerp_vertex(a: &MeshVertex, b: &MeshVertex, t: f64) -> MeshVertex {
    MeshVertex {
        position: [
            a.position[0] + t * (b.position[0] - a.position[0]),
            a.position[1] + t * (b.position[1] - a.position[1]),
            a.position[2] + t * (b.position[2] - a.position[2]),
        ],
        domain: [
            a.domain[0] + t * (b.domain[0] - a.domain[0]),
            a.domain[1] + t * (b.domain[1] - a.domain[1]),
        ],
        piece: a.piece,
        u_axis: a.u_axis + t * (b.u_axis - a.u_axis),
    }
}

/// Parameter `t` on segment `a + t (b - a)` where it crosses `|p| = r`,
/// given that exactly one endpoint is inside.
fn sphere_crossing(a: [f64; 3], b: [f64; 3], r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let aa = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let ab = a[0] * d[0] + a[1] * d[1] + a[2] * d[2];
    let ac = a[0] * a[0] + a[1] * a[1] + a[2] * a[2] - r * r;
    let disc = (ab * ab - aa * ac).max(0.0);
    let t1 = (-ab + disc.sqrt()) / aa;
    let t2 = (-ab - disc.sqrt()) / aa;
    if (0.0..=1.0).contains(&t1) {
        t1
    } else {
        t2.clamp(0.0, 1.0)
    }
}

/// Clip the mesh to the centered ball of radius `r`.
///
/// Triangles fully inside are kept, fully outside dropped, and crossing
/// triangles subdivided at the sphere so no kept vertex leaves the ball.
pub fn clip_to_ball(mesh: &SurfaceMesh, r: f64) -> SurfaceMesh {
    let mut vertices = mesh.vertices.clone();
    let mut triangles: Vec<[u32; 3]> = Vec::with_capacity(mesh.triangles.len());

    for tri in &mesh.triangles {
        let inside: Vec<bool> = tri
            .iter()
            .map(|&i| norm3(vertices[i as usize].position) <= r)
            .collect();
        let count = inside.iter().filter(|b| **b).count();
        match count {
            3 => triangles.push(*tri),
            0 => {}
            _ => {
                // Rotate so the inside vertices come first.
                let mut idx = [tri[0], tri[1], tri[2]];
                let mut ins = [inside[0], inside[1], inside[2]];
                for _ in 0..3 {
                    let good = if count == 1 {
                        ins[0] && !ins[1] && !ins[2]
                    } else {
                        ins[0] && ins[1] && !ins[2]
                    };
                    if good {
                        break;
                    }
                    idx.rotate_left(1);
                    ins.rotate_left(1);
                }
                let va = vertices[idx[0] as usize];
                let vb = vertices[idx[1] as usize];
                let vc = vertices[idx[2] as usize];
                if count == 1 {
                    // a inside; cut edges ab and ac.
                    let tb = sphere_crossing(va.position, vb.position, r);
                    let tc = sphere_crossing(va.position, vc.position, r);
                    let nb = lerp_vertex(&va, &vb, tb);
                    let nc = lerp_vertex(&va, &vc, tc);
                    let ib = vertices.len() as u32;
                    vertices.push(nb);
                    let ic = vertices.len() as u32;
                    vertices.push(nc);
                    triangles.push([idx[0], ib, ic]);
                } else {
                    // a, b inside; cut edges bc and ca.
                    let tb = sphere_crossing(vb.position, vc.position, r);
                    let ta = sphere_crossing(va.position, vc.position, r);
                    let nb = lerp_vertex(&vb, &vc, tb);
                    let na = lerp_vertex(&va, &vc, ta);
                    let ib = vertices.len() as u32;
                    vertices.push(nb);
                    let ia = vertices.len() as u32;
                    vertices.push(na);
                    triangles.push([idx[0], idx[1], ib]);
                    triangles.push([idx[0], ib, ia]);
                }
            }
        }
    }

    // Drop vertices no longer referenced, preserving order.
    let mut used = vec![false; vertices.len()];
    for t in &triangles {
        for &i in t {
            used[i as usize] = true;
        }
    }
    let mut remap = vec![u32::MAX; vertices.len()];
    let mut kept = Vec::new();
    for (i, v) in vertices.into_iter().enumerate() {
        if used[i] {
            remap[i] = kept.len() as u32;
            kept.push(v);
        }
    }
    for t in &mut triangles {
        for i in t.iter_mut() {
            *i = remap[*i as usize];
        }
    }

    SurfaceMesh {
        vertices: kept,
        triangles,
        provenance: MeshProvenance {
            clip_radius: Some(r),
            ..mesh.provenance.clone()
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn helicoid_strip_is_structured() {
        let grid = GridSpec::new(32, 33);
        let mesh = build_helicoid_mesh((-1.0, 1.0), (-1.0, 1.0), &grid, &quad()).unwrap();
        assert_eq!(mesh.vertices.len(), 32 * 33);
        assert_eq!(mesh.triangles.len(), 2 * 31 * 32);
        for t in 0..mesh.triangles.len() {
            let n = mesh.triangle_normal(t);
            assert!(norm3(n) > 0.0, "degenerate triangle {t}");
        }
    }

    #[test]
    fn vertex_count_matches_grid_before_clipping() {
        let params = ConstructionParams::new(vec![-0.2, 0.2], 0.1).unwrap();
        let grid = GridSpec::new(24, 9);
        let mesh = build_mesh(&params, &grid, &quad()).unwrap();
        let pts =
            crate::domain::sample_grid(&crate::domain::build_domain(&params).unwrap(), &grid)
                .unwrap();
        assert_eq!(mesh.vertices.len(), pts.len());
    }

    #[test]
    fn positions_match_engine_bit_for_bit() {
        let params = ConstructionParams::new(vec![0.0], 0.1).unwrap();
        let grid = GridSpec::new(16, 7);
        let mesh = build_mesh(&params, &grid, &quad()).unwrap();
        let spec = crate::domain::build_domain(&params).unwrap();
        let data = crate::holo::ArctanSum::new(&params).unwrap();
        let engine = Engine::new(&data, quad()).with_domain(&spec);
        for v in mesh.vertices.iter().step_by(11) {
            let col: Vec<Complex> = mesh
                .vertices
                .iter()
                .filter(|w| w.domain[0] == v.domain[0])
                .map(|w| Complex::new(w.domain[0], w.domain[1]))
                .collect();
            let batch = engine.eval_batch(&col).unwrap();
            let mine = batch
                .iter()
                .find(|s| s.z.im == v.domain[1])
                .expect("column point");
            assert_eq!(mine.f, v.position);
        }
    }

    #[test]
    fn clip_keeps_vertices_inside_ball() {
        let params = ConstructionParams::new(vec![0.0], 0.1).unwrap();
        let grid = GridSpec::new(48, 11);
        let mesh = build_mesh(&params, &grid, &quad()).unwrap();
        let r = 0.25;
        let clipped = clip_to_ball(&mesh, r);
        assert!(!clipped.triangles.is_empty());
        assert!(!clipped.vertices.is_empty());
        for v in &clipped.vertices {
            assert!(
                norm3(v.position) <= r + 1e-9,
                "vertex outside ball: {:?}",
                v.position
            );
        }
        assert_eq!(clipped.provenance.clip_radius, Some(r));
    }

    #[test]
    fn clip_noop_when_ball_contains_mesh() {
        let grid = GridSpec::new(8, 5);
        let mesh = build_helicoid_mesh((-0.2, 0.2), (-0.2, 0.2), &grid, &quad()).unwrap();
        let clipped = clip_to_ball(&mesh, 10.0);
        assert_eq!(clipped.triangles.len(), mesh.triangles.len());
        assert_eq!(clipped.vertices.len(), mesh.vertices.len());
    }

    #[test]
    fn orientation_matches_analytic_normal() {
        use crate::geometry::curvature_at;
        let params = ConstructionParams::new(vec![0.0], 0.2).unwrap();
        let grid = GridSpec::new(64, 17);
        let mesh = build_mesh(&params, &grid, &quad()).unwrap();
        let data = crate::holo::ArctanSum::new(&params).unwrap();
        let mut aligned = 0usize;
        for t in 0..mesh.triangles.len() {
            let n = mesh.triangle_normal(t);
            let c = curvature_at(&data, mesh.triangle_domain_centroid(t)).unwrap();
            let dot = n[0] * c.normal[0] + n[1] * c.normal[1] + n[2] * c.normal[2];
            if dot > 0.0 {
                aligned += 1;
            }
        }
        let frac = aligned as f64 / mesh.triangles.len() as f64;
        assert!(frac >= 0.999, "only {frac} aligned");
    }
}
