//! Self-intersection detection for triangle meshes.
//!
//! Broad phase: an axis-aligned bounding-box tree over triangles, median
//! split on the longest centroid axis. Narrow phase: the interval-overlap
//! triangle-triangle test (including the coplanar case, needed to catch
//! flattened-projection faults). Pairs sharing a vertex *position* are
//! skipped — structured strips meet along seam columns with duplicated
//! vertices, and those contacts are adjacency, not intersection.

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;
use crate::util::map_slice;

type P3 = [f64; 3];

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: P3) -> f64 {
    dot(a, a).sqrt()
}

/// Classification epsilon relative to the triangle pair's scale.
const EPS: f64 = 1e-12;

/// Interval of the triangle along the plane-intersection line.
///
/// `dist` are signed distances of the three vertices to the other plane,
/// `proj` their projections onto the line direction. Requires mixed signs.
fn interval(dist: [f64; 3], proj: [f64; 3]) -> Option<(f64, f64)> {
    // Find the vertex alone on its side (or on the plane).
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let side_i = dist[i];
        let opposite = dist[j] * side_i <= 0.0 && dist[k] * side_i <= 0.0;
        if opposite && side_i != 0.0 {
            let t1 = proj[j] + (proj[i] - proj[j]) * dist[j] / (dist[j] - dist[i]);
            let t2 = proj[k] + (proj[i] - proj[k]) * dist[k] / (dist[k] - dist[i]);
            return Some((t1.min(t2), t1.max(t2)));
        }
    }
    // All on one plane-side touching at isolated zeros; treat the zero
    // vertices' projections as a degenerate interval.
    let zeros: Vec<f64> = (0..3).filter(|&i| dist[i] == 0.0).map(|i| proj[i]).collect();
    match zeros.len() {
        0 => None,
        _ => {
            let lo = zeros.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = zeros.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some((lo, hi))
        }
    }
}

fn point_in_tri_2d(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let sign = |p1: [f64; 2], p2: [f64; 2], p3: [f64; 2]| {
        (p1[0] - p3[0]) * (p2[1] - p3[1]) - (p2[0] - p3[0]) * (p1[1] - p3[1])
    };
    let d1 = sign(p, a, b);
    let d2 = sign(p, b, c);
    let d3 = sign(p, c, a);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

fn segments_intersect_2d(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> bool {
    let d = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let d1 = d(q0, q1, p0);
    let d2 = d(q0, q1, p1);
    let d3 = d(p0, p1, q0);
    let d4 = d(p0, p1, q1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn coplanar_overlap(t1: [P3; 3], t2: [P3; 3], n: P3) -> bool {
    // Project out the dominant normal axis.
    let axis = if n[0].abs() >= n[1].abs() && n[0].abs() >= n[2].abs() {
        0
    } else if n[1].abs() >= n[2].abs() {
        1
    } else {
        2
    };
    let flat = |p: P3| -> [f64; 2] {
        match axis {
            0 => [p[1], p[2]],
            1 => [p[0], p[2]],
            _ => [p[0], p[1]],
        }
    };
    let a: Vec<[f64; 2]> = t1.iter().map(|&p| flat(p)).collect();
    let b: Vec<[f64; 2]> = t2.iter().map(|&p| flat(p)).collect();
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    a.iter().any(|&p| point_in_tri_2d(p, b[0], b[1], b[2]))
        || b.iter().any(|&p| point_in_tri_2d(p, a[0], a[1], a[2]))
}

/// Interval-overlap triangle-triangle intersection test.
pub fn tri_tri_intersect(t1: [P3; 3], t2: [P3; 3]) -> bool {
    let n2 = cross(sub(t2[1], t2[0]), sub(t2[2], t2[0]));
    let scale = norm(n2).max(1e-300);
    let mut d1 = [0.0; 3];
    for i in 0..3 {
        let d = dot(n2, sub(t1[i], t2[0])) / scale;
        d1[i] = if d.abs() < EPS { 0.0 } else { d };
    }
    if d1.iter().all(|&d| d > 0.0) || d1.iter().all(|&d| d < 0.0) {
        return false;
    }

    let n1 = cross(sub(t1[1], t1[0]), sub(t1[2], t1[0]));
    let scale1 = norm(n1).max(1e-300);
    let mut d2 = [0.0; 3];
    for i in 0..3 {
        let d = dot(n1, sub(t2[i], t1[0])) / scale1;
        d2[i] = if d.abs() < EPS { 0.0 } else { d };
    }
    if d2.iter().all(|&d| d > 0.0) || d2.iter().all(|&d| d < 0.0) {
        return false;
    }

    if d1 == [0.0; 3] {
        return coplanar_overlap(t1, t2, n1);
    }

    // Direction of the plane-intersection line; project onto its dominant
    // axis for the interval test.
    let dir = cross(n1, n2);
    let axis = if dir[0].abs() >= dir[1].abs() && dir[0].abs() >= dir[2].abs() {
        0
    } else if dir[1].abs() >= dir[2].abs() {
        1
    } else {
        2
    };
    let p1 = [t1[0][axis], t1[1][axis], t1[2][axis]];
    let p2 = [t2[0][axis], t2[1][axis], t2[2][axis]];

    let (lo1, hi1) = match interval(d1, p1) {
        Some(iv) => iv,
        None => return false,
    };
    let (lo2, hi2) = match interval(d2, p2) {
        Some(iv) => iv,
        None => return false,
    };
    lo1.max(lo2) < hi1.min(hi2) - EPS
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: P3,
    max: P3,
}

impl Aabb {
    fn of_triangle(t: &[P3; 3]) -> Self {
        let mut min = t[0];
        let mut max = t[0];
        for p in &t[1..] {
            for c in 0..3 {
                min[c] = min[c].min(p[c]);
                max[c] = max[c].max(p[c]);
            }
        }
        Self { min, max }
    }

    fn merge(&self, other: &Aabb) -> Aabb {
        let mut min = self.min;
        let mut max = self.max;
        for c in 0..3 {
            min[c] = min[c].min(other.min[c]);
            max[c] = max[c].max(other.max[c]);
        }
        Aabb { min, max }
    }

    fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|c| self.min[c] <= other.max[c] && self.max[c] >= other.min[c])
    }
}

struct Node {
    aabb: Aabb,
    /// Child node indices, or `usize::MAX` markers for leaves.
    left: usize,
    right: usize,
    /// Leaf range into `order`.
    start: usize,
    count: usize,
}

/// Bounding-box tree over a triangle soup.
pub struct TriBvh {
    tris: Vec<[P3; 3]>,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

const LEAF_SIZE: usize = 8;

impl TriBvh {
    pub fn build(tris: Vec<[P3; 3]>) -> Self {
        let boxes: Vec<Aabb> = tris.iter().map(Aabb::of_triangle).collect();
        let centroids: Vec<P3> = tris
            .iter()
            .map(|t| {
                [
                    (t[0][0] + t[1][0] + t[2][0]) / 3.0,
                    (t[0][1] + t[1][1] + t[2][1]) / 3.0,
                    (t[0][2] + t[1][2] + t[2][2]) / 3.0,
                ]
            })
            .collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            Self::split(&boxes, &centroids, &mut order, 0, tris.len(), &mut nodes);
        }
        Self { tris, nodes, order }
    }

    fn split(
        boxes: &[Aabb],
        centroids: &[P3],
        order: &mut [usize],
        start: usize,
        count: usize,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let slice = &order[start..start + count];
        let mut aabb = boxes[slice[0]];
        for &t in &slice[1..] {
            aabb = aabb.merge(&boxes[t]);
        }
        let me = nodes.len();
        nodes.push(Node {
            aabb,
            left: usize::MAX,
            right: usize::MAX,
            start,
            count,
        });
        if count <= LEAF_SIZE {
            return me;
        }
        // Longest axis of the centroid spread.
        let mut lo = centroids[slice[0]];
        let mut hi = lo;
        for &t in &slice[1..] {
            for c in 0..3 {
                lo[c] = lo[c].min(centroids[t][c]);
                hi[c] = hi[c].max(centroids[t][c]);
            }
        }
        let spans = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
        let axis = if spans[0] >= spans[1] && spans[0] >= spans[2] {
            0
        } else if spans[1] >= spans[2] {
            1
        } else {
            2
        };
        let mid = count / 2;
        order[start..start + count].select_nth_unstable_by(mid, |&a, &b| {
            centroids[a][axis]
                .partial_cmp(&centroids[b][axis])
                .unwrap()
        });
        let left = Self::split(boxes, centroids, order, start, mid, nodes);
        let right = Self::split(boxes, centroids, order, start + mid, count - mid, nodes);
        nodes[me].left = left;
        nodes[me].right = right;
        nodes[me].start = 0;
        nodes[me].count = 0;
        me
    }

    fn is_leaf(&self, n: usize) -> bool {
        self.nodes[n].count > 0
    }

    /// Candidate pairs (i < j) whose boxes overlap.
    pub fn overlap_candidates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        self.descend_self(0, &mut out);
        out
    }

    fn descend_self(&self, n: usize, out: &mut Vec<(usize, usize)>) {
        if self.is_leaf(n) {
            let node = &self.nodes[n];
            for i in node.start..node.start + node.count {
                for j in i + 1..node.start + node.count {
                    out.push((self.order[i], self.order[j]));
                }
            }
            return;
        }
        let (l, r) = (self.nodes[n].left, self.nodes[n].right);
        self.descend_self(l, out);
        self.descend_self(r, out);
        self.descend_pair(l, r, out);
    }

    fn descend_pair(&self, a: usize, b: usize, out: &mut Vec<(usize, usize)>) {
        if !self.nodes[a].aabb.overlaps(&self.nodes[b].aabb) {
            return;
        }
        match (self.is_leaf(a), self.is_leaf(b)) {
            (true, true) => {
                let (na, nb) = (&self.nodes[a], &self.nodes[b]);
                for i in na.start..na.start + na.count {
                    for j in nb.start..nb.start + nb.count {
                        let (ti, tj) = (self.order[i], self.order[j]);
                        out.push((ti.min(tj), ti.max(tj)));
                    }
                }
            }
            (false, true) => {
                self.descend_pair(self.nodes[a].left, b, out);
                self.descend_pair(self.nodes[a].right, b, out);
            }
            _ => {
                self.descend_pair(a, self.nodes[b].left, out);
                self.descend_pair(a, self.nodes[b].right, out);
            }
        }
    }
}

/// Outcome of a self-intersection scan.
#[derive(Debug, Clone)]
pub struct IntersectionReport {
    /// Intersecting non-adjacent triangle index pairs.
    pub pairs: Vec<(usize, usize)>,
    /// Narrow-phase tests performed (after broad-phase pruning).
    pub tested: usize,
}

impl IntersectionReport {
    pub fn is_embedded(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Scan a raw triangle soup. `positions` are welded by exact bit equality to
/// derive adjacency, so seam-duplicated vertices do not produce false hits.
pub fn self_intersections_raw(
    positions: &[[f64; 3]],
    triangles: &[[u32; 3]],
) -> Result<IntersectionReport> {
    // Weld identical positions to one id.
    let mut weld: std::collections::HashMap<[u64; 3], u32> = std::collections::HashMap::new();
    let mut welded_id = vec![0u32; positions.len()];
    for (i, p) in positions.iter().enumerate() {
        let key = [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()];
        let next = weld.len() as u32;
        let id = *weld.entry(key).or_insert(next);
        welded_id[i] = id;
    }

    let tris: Vec<[P3; 3]> = triangles
        .iter()
        .map(|t| {
            [
                positions[t[0] as usize],
                positions[t[1] as usize],
                positions[t[2] as usize],
            ]
        })
        .collect();

    for (i, t) in tris.iter().enumerate() {
        let area2 = norm(cross(sub(t[1], t[0]), sub(t[2], t[0])));
        if area2 <= 1e-300 {
            return Err(Error::DegenerateMesh(format!(
                "triangle {i} has zero area"
            )));
        }
    }

    let welded_tris: Vec<[u32; 3]> = triangles
        .iter()
        .map(|t| {
            [
                welded_id[t[0] as usize],
                welded_id[t[1] as usize],
                welded_id[t[2] as usize],
            ]
        })
        .collect();

    let bvh = TriBvh::build(tris);
    let mut candidates = bvh.overlap_candidates();
    candidates.sort_unstable();
    candidates.dedup();
    candidates.retain(|&(i, j)| {
        let (a, b) = (welded_tris[i], welded_tris[j]);
        !a.iter().any(|v| b.contains(v))
    });

    let tested = candidates.len();
    let hits = map_slice(&candidates, |&(i, j)| {
        tri_tri_intersect(bvh.tris[i], bvh.tris[j]).then_some((i, j))
    });
    let pairs: Vec<(usize, usize)> = hits.into_iter().flatten().collect();
    Ok(IntersectionReport { pairs, tested })
}

/// Scan a surface mesh.
pub fn self_intersections(mesh: &SurfaceMesh) -> Result<IntersectionReport> {
    let positions: Vec<[f64; 3]> = mesh.vertices.iter().map(|v| v.position).collect();
    self_intersections_raw(&positions, &mesh.triangles)
}
