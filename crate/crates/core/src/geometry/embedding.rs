//! Self-intersection test and a reach estimate.

use rayon::prelude::*;

use crate::geometry::bvh::Bvh;
use crate::geometry::differential::vertex_normals;
use crate::geometry::{Cells, DiscreteSurface, Vec3};

#[derive(Clone, Debug)]
pub struct EmbeddingReport {
    pub embedded: bool,
    /// First intersecting pair of non-adjacent cells, if any.
    pub intersection: Option<(usize, usize)>,
    pub reach: f64,
}

/// Tests non-adjacent cell pairs for intersection and estimates the reach.
///
/// The reach at a vertex v is the radius of the largest ball tangent at v
/// (on either side) that contains no vertex outside the one-ring of v,
/// min_q |q − v|² / (2|⟨q − v, n_v⟩|); the estimate is the minimum over
/// vertices. Skipping the one-ring keeps the tilt of the discrete normal from
/// dominating the nearest neighbours. It equals R on a sphere of radius R and half the gap between
/// parallel sheets.
pub fn check_embedded(surface: &DiscreteSurface) -> EmbeddingReport {
    let intersection = first_intersection(surface);
    EmbeddingReport {
        embedded: intersection.is_none(),
        intersection,
        reach: reach_estimate(surface),
    }
}

pub fn reach_estimate(surface: &DiscreteSurface) -> f64 {
    let v = surface.vertices();
    let normals = vertex_normals(surface);
    let nb = surface.vertex_neighbors();
    (0..v.len())
        .into_par_iter()
        .map(|i| {
            let mut r = f64::INFINITY;
            for (j, q) in v.iter().enumerate() {
                if j == i || nb[i].contains(&j) {
                    continue;
                }
                let d = q - v[i];
                let h = d.dot(&normals[i]).abs();
                if h > 0.0 {
                    r = r.min(d.norm_squared() / (2.0 * h));
                }
            }
            r
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn first_intersection(surface: &DiscreteSurface) -> Option<(usize, usize)> {
    let v = surface.vertices();
    match surface.cells() {
        Cells::Triangles(tris) => {
            let bvh = Bvh::new(surface);
            (0..tris.len()).into_par_iter().find_map_first(|i| {
                let t = tris[i];
                let p = [v[t[0]], v[t[1]], v[t[2]]];
                let lo = p[0].inf(&p[1]).inf(&p[2]);
                let hi = p[0].sup(&p[1]).sup(&p[2]);
                let mut hit = None;
                bvh.for_each_overlapping(&lo, &hi, |j| {
                    if hit.is_some() || j <= i {
                        return;
                    }
                    let u = tris[j];
                    if t.iter().any(|a| u.contains(a)) {
                        return;
                    }
                    let q = [v[u[0]], v[u[1]], v[u[2]]];
                    if triangles_intersect(&p, &q) {
                        hit = Some((i, j));
                    }
                });
                hit
            })
        }
        Cells::Segments(segs) => {
            for i in 0..segs.len() {
                for j in i + 1..segs.len() {
                    let (s, t) = (segs[i], segs[j]);
                    if s.iter().any(|a| t.contains(a)) {
                        continue;
                    }
                    if segments_cross_2d(&v[s[0]], &v[s[1]], &v[t[0]], &v[t[1]]) {
                        return Some((i, j));
                    }
                }
            }
            None
        }
    }
}

/// True if any edge of one triangle crosses the other triangle.
pub fn triangles_intersect(p: &[Vec3; 3], q: &[Vec3; 3]) -> bool {
    (0..3).any(|k| segment_hits_triangle(&p[k], &p[(k + 1) % 3], q))
        || (0..3).any(|k| segment_hits_triangle(&q[k], &q[(k + 1) % 3], p))
}

fn segment_hits_triangle(a: &Vec3, b: &Vec3, t: &[Vec3; 3]) -> bool {
    // Möller–Trumbore restricted to the segment parameter range
    let dir = b - a;
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    let scale = e1.norm() * e2.norm() * dir.norm();
    if det.abs() <= 1e-14 * scale {
        return false;
    }
    let inv = 1.0 / det;
    let s = a - t[0];
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(&e1);
    let w = inv * dir.dot(&q);
    if w < 0.0 || u + w > 1.0 {
        return false;
    }
    let param = inv * e2.dot(&q);
    (0.0..=1.0).contains(&param)
}

fn segments_cross_2d(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> bool {
    let orient = |p: &Vec3, q: &Vec3, r: &Vec3| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}
