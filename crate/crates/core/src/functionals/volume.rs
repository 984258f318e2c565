//! Area growth sup_{x,R} μ(B_R(x))/Rⁿ.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::bvh::closest_point_on_triangle;
use crate::geometry::{Cells, Vec3, WeightedSurfaceMeasure};

/// Subdivision depth for cells cut by the sphere ∂B_R(x).
const CLIP_DEPTH: u32 = 5;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VolumeGrowth {
    pub value: f64,
    pub center: [f64; 3],
    pub radius: f64,
}

/// μ(B_R(x)). Cells inside the ball count fully, cells outside not at all,
/// and cut cells are split recursively, the last level by the fraction of
/// corners and centroid inside.
pub fn ball_mass(measure: &WeightedSurfaceMeasure, x: &Vec3, radius: f64) -> f64 {
    let r2 = radius * radius;
    let mut total = 0.0;
    for (s, m) in measure.components() {
        let v = s.vertices();
        let mut mass = 0.0;
        match s.cells() {
            Cells::Triangles(tris) => {
                for t in tris {
                    mass += clipped_triangle(x, r2, [v[t[0]], v[t[1]], v[t[2]]], CLIP_DEPTH);
                }
            }
            Cells::Segments(segs) => {
                for sg in segs {
                    mass += clipped_segment(x, radius, &v[sg[0]], &v[sg[1]]);
                }
            }
        }
        total += *m as f64 * mass;
    }
    total
}

fn clipped_triangle(x: &Vec3, r2: f64, p: [Vec3; 3], depth: u32) -> f64 {
    let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    let inside = p.iter().filter(|q| (*q - x).norm_squared() <= r2).count();
    if inside == 3 {
        return area;
    }
    let (c, _) = closest_point_on_triangle(x, &p[0], &p[1], &p[2]);
    if (c - x).norm_squared() > r2 {
        return 0.0;
    }
    if depth == 0 {
        let centroid = (p[0] + p[1] + p[2]) / 3.0;
        let hits = inside + 2 * usize::from((centroid - x).norm_squared() <= r2);
        return area * hits as f64 / 5.0;
    }
    let m = [(p[0] + p[1]) / 2.0, (p[1] + p[2]) / 2.0, (p[2] + p[0]) / 2.0];
    clipped_triangle(x, r2, [p[0], m[0], m[2]], depth - 1)
        + clipped_triangle(x, r2, [m[0], p[1], m[1]], depth - 1)
        + clipped_triangle(x, r2, [m[2], m[1], p[2]], depth - 1)
        + clipped_triangle(x, r2, [m[0], m[1], m[2]], depth - 1)
}

/// Exact length of a segment inside a ball.
fn clipped_segment(x: &Vec3, r: f64, a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let len = d.norm();
    let f = a - x;
    // |f + s d|² = r² for s in [0, 1]
    let (qa, qb, qc) = (d.norm_squared(), 2.0 * f.dot(&d), f.norm_squared() - r * r);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let s0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let s1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    (s1 - s0).max(0.0) * len
}

/// Supremum of μ(B_R(x))/Rⁿ over the given centers and (ascending) radii.
/// The ratio jumps when the sphere ∂B_R(x) sweeps past a sheet, so each
/// center's best radius is refined on a fine grid between its neighbours.
pub fn volume_growth_over(measure: &WeightedSurfaceMeasure, centers: &[Vec3], radii: &[f64]) -> VolumeGrowth {
    let n = measure.dimension() as i32;
    let ratio = |c: &Vec3, r: f64| ball_mass(measure, c, r) / r.powi(n);
    let per_center: Vec<(f64, f64)> = centers
        .par_iter()
        .map(|c| {
            let coarse: Vec<f64> = radii.iter().map(|&r| ratio(c, r)).collect();
            let j = argmax(&coarse);
            let lo = radii[j.saturating_sub(1)];
            let hi = radii[(j + 1).min(radii.len() - 1)];
            let mut best = (coarse[j], radii[j]);
            for k in 0..=REFINE {
                let r = lo + (hi - lo) * k as f64 / REFINE as f64;
                let v = ratio(c, r);
                if v > best.0 {
                    best = (v, r);
                }
            }
            best
        })
        .collect();
    let values: Vec<f64> = per_center.iter().map(|p| p.0).collect();
    let i = argmax(&values);
    VolumeGrowth {
        value: per_center[i].0,
        center: centers[i].into(),
        radius: per_center[i].1,
    }
}

const REFINE: usize = 64;

/// First index of the maximum.
fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) })
        .0
}

/// Supremum over the centroid and up to 64 vertices, with 24 log-spaced
/// radii from the shortest edge to twice the diameter.
pub fn volume_growth(measure: &WeightedSurfaceMeasure) -> Result<VolumeGrowth> {
    if measure.is_empty() {
        return Err(Error::domain("volume growth of an empty measure"));
    }
    let all: Vec<Vec3> = measure
        .components()
        .iter()
        .flat_map(|(s, _)| s.vertices().iter().copied())
        .collect();
    let stride = all.len().div_ceil(64).max(1);
    let mut centers = vec![measure.centroid()];
    centers.extend(all.iter().step_by(stride));
    let (lo, hi) = measure.bounding_box();
    let r_min = measure
        .components()
        .iter()
        .map(|(s, _)| s.min_edge_length())
        .fold(f64::INFINITY, f64::min);
    let r_max = 2.0 * (hi - lo).norm();
    let radii: Vec<f64> = (0..24)
        .map(|k| r_min * (r_max / r_min).powf(k as f64 / 23.0))
        .collect();
    Ok(volume_growth_over(measure, &centers, &radii))
}
