//! Inscribed-ball lower bound on the extinction time. A ball B_γ(x) inside
//! the region bounded by M shrinks to a point at time γ²/(2n); by avoidance
//! the flow of M cannot vanish earlier.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::bvh::{winding_number, Bvh};
use crate::geometry::{DiscreteSurface, Vec3};

/// Grid points per axis for the initial sampling.
const GRID: usize = 20;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExtinctionBound {
    /// Radius of the inscribed ball.
    pub gamma: f64,
    pub center: [f64; 3],
    /// γ²/(2n).
    pub delta: f64,
}

/// Interior means generalized winding number above ½; the distance to the
/// surface is maximized over a grid and then by compass search.
pub fn extinction_lower_bound(surface: &DiscreteSurface) -> Result<ExtinctionBound> {
    surface.require_surface()?;
    let bvh = Bvh::new(surface);
    let dist = |p: &Vec3| bvh.closest_point(p).map_or(0.0, |c| c.distance);
    let inside = |p: &Vec3| winding_number(surface, p) > 0.5;
    let (lo, hi) = surface.bounding_box();
    let ext = hi - lo;
    let grid: Vec<Vec3> = (0..GRID * GRID * GRID)
        .map(|k| {
            let (i, j, l) = (k % GRID, (k / GRID) % GRID, k / (GRID * GRID));
            let f = |a: usize| (a as f64 + 0.5) / GRID as f64;
            lo + Vec3::new(f(i) * ext.x, f(j) * ext.y, f(l) * ext.z)
        })
        .collect();
    let mut scored: Vec<(f64, usize)> = grid.par_iter().enumerate().map(|(k, p)| (dist(p), k)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    // the deepest few interior grid points seed the refinement
    let seeds: Vec<Vec3> = scored
        .iter()
        .filter(|(d, _)| *d > 0.0)
        .map(|&(_, k)| grid[k])
        .filter(|p| inside(p))
        .take(4)
        .collect();
    if seeds.is_empty() {
        return Err(Error::domain("surface encloses no interior"));
    }
    let cell = ext.max() / GRID as f64;
    let (gamma, center) = seeds
        .iter()
        .map(|s| compass_search(*s, cell, &dist, &inside))
        .fold((f64::NEG_INFINITY, Vec3::zeros()), |best, c| if c.0 > best.0 { c } else { best });
    let n = surface.dimension() as f64;
    Ok(ExtinctionBound {
        gamma,
        center: center.into(),
        delta: gamma * gamma / (2.0 * n),
    })
}

fn compass_search(start: Vec3, step0: f64, dist: &impl Fn(&Vec3) -> f64, inside: &impl Fn(&Vec3) -> bool) -> (f64, Vec3) {
    let mut x = start;
    let mut best = dist(&x);
    let mut step = step0;
    let dirs = [Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    while step > 1e-6 * step0 {
        let mut moved = false;
        for d in &dirs {
            let y = x + step * d;
            let v = dist(&y);
            if v > best && inside(&y) {
                best = v;
                x = y;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::{concentric_spheres, disk, ellipsoid, icosphere};

    #[test]
    fn sphere_bound() {
        let b = extinction_lower_bound(&icosphere(3, 2.0)).unwrap();
        assert!((b.gamma - 2.0).abs() < 0.02, "{}", b.gamma);
        assert!((b.delta - 1.0).abs() < 0.02);
    }

    #[test]
    fn nested_sheets_use_the_inner_sphere() {
        let b = extinction_lower_bound(&concentric_spheres(3, &[2.0, 2.05])).unwrap();
        assert!((b.gamma - 2.0).abs() < 0.02, "{}", b.gamma);
    }

    #[test]
    fn thin_ellipsoid() {
        let b = extinction_lower_bound(&ellipsoid(4, [2.0, 2.0, 0.2])).unwrap();
        assert!((b.gamma - 0.2).abs() < 0.01, "{}", b.gamma);
        assert!((b.delta - 0.01).abs() < 0.001);
    }

    #[test]
    fn open_disk_has_no_interior() {
        assert!(extinction_lower_bound(&disk(1.0, 4)).is_err());
    }
}
