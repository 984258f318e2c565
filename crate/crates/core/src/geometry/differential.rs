//! Discrete normals, mean curvature, |A|² and Voronoi areas.
//!
//! Mean curvature comes from the cotangent Laplacian of the embedding,
//! Δx = −H n, so a sphere with outward normal has H = n/R > 0. The squared
//! norm of the second fundamental form is the Frobenius norm of a per-vertex
//! shape operator fitted to a quadratic height function over the one-ring.
//! Curves use the turning-angle analogues.

use crate::error::Result;
use crate::geometry::{Cells, DiscreteSurface, Vec3};

#[derive(Clone, Debug)]
pub struct DifferentialQuantities {
    pub normals: Vec<Vec3>,
    pub mean_curvature: Vec<f64>,
    /// |A|² per vertex.
    pub second_fundamental_sq: Vec<f64>,
    /// Mixed Voronoi area (dual length for curves); sums to the total area.
    pub voronoi_area: Vec<f64>,
    /// Vertices on a boundary edge, where curvature is not meaningful.
    pub boundary: Vec<bool>,
}

/// Per-edge cotangent weights ½(cot α + cot β) for a triangle mesh.
pub fn cotan_weights(surface: &DiscreteSurface) -> Vec<([usize; 2], f64)> {
    let v = surface.vertices();
    let mut acc: std::collections::HashMap<[usize; 2], f64> = std::collections::HashMap::new();
    for t in surface.triangles() {
        for k in 0..3 {
            let (o, a, b) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let (u, w) = (v[a] - v[o], v[b] - v[o]);
            let cot = u.dot(&w) / u.cross(&w).norm();
            *acc.entry([a.min(b), a.max(b)]).or_default() += 0.5 * cot;
        }
    }
    let mut out: Vec<_> = acc.into_iter().collect();
    out.sort_unstable_by_key(|(e, _)| *e);
    out
}

/// Symmetric edge weights of the discrete Dirichlet energy: cotangent
/// weights on surfaces, inverse lengths on curves.
pub fn edge_weights(surface: &DiscreteSurface) -> Vec<([usize; 2], f64)> {
    match surface.cells() {
        Cells::Triangles(_) => cotan_weights(surface),
        Cells::Segments(segs) => {
            let v = surface.vertices();
            let mut out: Vec<_> = segs
                .iter()
                .map(|s| ([s[0].min(s[1]), s[0].max(s[1])], 1.0 / (v[s[1]] - v[s[0]]).norm()))
                .collect();
            out.sort_unstable_by_key(|(e, _)| *e);
            out
        }
    }
}

/// Mixed Voronoi areas (Meyer et al.): Voronoi regions for non-obtuse
/// triangles, the area/2, area/4 split for obtuse ones.
pub fn mixed_voronoi_areas(surface: &DiscreteSurface) -> Vec<f64> {
    let v = surface.vertices();
    let mut area = vec![0.0; v.len()];
    match surface.cells() {
        Cells::Triangles(tris) => {
            for (ti, t) in tris.iter().enumerate() {
                let ta = surface.triangle_area(ti);
                let p = [v[t[0]], v[t[1]], v[t[2]]];
                let obtuse = (0..3).find(|&k| {
                    (p[(k + 1) % 3] - p[k]).dot(&(p[(k + 2) % 3] - p[k])) < 0.0
                });
                match obtuse {
                    Some(k) => {
                        area[t[k]] += ta / 2.0;
                        area[t[(k + 1) % 3]] += ta / 4.0;
                        area[t[(k + 2) % 3]] += ta / 4.0;
                    }
                    None => {
                        // each vertex gets (|e|² cot) / 8 from its two incident edges
                        let mut part = [0.0; 3];
                        for k in 0..3 {
                            let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                            let (u, w) = (p[a] - p[k], p[b] - p[k]);
                            let cot = u.dot(&w) / u.cross(&w).norm();
                            let e2 = (p[b] - p[a]).norm_squared();
                            part[a] += e2 * cot / 8.0;
                            part[b] += e2 * cot / 8.0;
                        }
                        // fold the rounding residue into the largest share so the sum is the area
                        let resid = ta - (part[0] + part[1] + part[2]);
                        let big = (0..3).max_by(|&i, &j| part[i].total_cmp(&part[j])).unwrap();
                        part[big] += resid;
                        for k in 0..3 {
                            area[t[k]] += part[k];
                        }
                    }
                }
            }
        }
        Cells::Segments(segs) => {
            for s in segs {
                let l = (v[s[1]] - v[s[0]]).norm();
                area[s[0]] += l / 2.0;
                area[s[1]] += l / 2.0;
            }
        }
    }
    area
}

/// Unit vertex normals. On surfaces the area-weighted normal is corrected by
/// the tilt of the local quadratic fit (see `local_fits`), which removes its
/// first-order error; on curves the averaged perpendicular is used.
pub fn vertex_normals(surface: &DiscreteSurface) -> Vec<Vec3> {
    match surface.cells() {
        Cells::Triangles(_) => local_fits(surface).into_iter().map(|(n, _)| n).collect(),
        Cells::Segments(_) => area_weighted_normals(surface),
    }
}

/// Area-weighted vertex normals (perpendicular of the averaged tangent for
/// curves, pointing right of the direction of travel).
pub fn area_weighted_normals(surface: &DiscreteSurface) -> Vec<Vec3> {
    let v = surface.vertices();
    let mut n = vec![Vec3::zeros(); v.len()];
    match surface.cells() {
        Cells::Triangles(tris) => {
            for (i, t) in tris.iter().enumerate() {
                let fn_ = surface.triangle_normal(i);
                for &k in t {
                    n[k] += fn_;
                }
            }
        }
        Cells::Segments(segs) => {
            for s in segs {
                let d = v[s[1]] - v[s[0]];
                let perp = Vec3::new(d.y, -d.x, 0.0);
                n[s[0]] += perp;
                n[s[1]] += perp;
            }
        }
    }
    for x in &mut n {
        let len = x.norm();
        if len > 0.0 {
            *x /= len;
        }
    }
    n
}

/// Cotangent Laplacian of the embedding, Δx per vertex (lumped by the mixed
/// Voronoi area). For curves, the second difference over dual lengths.
pub fn laplacian_of_position(surface: &DiscreteSurface, areas: &[f64]) -> Vec<Vec3> {
    let v = surface.vertices();
    let mut lap = vec![Vec3::zeros(); v.len()];
    match surface.cells() {
        Cells::Triangles(_) => {
            for ([a, b], w) in cotan_weights(surface) {
                let d = v[b] - v[a];
                lap[a] += w * d;
                lap[b] -= w * d;
            }
        }
        Cells::Segments(segs) => {
            for s in segs {
                let d = v[s[1]] - v[s[0]];
                let u = d / d.norm();
                lap[s[0]] += u;
                lap[s[1]] -= u;
            }
        }
    }
    for (l, a) in lap.iter_mut().zip(areas) {
        if *a > 0.0 {
            *l /= *a;
        }
    }
    lap
}

pub fn differential_quantities(surface: &DiscreteSurface) -> Result<DifferentialQuantities> {
    let voronoi_area = mixed_voronoi_areas(surface);
    let (normals, fitted_a2) = match surface.cells() {
        Cells::Triangles(_) => local_fits(surface).into_iter().unzip(),
        Cells::Segments(_) => (area_weighted_normals(surface), Vec::new()),
    };
    let lap = laplacian_of_position(surface, &voronoi_area);
    let boundary = surface.boundary_vertices();
    let mean_curvature: Vec<f64> = lap
        .iter()
        .zip(&normals)
        .zip(&boundary)
        .map(|((l, n), &b)| if b { 0.0 } else { -l.dot(n) })
        .collect();
    let second_fundamental_sq = match surface.cells() {
        Cells::Segments(_) => mean_curvature.iter().map(|h| h * h).collect(),
        Cells::Triangles(_) => fitted_a2,
    };
    Ok(DifferentialQuantities {
        normals,
        mean_curvature,
        second_fundamental_sq,
        voronoi_area,
        boundary,
    })
}

/// Least-squares fit of the height function z = ½(a u² + 2b uv + c v²) + d u + e v
/// over the one-ring, in the tangent frame of the area-weighted normal. The
/// gradient (d, e) tilts the normal to n − d e₁ − e e₂; the Hessian
/// [[a, b], [b, c]] is the shape operator, and tr(S²) = a² + 2b² + c² is
/// returned alongside the corrected unit normal.
fn local_fits(surface: &DiscreteSurface) -> Vec<(Vec3, f64)> {
    use nalgebra::{SMatrix, SVector};
    let v = surface.vertices();
    let nb = surface.vertex_neighbors();
    let normals = area_weighted_normals(surface);
    (0..v.len())
        .map(|i| {
            let n = normals[i];
            let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let e1 = n.cross(&helper).normalize();
            let e2 = n.cross(&e1);
            let mut ata = SMatrix::<f64, 5, 5>::zeros();
            let mut atb = SVector::<f64, 5>::zeros();
            for &j in &nb[i] {
                let dx = v[j] - v[i];
                let (u1, u2, z) = (dx.dot(&e1), dx.dot(&e2), dx.dot(&n));
                let weight = 1.0 / dx.norm_squared().powi(2);
                let row = SVector::<f64, 5>::new(0.5 * u1 * u1, u1 * u2, 0.5 * u2 * u2, u1, u2);
                ata += weight * row * row.transpose();
                atb += weight * row * z;
            }
            let full = if nb[i].len() >= 5 {
                ata.try_inverse().map(|inv| inv * atb)
            } else {
                None
            };
            let frob = |a: f64, b: f64, c: f64| a * a + 2.0 * b * b + c * c;
            match full {
                Some(s) => ((n - s[3] * e1 - s[4] * e2).normalize(), frob(s[0], s[1], s[2])),
                None => {
                    // too few neighbours for the tilt terms: quadratic part only
                    let sub = ata.fixed_view::<3, 3>(0, 0).into_owned();
                    let a2 = sub
                        .try_inverse()
                        .map(|inv| {
                            let s = inv * atb.fixed_rows::<3>(0);
                            frob(s[0], s[1], s[2])
                        })
                        .unwrap_or(0.0);
                    (n, a2)
                }
            }
        })
        .collect()
}

/// Per-vertex residual of the shrinker equation together with its
/// Gaussian-weighted RMS norm.
#[derive(Clone, Debug)]
pub struct ShrinkerResidual {
    /// H − ⟨x, n⟩/2 at each vertex.
    pub values: Vec<f64>,
    /// (∫ r² e^{−|x|²/4} / ∫ e^{−|x|²/4})^{1/2} with Voronoi-area quadrature.
    pub gaussian_l2: f64,
    /// Mean of |H| over the same Gaussian weighting, for relative thresholds.
    pub gaussian_mean_abs_h: f64,
}

pub fn shrinker_residual(surface: &DiscreteSurface) -> Result<ShrinkerResidual> {
    let dq = differential_quantities(surface)?;
    let v = surface.vertices();
    let values: Vec<f64> = (0..v.len())
        .map(|i| dq.mean_curvature[i] - v[i].dot(&dq.normals[i]) / 2.0)
        .collect();
    let (mut num, mut den, mut habs) = (0.0, 0.0, 0.0);
    for i in 0..v.len() {
        if dq.boundary[i] {
            continue;
        }
        let w = dq.voronoi_area[i] * (-v[i].norm_squared() / 4.0).exp();
        num += w * values[i] * values[i];
        habs += w * dq.mean_curvature[i].abs();
        den += w;
    }
    Ok(ShrinkerResidual {
        values,
        gaussian_l2: (num / den).sqrt(),
        gaussian_mean_abs_h: habs / den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::{circle, disk, icosphere, square_patch};

    fn max_rel_err(values: &[f64], exact: f64) -> f64 {
        values.iter().map(|h| (h - exact).abs() / exact).fold(0.0, f64::max)
    }

    #[test]
    fn unit_sphere_mean_curvature() {
        let dq = differential_quantities(&icosphere(4, 1.0)).unwrap();
        assert!(max_rel_err(&dq.mean_curvature, 2.0) < 0.02);
        for n in &dq.normals {
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_two_second_fundamental_form() {
        let dq = differential_quantities(&icosphere(4, 2.0)).unwrap();
        let e = max_rel_err(&dq.second_fundamental_sq, 0.5);
        assert!(e < 0.02, "{e}");
    }

    #[test]
    fn sphere_refinement_converges_first_order() {
        let (mut logh, mut loge_h, mut loge_a) = (vec![], vec![], vec![]);
        for k in 2..=5 {
            let s = icosphere(k, 1.0);
            let dq = differential_quantities(&s).unwrap();
            logh.push(s.mean_edge_length().ln());
            loge_h.push(max_rel_err(&dq.mean_curvature, 2.0).ln());
            loge_a.push(max_rel_err(&dq.second_fundamental_sq, 2.0).ln());
        }
        let slope = |y: &[f64]| {
            let n = y.len() as f64;
            let (mx, my) = (logh.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
            let num: f64 = logh.iter().zip(y).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = logh.iter().map(|x| (x - mx).powi(2)).sum();
            num / den
        };
        assert!(slope(&loge_h) >= 0.9, "H slope {}", slope(&loge_h));
        assert!(slope(&loge_a) >= 0.9, "|A|² slope {}", slope(&loge_a));
    }

    #[test]
    fn flat_patch_interior_is_flat() {
        for s in [disk(1.0, 10), square_patch(1.0, 12)] {
            let dq = differential_quantities(&s).unwrap();
            for i in 0..s.n_vertices() {
                if !dq.boundary[i] {
                    assert!(dq.mean_curvature[i].abs() < 1e-10);
                    assert!(dq.second_fundamental_sq[i].abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn voronoi_areas_sum_to_area() {
        for s in [icosphere(3, 1.3), disk(2.0, 7), circle(50, 1.0)] {
            let a: f64 = mixed_voronoi_areas(&s).iter().sum();
            assert!((a - s.area()).abs() <= 1e-12 * s.area());
        }
    }

    #[test]
    fn circle_curvature() {
        let dq = differential_quantities(&circle(200, 2.0)).unwrap();
        assert!(max_rel_err(&dq.mean_curvature, 0.5) < 1e-3);
        // outward normals
        let c = circle(200, 2.0);
        for (p, n) in c.vertices().iter().zip(&dq.normals) {
            assert!(p.dot(n) > 0.0);
        }
    }

    #[test]
    fn shrinker_sphere_residual_vanishes() {
        let r = shrinker_residual(&icosphere(4, 2.0)).unwrap();
        assert!(r.values.iter().all(|x| x.abs() < 0.02));
        let r1 = shrinker_residual(&icosphere(4, 1.0)).unwrap();
        assert!(r1.values.iter().all(|x| (x - 1.5).abs() < 0.05));
        let shifted = icosphere(4, 2.0).rescaled(1.0, &Vec3::new(-10.0, 0.0, 0.0));
        let r2 = shrinker_residual(&shifted).unwrap();
        assert!(r2.values.iter().map(|x| x.abs()).fold(0.0, f64::max) > 1.0);
    }
}
