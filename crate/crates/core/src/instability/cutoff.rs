use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::embedding::reach_estimate;
use crate::geometry::normal_graph::normal_offset;
use crate::geometry::{geodesic_distance, DiscreteSurface, PerturbationField};

/// Cutoff balls of geodesic radius r around surface vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffSpec {
    pub points: Vec<usize>,
    pub radius: f64,
    /// Radius within which distance to the points is well defined; defaults
    /// to the reach estimate of the surface.
    pub r0: Option<f64>,
}

impl CutoffSpec {
    pub fn new(points: Vec<usize>, radius: f64) -> Self {
        Self { points, radius, r0: None }
    }
}

/// 6u⁵ − 15u⁴ + 10u³ clamped to [0, 1].
pub fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// φ: 1 on [−1, 1], 0 outside [−2, 2], a quintic ramp between.
pub fn cutoff_profile(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        1.0 - smoothstep5(s - 1.0)
    }
}

/// g = 1 − Σⱼ φ(dⱼ/r) at every vertex, with dⱼ the geodesic distance to pⱼ.
pub fn cutoff_function(surface: &DiscreteSurface, spec: &CutoffSpec) -> Result<Vec<f64>> {
    let n = surface.n_vertices();
    let r = spec.radius;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("cutoff radius must be positive, got {r}")));
    }
    if let Some(&p) = spec.points.iter().find(|&&p| p >= n) {
        return Err(Error::domain(format!("cutoff point {p} out of range")));
    }
    let r0 = spec.r0.unwrap_or_else(|| reach_estimate(surface));
    if !(2.0 * r < r0) {
        return Err(Error::domain(format!("cutoff diameter 2r = {} must stay below r0 = {r0}", 2.0 * r)));
    }
    let dist: Vec<Vec<f64>> = spec
        .points
        .par_iter()
        .map(|&p| geodesic_distance(surface, p))
        .collect::<Result<_>>()?;
    for i in 0..spec.points.len() {
        for j in i + 1..spec.points.len() {
            if dist[i][spec.points[j]] <= 4.0 * r {
                return Err(Error::OverlappingCutoffs(spec.points[i], spec.points[j]));
            }
        }
    }
    Ok((0..n)
        .map(|v| {
            let s: f64 = dist.iter().map(|d| cutoff_profile(d[v] / r)).sum();
            1.0 - s
        })
        .collect())
}

/// f_r = g·f: zero on each B_r(pⱼ), equal to f off ∪B_{2r}(pⱼ).
pub fn localize_field(surface: &DiscreteSurface, f: &PerturbationField, spec: &CutoffSpec) -> Result<PerturbationField> {
    f.check_base(surface)?;
    let g = cutoff_function(surface, spec)?;
    let values: Vec<f64> = f.values.iter().zip(&g).map(|(x, gi)| gi * x).collect();
    let support = values.iter().zip(&f.support).map(|(x, s)| *s && *x != 0.0).collect();
    PerturbationField::with_support(values, support)
}

/// Mass of the symmetric difference of the graphs of εf and εf_r: the area
/// of both graphs over the triangles where the fields differ.
pub fn graph_area_defect(
    surface: &DiscreteSurface,
    f: &PerturbationField,
    f_r: &PerturbationField,
    epsilon: f64,
) -> Result<f64> {
    f.check_base(surface)?;
    f_r.check_base(surface)?;
    surface.require_surface()?;
    let g = normal_offset(surface, f, epsilon);
    let g_r = normal_offset(surface, f_r, epsilon);
    Ok(surface
        .triangles()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.iter().any(|&v| f.values[v] != f_r.values[v]))
        .map(|(i, _)| g.triangle_area(i) + g_r.triangle_area(i))
        .sum())
}
