//! Scalar normal-displacement fields and the normal graphs they define.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::differential::{cotan_weights, mixed_voronoi_areas, vertex_normals};
use crate::geometry::embedding::reach_estimate;
use crate::geometry::{Cells, DiscreteSurface};

/// A per-vertex normal displacement f on a fixed base surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationField {
    pub values: Vec<f64>,
    pub support: Vec<bool>,
}

/// Discrete stand-ins for the C² norm of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldNorms {
    pub sup: f64,
    /// max |f(i) − f(j)| / |xᵢ − xⱼ| over edges.
    pub edge_quotient: f64,
    /// max |Δf| with the cotangent Laplacian.
    pub laplacian: f64,
}

impl PerturbationField {
    /// Support is where the value is nonzero.
    pub fn new(values: Vec<f64>) -> Self {
        let support = values.iter().map(|v| *v != 0.0).collect();
        Self { values, support }
    }

    pub fn constant(n_vertices: usize, value: f64) -> Self {
        Self::new(vec![value; n_vertices])
    }

    /// Explicit support; values off the support must be exactly zero.
    pub fn with_support(values: Vec<f64>, support: Vec<bool>) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::domain("values and support differ in length"));
        }
        if let Some(i) = (0..values.len()).find(|&i| !support[i] && values[i] != 0.0) {
            return Err(Error::domain(format!("value {} at vertex {i} outside the support", values[i])));
        }
        Ok(Self { values, support })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_base(&self, surface: &DiscreteSurface) -> Result<()> {
        if self.values.len() != surface.n_vertices() {
            return Err(Error::domain(format!(
                "field has {} values for a surface with {} vertices",
                self.values.len(),
                surface.n_vertices()
            )));
        }
        Ok(())
    }

    pub fn norms(&self, surface: &DiscreteSurface) -> Result<FieldNorms> {
        self.check_base(surface)?;
        let v = surface.vertices();
        let f = &self.values;
        let edge_quotient = surface
            .edges()
            .iter()
            .map(|&[a, b]| (f[a] - f[b]).abs() / (v[a] - v[b]).norm())
            .fold(0.0, f64::max);
        let mut lap = vec![0.0; f.len()];
        match surface.cells() {
            Cells::Triangles(_) => {
                for ([a, b], w) in cotan_weights(surface) {
                    lap[a] += w * (f[b] - f[a]);
                    lap[b] += w * (f[a] - f[b]);
                }
            }
            Cells::Segments(segs) => {
                for s in segs {
                    let l = (v[s[1]] - v[s[0]]).norm();
                    lap[s[0]] += (f[s[1]] - f[s[0]]) / l;
                    lap[s[1]] += (f[s[0]] - f[s[1]]) / l;
                }
            }
        }
        let area = mixed_voronoi_areas(surface);
        let boundary = surface.boundary_vertices();
        let laplacian = (0..f.len())
            .filter(|&i| !boundary[i])
            .map(|i| (lap[i] / area[i]).abs())
            .fold(0.0, f64::max);
        Ok(FieldNorms {
            sup: self.sup_norm(),
            edge_quotient,
            laplacian,
        })
    }
}

/// Moves vertex i to xᵢ + ε f(i) nᵢ. Fails if ε‖f‖∞ reaches the estimated
/// reach of the surface.
pub fn build_normal_graph(
    surface: &DiscreteSurface,
    f: &PerturbationField,
    epsilon: f64,
) -> Result<DiscreteSurface> {
    f.check_base(surface)?;
    if epsilon == 0.0 {
        return Ok(surface.clone());
    }
    let offset = epsilon.abs() * f.sup_norm();
    let reach = reach_estimate(surface);
    if offset >= reach {
        return Err(Error::ReachViolation { reach, offset });
    }
    Ok(normal_offset(surface, f, epsilon))
}

/// The normal graph without the reach check.
pub(crate) fn normal_offset(surface: &DiscreteSurface, f: &PerturbationField, epsilon: f64) -> DiscreteSurface {
    let normals = vertex_normals(surface);
    let moved = surface
        .vertices()
        .iter()
        .zip(&normals)
        .zip(&f.values)
        .map(|((x, n), fi)| x + (epsilon * fi) * n)
        .collect();
    surface
        .with_positions(moved)
        .expect("offset below reach keeps the mesh valid")
}
