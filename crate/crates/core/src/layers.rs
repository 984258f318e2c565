//! Multi-sheet diagnostics for a slice near a shrinker: where the |A|² mass
//! concentrates, and how the rest splits into height-ordered sheets over a
//! reference surface.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::bvh::Bvh;
use crate::geometry::differential::{differential_quantities, vertex_normals};
use crate::geometry::embedding::reach_estimate;
use crate::geometry::io::{write_atomic, write_obj};
use crate::geometry::{DiscreteSurface, Vec3};

/// Fraction of vertices allowed to fall outside the reference collar.
pub const MAX_AMBIGUOUS_FRACTION: f64 = 0.05;

/// Default probe radius in units of the mean edge length.
pub const DEFAULT_PROBE_FACTOR: f64 = 5.0;

/// σ = |A|² dA lumped to vertices with their Voronoi areas.
#[derive(Clone, Debug)]
pub struct CurvatureMeasure {
    pub points: Vec<Vec3>,
    pub density: Vec<f64>,
    cell: f64,
    grid: HashMap<[i64; 3], Vec<usize>>,
}

impl CurvatureMeasure {
    pub fn new(surface: &DiscreteSurface) -> Result<Self> {
        let dq = differential_quantities(surface)?;
        let density = dq
            .second_fundamental_sq
            .iter()
            .zip(&dq.voronoi_area)
            .zip(&dq.boundary)
            .map(|((a2, w), &b)| if b { 0.0 } else { a2 * w })
            .collect();
        Ok(Self::from_density(surface.vertices().to_vec(), density, surface.mean_edge_length()))
    }

    fn from_density(points: Vec<Vec3>, density: Vec<f64>, cell: f64) -> Self {
        let cell = if cell > 0.0 { cell } else { 1.0 };
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            grid.entry(cell_of(p, cell)).or_default().push(i);
        }
        Self {
            points,
            density,
            cell,
            grid,
        }
    }

    pub fn total(&self) -> f64 {
        self.density.iter().sum()
    }

    /// σ(B_r(p)), closed ball.
    pub fn ball_mass(&self, p: &Vec3, r: f64) -> f64 {
        let lo = cell_of(&p.add_scalar(-r), self.cell);
        let hi = cell_of(&p.add_scalar(r), self.cell);
        let mut mass = 0.0;
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    if let Some(ids) = self.grid.get(&[i, j, k]) {
                        for &v in ids {
                            if (self.points[v] - p).norm() <= r {
                                mass += self.density[v];
                            }
                        }
                    }
                }
            }
        }
        mass
    }

    /// The same sum over every vertex, for cross-checking.
    pub fn ball_mass_brute_force(&self, p: &Vec3, r: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.density)
            .filter(|(q, _)| (*q - p).norm() <= r)
            .map(|(_, d)| d)
            .sum()
    }
}

fn cell_of(p: &Vec3, cell: f64) -> [i64; 3] {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Concentration {
    #[serde(rename = "p")]
    pub point: [f64; 3],
    #[serde(rename = "r")]
    pub radius: f64,
    pub mass: f64,
}

impl Concentration {
    pub fn center(&self) -> Vec3 {
        Vec3::from(self.point)
    }
}

/// Vertices whose probe ball carries σ-mass above ε0², chosen greedily by
/// mass (ties by lexicographic position) with pairwise disjoint balls.
pub fn curvature_concentration(surface: &DiscreteSurface, eps0: f64, r: f64) -> Result<Vec<Concentration>> {
    let h = surface.mean_edge_length();
    if !(r > 2.0 * h) {
        return Err(Error::domain(format!(
            "probe radius {r} must exceed twice the mean edge length {h}"
        )));
    }
    let sigma = CurvatureMeasure::new(surface)?;
    let threshold = eps0 * eps0;
    let mut candidates: Vec<(f64, Vec3)> = sigma
        .points
        .par_iter()
        .map(|p| (sigma.ball_mass(p, r), *p))
        .filter(|(m, _)| *m > threshold)
        .collect();
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.x.total_cmp(&b.1.x))
            .then(a.1.y.total_cmp(&b.1.y))
            .then(a.1.z.total_cmp(&b.1.z))
    });
    let mut chosen: Vec<Concentration> = Vec::new();
    for (mass, p) in candidates {
        if chosen.iter().all(|c| (c.center() - p).norm() >= 2.0 * r) {
            chosen.push(Concentration {
                point: p.into(),
                radius: r,
                mass,
            });
        }
    }
    Ok(chosen)
}

/// The default probe radius for a mesh.
pub fn default_probe_radius(surface: &DiscreteSurface) -> f64 {
    DEFAULT_PROBE_FACTOR * surface.mean_edge_length()
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub mesh: DiscreteSurface,
    /// Indices of the layer's vertices in the decomposed mesh, ascending.
    pub vertex_ids: Vec<usize>,
    pub mean_height: f64,
}

#[derive(Clone, Debug)]
pub struct LayerReport {
    pub multiplicity: usize,
    /// Ordered by increasing mean signed height.
    pub layers: Vec<Layer>,
    pub concentration: Vec<Concentration>,
    /// Balls (centre, radius) whose vertices were removed.
    pub exclusion: Vec<(Vec3, f64)>,
    /// Removed vertices: inside an exclusion ball or outside the collar.
    pub excluded: Vec<usize>,
    pub ambiguous: usize,
    /// Voronoi-area fraction of the removed vertices.
    pub excluded_fraction: f64,
    /// Signed height over the reference for every vertex.
    pub heights: Vec<f64>,
}

#[derive(Serialize)]
struct LayerReportJson<'a> {
    multiplicity: usize,
    layers: &'a [String],
    concentration: &'a [Concentration],
    excluded_fraction: f64,
}

impl LayerReport {
    pub fn top(&self) -> Option<&Layer> {
        self.layers.last()
    }

    /// The report JSON with the given mesh paths for the layers.
    pub fn to_json(&self, layer_paths: &[String]) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LayerReportJson {
            multiplicity: self.multiplicity,
            layers: layer_paths,
            concentration: &self.concentration,
            excluded_fraction: self.excluded_fraction,
        })?)
    }

    /// Writes `layer_k.obj` per layer and `layers.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (k, l) in self.layers.iter().enumerate() {
            let name = format!("layer_{k}.obj");
            write_obj(&dir.join(&name), &l.mesh)?;
            paths.push(name);
        }
        write_atomic(&dir.join("layers.json"), self.to_json(&paths)?.as_bytes())
    }
}

/// Closest point on the reference with the signed height along the
/// interpolated reference normal.
pub(crate) struct Projector {
    bvh: Bvh,
    normals: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

pub(crate) struct Foot {
    pub triangle: usize,
    pub barycentric: [f64; 3],
    pub normal: Vec3,
    pub height: f64,
}

impl Projector {
    pub fn new(reference: &DiscreteSurface) -> Result<Self> {
        reference.require_surface()?;
        Ok(Self {
            bvh: Bvh::new(reference),
            normals: vertex_normals(reference),
            triangles: reference.triangles().to_vec(),
        })
    }

    pub fn project(&self, p: &Vec3) -> Foot {
        let c = self.bvh.closest_point(p).expect("reference has triangles");
        let t = self.triangles[c.triangle];
        let n = (0..3)
            .map(|k| c.barycentric[k] * self.normals[t[k]])
            .fold(Vec3::zeros(), |a, b| a + b)
            .normalize();
        let sign = if (p - c.point).dot(&n) < 0.0 { -1.0 } else { 1.0 };
        Foot {
            triangle: c.triangle,
            barycentric: c.barycentric,
            normal: n,
            height: sign * c.distance,
        }
    }

    /// Barycentric interpolation of a per-vertex field of the reference.
    pub fn interpolate(&self, foot: &Foot, values: &[f64]) -> f64 {
        let t = self.triangles[foot.triangle];
        (0..3).map(|k| foot.barycentric[k] * values[t[k]]).sum()
    }
}

/// Removes vertices inside the exclusion balls and outside the reach collar
/// of the reference, then splits the rest into edge-connected components
/// ordered by mean signed height.
pub fn sheet_decomposition(
    surface: &DiscreteSurface,
    reference: &DiscreteSurface,
    exclusion: &[(Vec3, f64)],
) -> Result<LayerReport> {
    surface.require_surface()?;
    let projector = Projector::new(reference)?;
    let reach = reach_estimate(reference);
    let v = surface.vertices();
    let n = v.len();
    let heights: Vec<f64> = v.par_iter().map(|p| projector.project(p).height).collect();
    let in_ball: Vec<bool> = v
        .iter()
        .map(|p| exclusion.iter().any(|(c, r)| (p - c).norm() < *r))
        .collect();
    let ambiguous_flags: Vec<bool> = (0..n).map(|i| !in_ball[i] && heights[i].abs() >= reach).collect();
    let ambiguous = ambiguous_flags.iter().filter(|&&a| a).count();
    if ambiguous as f64 > MAX_AMBIGUOUS_FRACTION * n as f64 {
        return Err(Error::AmbiguousProjection { ambiguous, total: n });
    }
    let retained: Vec<bool> = (0..n).map(|i| !in_ball[i] && !ambiguous_flags[i]).collect();

    let mut uf = UnionFind::new(n);
    for [a, b] in surface.edges() {
        if retained[a] && retained[b] {
            uf.union(a, b);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in (0..n).filter(|&i| retained[i]) {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut layers: Vec<Layer> = groups
        .into_values()
        .map(|ids| {
            let mean_height = ids.iter().map(|&i| heights[i]).sum::<f64>() / ids.len() as f64;
            let (mesh, vertex_ids) = surface.submesh(&ids);
            Layer {
                mesh,
                vertex_ids,
                mean_height,
            }
        })
        .collect();
    layers.sort_by(|a, b| a.mean_height.total_cmp(&b.mean_height).then(a.vertex_ids[0].cmp(&b.vertex_ids[0])));

    let excluded: Vec<usize> = (0..n).filter(|&i| !retained[i]).collect();
    let areas = crate::geometry::differential::mixed_voronoi_areas(surface);
    let excluded_fraction = excluded.iter().map(|&i| areas[i]).sum::<f64>() / areas.iter().sum::<f64>();
    Ok(LayerReport {
        multiplicity: layers.len(),
        layers,
        concentration: Vec::new(),
        exclusion: exclusion.to_vec(),
        excluded,
        ambiguous,
        excluded_fraction,
        heights,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Concentration points with probe radius r, then the sheet decomposition
/// with each of them excluded at radius 2r.
pub fn layer_report(surface: &DiscreteSurface, reference: &DiscreteSurface, eps0: f64, r: f64) -> Result<LayerReport> {
    let concentration = curvature_concentration(surface, eps0, r)?;
    let exclusion: Vec<(Vec3, f64)> = concentration.iter().map(|c| (c.center(), 2.0 * r)).collect();
    let mut report = sheet_decomposition(surface, reference, &exclusion)?;
    report.concentration = concentration;
    Ok(report)
}

pub fn multiplicity_estimate(surface: &DiscreteSurface, reference: &DiscreteSurface, eps0: f64, r: f64) -> Result<usize> {
    Ok(layer_report(surface, reference, eps0, r)?.multiplicity)
}

/// Whether every vertex lies within distance δ of the reference.
pub fn tubular_containment(surface: &DiscreteSurface, reference: &DiscreteSurface, delta: f64) -> Result<bool> {
    let reach = reach_estimate(reference);
    if !(delta > 0.0 && delta < reach) {
        return Err(Error::domain(format!("collar width {delta} must lie in (0, reach = {reach})")));
    }
    let bvh = Bvh::new(reference);
    Ok(surface
        .vertices()
        .par_iter()
        .all(|p| bvh.closest_point(p).is_some_and(|c| c.distance < delta)))
}
