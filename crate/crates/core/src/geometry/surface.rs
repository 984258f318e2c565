use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Relative floor on cell measure used by [`DiscreteSurface::new`].
pub const DEFAULT_AREA_FLOOR: f64 = 1e-12;

/// Connectivity of a discrete surface: triangles for surfaces in R³,
/// segments for closed polylines in the plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cells {
    Triangles(Vec<[usize; 3]>),
    Segments(Vec<[usize; 2]>),
}

/// An oriented manifold mesh: a triangle surface in R³ (dimension 2) or a
/// polyline in the z = 0 plane (dimension 1).
///
/// Boundary edges are allowed so that planar patches and extracted layers are
/// representable; operations that need a closed surface check
/// [`DiscreteSurface::is_closed`].
#[derive(Clone, Debug)]
pub struct DiscreteSurface {
    vertices: Vec<Vec3>,
    cells: Cells,
}

impl DiscreteSurface {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::with_area_floor(vertices, triangles, DEFAULT_AREA_FLOOR)
    }

    pub fn with_area_floor(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        floor: f64,
    ) -> Result<Self> {
        let s = Self {
            vertices,
            cells: Cells::Triangles(triangles),
        };
        s.validate(floor)?;
        Ok(s)
    }

    /// Polyline through `vertices` (z must be zero) with explicit segments.
    pub fn curve(vertices: Vec<Vec3>, segments: Vec<[usize; 2]>) -> Result<Self> {
        if vertices.iter().any(|v| v.z != 0.0) {
            return Err(Error::InvalidMesh("curve vertices must lie in z = 0".into()));
        }
        let s = Self {
            vertices,
            cells: Cells::Segments(segments),
        };
        s.validate(DEFAULT_AREA_FLOOR)?;
        Ok(s)
    }

    /// Closed polyline visiting `points` in order (counter-clockwise for an
    /// outward normal).
    pub fn closed_curve(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        let segments = (0..n).map(|i| [i, (i + 1) % n]).collect();
        Self::curve(points, segments)
    }

    fn validate(&self, floor: f64) -> Result<()> {
        let nv = self.vertices.len();
        if let Some(i) = self.vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        match &self.cells {
            Cells::Triangles(tris) => {
                let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
                for (ti, t) in tris.iter().enumerate() {
                    if t.iter().any(|&i| i >= nv) {
                        return Err(Error::InvalidMesh(format!("triangle {ti} indexes past the vertex list")));
                    }
                    if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                        return Err(Error::InvalidMesh(format!("triangle {ti} repeats a vertex")));
                    }
                    for k in 0..3 {
                        let (a, b) = (t[k], t[(k + 1) % 3]);
                        if directed.insert((a, b), ti).is_some() {
                            // same directed edge twice: a third sheet or a flipped neighbour
                            let count = tris
                                .iter()
                                .filter(|u| (0..3).any(|j| {
                                    let (c, d) = (u[j], u[(j + 1) % 3]);
                                    (c == a && d == b) || (c == b && d == a)
                                }))
                                .count();
                            return if count > 2 {
                                Err(Error::NonManifoldEdge(a.min(b), a.max(b), count))
                            } else {
                                Err(Error::InconsistentOrientation(a.min(b), a.max(b)))
                            };
                        }
                    }
                }
                if !tris.is_empty() {
                    let areas: Vec<f64> = (0..tris.len()).map(|i| self.triangle_area(i)).collect();
                    let mean = areas.iter().sum::<f64>() / areas.len() as f64;
                    let threshold = floor * mean;
                    if let Some((i, &a)) = areas.iter().enumerate().find(|(_, &a)| !(a > threshold)) {
                        return Err(Error::DegenerateCell { index: i, measure: a, floor: threshold });
                    }
                }
            }
            Cells::Segments(segs) => {
                let mut out_deg = vec![0usize; nv];
                let mut in_deg = vec![0usize; nv];
                for (si, s) in segs.iter().enumerate() {
                    if s[0] >= nv || s[1] >= nv || s[0] == s[1] {
                        return Err(Error::InvalidMesh(format!("segment {si} is malformed")));
                    }
                    out_deg[s[0]] += 1;
                    in_deg[s[1]] += 1;
                }
                for v in 0..nv {
                    if out_deg[v] > 1 || in_deg[v] > 1 {
                        return Err(Error::NonManifoldEdge(v, v, out_deg[v] + in_deg[v]));
                    }
                }
                if !segs.is_empty() {
                    let lens: Vec<f64> = (0..segs.len()).map(|i| self.cell_measure(i)).collect();
                    let mean = lens.iter().sum::<f64>() / lens.len() as f64;
                    let threshold = floor * mean;
                    if let Some((i, &l)) = lens.iter().enumerate().find(|(_, &l)| !(l > threshold)) {
                        return Err(Error::DegenerateCell { index: i, measure: l, floor: threshold });
                    }
                }
            }
        }
        Ok(())
    }

    /// Intrinsic dimension n: 2 for triangle surfaces, 1 for curves.
    pub fn dimension(&self) -> usize {
        match self.cells {
            Cells::Triangles(_) => 2,
            Cells::Segments(_) => 1,
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        match &self.cells {
            Cells::Triangles(t) => t.len(),
            Cells::Segments(s) => s.len(),
        }
    }

    /// Triangles of a surface; empty for curves.
    pub fn triangles(&self) -> &[[usize; 3]] {
        match &self.cells {
            Cells::Triangles(t) => t,
            Cells::Segments(_) => &[],
        }
    }

    pub fn segments(&self) -> &[[usize; 2]] {
        match &self.cells {
            Cells::Segments(s) => s,
            Cells::Triangles(_) => &[],
        }
    }

    pub fn require_surface(&self) -> Result<&[[usize; 3]]> {
        match &self.cells {
            Cells::Triangles(t) => Ok(t),
            Cells::Segments(_) => Err(Error::domain("operation requires a triangle surface")),
        }
    }

    /// Vertex indices of cell `i` as a slice (length 3 or 2).
    pub fn cell(&self, i: usize) -> &[usize] {
        match &self.cells {
            Cells::Triangles(t) => &t[i],
            Cells::Segments(s) => &s[i],
        }
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let t = self.triangles()[i];
        let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Unnormalized face normal, length twice the area.
    pub fn triangle_normal(&self, i: usize) -> Vec3 {
        let t = self.triangles()[i];
        let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
        (b - a).cross(&(c - a))
    }

    /// Area of a triangle or length of a segment.
    pub fn cell_measure(&self, i: usize) -> f64 {
        match &self.cells {
            Cells::Triangles(_) => self.triangle_area(i),
            Cells::Segments(s) => (self.vertices[s[i][1]] - self.vertices[s[i][0]]).norm(),
        }
    }

    /// Total area (length for curves).
    pub fn area(&self) -> f64 {
        (0..self.n_cells()).map(|i| self.cell_measure(i)).sum()
    }

    /// Undirected edges (i < j), sorted. For curves these are the segments.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut e: Vec<[usize; 2]> = match &self.cells {
            Cells::Triangles(tris) => tris
                .iter()
                .flat_map(|t| (0..3).map(move |k| {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    [a.min(b), a.max(b)]
                }))
                .collect(),
            Cells::Segments(s) => s.iter().map(|s| [s[0].min(s[1]), s[0].max(s[1])]).collect(),
        };
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Sorted neighbour lists over the edge graph.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for [a, b] in self.edges() {
            nb[a].push(b);
            nb[b].push(a);
        }
        for l in &mut nb {
            l.sort_unstable();
        }
        nb
    }

    /// Cells incident to each vertex.
    pub fn vertex_cells(&self) -> Vec<Vec<usize>> {
        let mut vc = vec![Vec::new(); self.vertices.len()];
        for c in 0..self.n_cells() {
            for &v in self.cell(c) {
                vc[v].push(c);
            }
        }
        vc
    }

    /// True when every edge has two incident triangles (every vertex two
    /// segments for curves).
    pub fn is_closed(&self) -> bool {
        match &self.cells {
            Cells::Triangles(tris) => {
                let mut count: HashMap<[usize; 2], u8> = HashMap::new();
                for t in tris {
                    for k in 0..3 {
                        let (a, b) = (t[k], t[(k + 1) % 3]);
                        *count.entry([a.min(b), a.max(b)]).or_default() += 1;
                    }
                }
                !tris.is_empty() && count.values().all(|&c| c == 2)
            }
            Cells::Segments(segs) => {
                let mut deg = vec![0u8; self.vertices.len()];
                for s in segs {
                    deg[s[0]] += 1;
                    deg[s[1]] += 1;
                }
                !segs.is_empty() && deg.iter().all(|&d| d == 2)
            }
        }
    }

    /// Vertices lying on a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flag = vec![false; self.vertices.len()];
        match &self.cells {
            Cells::Triangles(tris) => {
                let mut count: HashMap<[usize; 2], u8> = HashMap::new();
                for t in tris {
                    for k in 0..3 {
                        let (a, b) = (t[k], t[(k + 1) % 3]);
                        *count.entry([a.min(b), a.max(b)]).or_default() += 1;
                    }
                }
                for (e, c) in count {
                    if c == 1 {
                        flag[e[0]] = true;
                        flag[e[1]] = true;
                    }
                }
            }
            Cells::Segments(segs) => {
                let mut deg = vec![0u8; self.vertices.len()];
                for s in segs {
                    deg[s[0]] += 1;
                    deg[s[1]] += 1;
                }
                for (f, d) in flag.iter_mut().zip(deg) {
                    *f = d < 2;
                }
            }
        }
        flag
    }

    /// Connected components of the edge graph, as vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let nb = self.vertex_neighbors();
        let mut label = vec![usize::MAX; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut stack = vec![s];
            let mut members = Vec::new();
            label[s] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for &w in &nb[v] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Area-weighted centroid of the cells.
    pub fn area_centroid(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        let mut total = 0.0;
        for i in 0..self.n_cells() {
            let cell = self.cell(i);
            let w = self.cell_measure(i);
            let mid = cell.iter().map(|&v| self.vertices[v]).sum::<Vec3>() / cell.len() as f64;
            c += w * mid;
            total += w;
        }
        c / total
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d2: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d2 = d2.max((a - b).norm_squared());
            }
        }
        d2.sqrt()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.edges()
            .iter()
            .map(|&[a, b]| (self.vertices[a] - self.vertices[b]).norm())
            .collect()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let l = self.edge_lengths();
        l.iter().sum::<f64>() / l.len() as f64
    }

    /// Smallest interior angle of any triangle, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        let mut best = 180.0f64;
        for t in self.triangles() {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let u = self.vertices[t[(k + 1) % 3]] - p;
                let w = self.vertices[t[(k + 2) % 3]] - p;
                let ang = u.angle(&w).to_degrees();
                best = best.min(ang);
            }
        }
        best
    }

    /// Same connectivity, new positions. Structural checks are skipped since
    /// connectivity is inherited; positions must be finite.
    pub fn with_positions(&self, vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "position count {} does not match vertex count {}",
                vertices.len(),
                self.vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        Ok(Self {
            vertices,
            cells: self.cells.clone(),
        })
    }

    /// Applies x ↦ scale·(x − shift).
    pub fn rescaled(&self, scale: f64, shift: &Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| scale * (v - shift)).collect(),
            cells: self.cells.clone(),
        }
    }

    /// Applies x ↦ rotation·x + translation.
    pub fn rigid_motion(&self, rotation: &nalgebra::Rotation3<f64>, translation: &Vec3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| rotation * v + translation).collect(),
            cells: self.cells.clone(),
        }
    }

    /// Orientation-reversed copy.
    pub fn flipped(&self) -> Self {
        let cells = match &self.cells {
            Cells::Triangles(t) => Cells::Triangles(t.iter().map(|&[a, b, c]| [a, c, b]).collect()),
            Cells::Segments(s) => Cells::Segments(s.iter().map(|&[a, b]| [b, a]).collect()),
        };
        Self {
            vertices: self.vertices.clone(),
            cells,
        }
    }

    /// Disjoint union of meshes of the same dimension into one mesh.
    pub fn merge(parts: &[&DiscreteSurface]) -> Result<Self> {
        let dim = parts.first().map(|p| p.dimension()).unwrap_or(2);
        if parts.iter().any(|p| p.dimension() != dim) {
            return Err(Error::domain("cannot merge surfaces of different dimension"));
        }
        let mut vertices = Vec::new();
        let mut tris = Vec::new();
        let mut segs = Vec::new();
        for p in parts {
            let off = vertices.len();
            vertices.extend_from_slice(&p.vertices);
            tris.extend(p.triangles().iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
            segs.extend(p.segments().iter().map(|s| [s[0] + off, s[1] + off]));
        }
        let cells = if dim == 2 { Cells::Triangles(tris) } else { Cells::Segments(segs) };
        Ok(Self { vertices, cells })
    }

    /// Sub-mesh on the given vertex subset: keeps cells whose vertices all
    /// belong to it. Returns the mesh and the map new index → old index.
    pub fn submesh(&self, keep: &[usize]) -> (Self, Vec<usize>) {
        let mut remap = vec![usize::MAX; self.vertices.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let vertices = keep.iter().map(|&i| self.vertices[i]).collect();
        let cells = match &self.cells {
            Cells::Triangles(t) => Cells::Triangles(
                t.iter()
                    .filter(|c| c.iter().all(|&v| remap[v] != usize::MAX))
                    .map(|c| [remap[c[0]], remap[c[1]], remap[c[2]]])
                    .collect(),
            ),
            Cells::Segments(s) => Cells::Segments(
                s.iter()
                    .filter(|c| c.iter().all(|&v| remap[v] != usize::MAX))
                    .map(|c| [remap[c[0]], remap[c[1]]])
                    .collect(),
            ),
        };
        (Self { vertices, cells }, keep.to_vec())
    }
}
