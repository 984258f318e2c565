//! Approximate geodesic distance: Dijkstra on the edge graph enriched with
//! Steiner points on every edge, joined across each triangle by straight
//! segments.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{Cells, DiscreteSurface, Vec3};

/// Interior points inserted on each edge.
pub const STEINER_POINTS: usize = 2;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distance from vertex `source` to every vertex.
pub fn geodesic_distance(surface: &DiscreteSurface, source: usize) -> Result<Vec<f64>> {
    let n = surface.n_vertices();
    if source >= n {
        return Err(Error::domain(format!("source vertex {source} out of range")));
    }
    let comps = surface.components();
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps.iter().map(|c| c.len()).collect()));
    }
    let (points, adjacency) = steiner_graph(surface);
    let mut dist = vec![f64::INFINITY; points.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Entry(0.0, source)]);
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(w, len) in &adjacency[u] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    dist.truncate(n);
    Ok(dist)
}

/// Graph nodes (vertices first, then Steiner points) and weighted adjacency.
fn steiner_graph(surface: &DiscreteSurface) -> (Vec<Vec3>, Vec<Vec<(usize, f64)>>) {
    let v = surface.vertices();
    let mut points: Vec<Vec3> = v.to_vec();
    let mut edge_nodes: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
    let k = match surface.cells() {
        Cells::Triangles(_) => STEINER_POINTS,
        Cells::Segments(_) => 0,
    };
    for [a, b] in surface.edges() {
        let mut nodes = vec![a];
        for s in 1..=k {
            let t = s as f64 / (k + 1) as f64;
            nodes.push(points.len());
            points.push(v[a] + t * (v[b] - v[a]));
        }
        nodes.push(b);
        edge_nodes.insert([a, b], nodes);
    }
    let mut adjacency = vec![Vec::new(); points.len()];
    let mut link = |i: usize, j: usize, points: &[Vec3]| {
        let len = (points[i] - points[j]).norm();
        adjacency[i].push((j, len));
        adjacency[j].push((i, len));
    };
    match surface.cells() {
        Cells::Segments(segs) => {
            for s in segs {
                link(s[0], s[1], &points);
            }
        }
        Cells::Triangles(tris) => {
            for t in tris {
                let mut boundary: Vec<usize> = Vec::with_capacity(3 + 3 * k);
                for e in 0..3 {
                    let (a, b) = (t[e], t[(e + 1) % 3]);
                    boundary.extend(&edge_nodes[&[a.min(b), a.max(b)]]);
                }
                boundary.sort_unstable();
                boundary.dedup();
                for x in 0..boundary.len() {
                    for y in x + 1..boundary.len() {
                        link(boundary[x], boundary[y], &points);
                    }
                }
            }
        }
    }
    (points, adjacency)
}
