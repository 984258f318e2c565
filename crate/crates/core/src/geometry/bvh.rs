//! Axis-aligned bounding-volume hierarchy over triangles, closest-point
//! queries and generalized winding numbers.

use crate::geometry::{DiscreteSurface, Vec3};

#[derive(Clone, Debug)]
struct Node {
    lo: Vec3,
    hi: Vec3,
    /// Leaf: range into `order`; inner: children indices.
    kind: NodeKind,
}

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf(usize, usize),
    Inner(usize, usize),
}

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
pub struct Bvh {
    corners: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Result of a closest-point query.
#[derive(Clone, Copy, Debug)]
pub struct ClosestPoint {
    pub triangle: usize,
    pub point: Vec3,
    pub barycentric: [f64; 3],
    pub distance: f64,
}

impl Bvh {
    pub fn new(surface: &DiscreteSurface) -> Self {
        let v = surface.vertices();
        let corners: Vec<[Vec3; 3]> = surface
            .triangles()
            .iter()
            .map(|t| [v[t[0]], v[t[1]], v[t[2]]])
            .collect();
        let mut bvh = Bvh {
            order: (0..corners.len()).collect(),
            corners,
            nodes: Vec::new(),
        };
        if !bvh.corners.is_empty() {
            let n = bvh.corners.len();
            bvh.build(0, n);
        }
        bvh
    }

    fn bounds(&self, start: usize, end: usize) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &t in &self.order[start..end] {
            for p in &self.corners[t] {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
        }
        (lo, hi)
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let (lo, hi) = self.bounds(start, end);
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            kind: NodeKind::Leaf(start, end),
        });
        if end - start > LEAF_SIZE {
            let axis = (hi - lo).imax();
            let centroid = |t: usize| {
                let c = &self.corners[t];
                (c[0][axis] + c[1][axis] + c[2][axis]) / 3.0
            };
            let mid = (start + end) / 2;
            let mut slice: Vec<usize> = self.order[start..end].to_vec();
            slice.select_nth_unstable_by(mid - start, |&a, &b| centroid(a).total_cmp(&centroid(b)));
            self.order[start..end].copy_from_slice(&slice);
            let l = self.build(start, mid);
            let r = self.build(mid, end);
            self.nodes[id].kind = NodeKind::Inner(l, r);
        }
        id
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn closest_point(&self, p: &Vec3) -> Option<ClosestPoint> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<ClosestPoint> = None;
        let mut best_d2 = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if box_distance_sq(p, &node.lo, &node.hi) >= best_d2 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf(s, e) => {
                    for &t in &self.order[s..e] {
                        let c = &self.corners[t];
                        let (q, bary) = closest_point_on_triangle(p, &c[0], &c[1], &c[2]);
                        let d2 = (p - q).norm_squared();
                        if d2 < best_d2 || (d2 == best_d2 && best.is_some_and(|b| t < b.triangle)) {
                            best_d2 = d2;
                            best = Some(ClosestPoint {
                                triangle: t,
                                point: q,
                                barycentric: bary,
                                distance: d2.sqrt(),
                            });
                        }
                    }
                }
                NodeKind::Inner(l, r) => {
                    let dl = box_distance_sq(p, &self.nodes[l].lo, &self.nodes[l].hi);
                    let dr = box_distance_sq(p, &self.nodes[r].lo, &self.nodes[r].hi);
                    // visit the nearer child first
                    if dl < dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        best
    }

    /// Calls `visit` for every triangle whose box overlaps [lo, hi].
    pub fn for_each_overlapping(&self, lo: &Vec3, hi: &Vec3, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if (0..3).any(|k| node.lo[k] > hi[k] || node.hi[k] < lo[k]) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf(s, e) => {
                    for &t in &self.order[s..e] {
                        let c = &self.corners[t];
                        let tlo = c[0].inf(&c[1]).inf(&c[2]);
                        let thi = c[0].sup(&c[1]).sup(&c[2]);
                        if (0..3).all(|k| tlo[k] <= hi[k] && thi[k] >= lo[k]) {
                            visit(t);
                        }
                    }
                }
                NodeKind::Inner(l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
    }
}

fn box_distance_sq(p: &Vec3, lo: &Vec3, hi: &Vec3) -> f64 {
    (0..3)
        .map(|k| {
            let d = (lo[k] - p[k]).max(0.0).max(p[k] - hi[k]);
            d * d
        })
        .sum()
}

/// Closest point of triangle abc to p (Ericson, Real-Time Collision
/// Detection §5.1.5) with its barycentric coordinates.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + v * ab, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + w * ac, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + w * (c - b), [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Generalized winding number of a closed oriented surface around p: the
/// sum of signed solid angles over 4π (Van Oosterom–Strackee). About 1
/// inside an outward-oriented surface, 0 outside, and the sheet count
/// inside nested shells.
pub fn winding_number(surface: &DiscreteSurface, p: &Vec3) -> f64 {
    let v = surface.vertices();
    let mut total = 0.0;
    for t in surface.triangles() {
        let a = v[t[0]] - p;
        let b = v[t[1]] - p;
        let c = v[t[2]] - p;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * std::f64::consts::PI)
}
