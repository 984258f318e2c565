//! Mesh generators for the reference surfaces used by tests, the pipeline
//! and the command line: icospheres, ellipsoids, planar patches, circles,
//! surfaces of revolution (including the Angenent torus), and multi-sheet
//! fixtures.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use crate::geometry::{DiscreteSurface, Vec3};

/// Subdivided icosahedron projected onto the sphere of radius `radius`
/// centred at the origin, outward oriented.
pub fn icosphere(subdivisions: usize, radius: f64) -> DiscreteSurface {
    icosphere_at(subdivisions, radius, Vec3::zeros())
}

pub fn icosphere_at(subdivisions: usize, radius: f64, center: Vec3) -> DiscreteSurface {
    let (dirs, tris) = unit_icosphere(subdivisions);
    let vertices = dirs.iter().map(|d| center + radius * d).collect();
    DiscreteSurface::new(vertices, tris).expect("icosphere is a valid mesh")
}

fn unit_icosphere(subdivisions: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (verts, tris)
}

/// Icosphere mapped onto the ellipsoid with the given semi-axes.
pub fn ellipsoid(subdivisions: usize, axes: [f64; 3]) -> DiscreteSurface {
    let s = icosphere(subdivisions, 1.0);
    let v = s
        .vertices()
        .iter()
        .map(|p| Vec3::new(axes[0] * p.x, axes[1] * p.y, axes[2] * p.z))
        .collect();
    s.with_positions(v).expect("ellipsoid positions are finite")
}

/// Flat disk in the z = 0 plane with `rings` concentric rings (ring k has 6k
/// vertices), normal +z.
pub fn disk(radius: f64, rings: usize) -> DiscreteSurface {
    let mut verts = vec![Vec3::zeros()];
    let mut ring_start = vec![0usize];
    for k in 1..=rings {
        ring_start.push(verts.len());
        let n = 6 * k;
        let r = radius * k as f64 / rings as f64;
        for j in 0..n {
            let a = TAU * j as f64 / n as f64;
            verts.push(Vec3::new(r * a.cos(), r * a.sin(), 0.0));
        }
    }
    let mut tris = Vec::new();
    for k in 1..=rings {
        let outer: Vec<usize> = (0..6 * k).map(|j| ring_start[k] + j).collect();
        let inner: Vec<usize> = if k == 1 {
            vec![0]
        } else {
            (0..6 * (k - 1)).map(|j| ring_start[k - 1] + j).collect()
        };
        stitch_rings(&inner, &outer, &mut tris);
    }
    DiscreteSurface::new(verts, tris).expect("disk is a valid mesh")
}

/// Triangulates the annulus between two counter-clockwise vertex loops by
/// advancing along whichever loop lags in angle.
fn stitch_rings(inner: &[usize], outer: &[usize], tris: &mut Vec<[usize; 3]>) {
    if inner.len() == 1 {
        for j in 0..outer.len() {
            tris.push([inner[0], outer[j], outer[(j + 1) % outer.len()]]);
        }
        return;
    }
    let (ni, no) = (inner.len(), outer.len());
    let (mut i, mut o) = (0usize, 0usize);
    while i < ni || o < no {
        let ai = (i as f64 + 0.5) / ni as f64;
        let ao = (o as f64 + 0.5) / no as f64;
        if o < no && (i >= ni || ao <= ai) {
            tris.push([inner[i % ni], outer[o], outer[(o + 1) % no]]);
            o += 1;
        } else {
            tris.push([inner[i], outer[o % no], inner[(i + 1) % ni]]);
            i += 1;
        }
    }
}

/// Square grid patch [−half, half]² in z = 0, `n` cells per side, normal +z.
pub fn square_patch(half: f64, n: usize) -> DiscreteSurface {
    let mut verts = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let x = -half + 2.0 * half * i as f64 / n as f64;
            let y = -half + 2.0 * half * j as f64 / n as f64;
            verts.push(Vec3::new(x, y, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    DiscreteSurface::new(verts, tris).expect("patch is a valid mesh")
}

/// Counter-clockwise regular polygon inscribed in the circle of radius
/// `radius` (a curve in the z = 0 plane).
pub fn circle(n: usize, radius: f64) -> DiscreteSurface {
    let pts = (0..n)
        .map(|j| {
            let a = TAU * j as f64 / n as f64;
            Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
        })
        .collect();
    DiscreteSurface::closed_curve(pts).expect("circle is a valid curve")
}

/// Signed enclosed volume of a closed triangle mesh (positive when
/// outward oriented).
pub fn signed_volume(s: &DiscreteSurface) -> f64 {
    let v = s.vertices();
    s.triangles()
        .iter()
        .map(|t| v[t[0]].dot(&v[t[1]].cross(&v[t[2]])) / 6.0)
        .sum()
}

fn outward(s: DiscreteSurface) -> DiscreteSurface {
    if signed_volume(&s) < 0.0 {
        s.flipped()
    } else {
        s
    }
}

/// Surface of revolution about the z axis. `profile` holds (ρ, z) pairs whose
/// first and last points lie on the axis (ρ = 0); interior points are swept
/// through `n_rot` angles. The result is outward oriented.
pub fn revolve_open(profile: &[(f64, f64)], n_rot: usize) -> DiscreteSurface {
    let k = profile.len();
    assert!(k >= 3, "profile needs two poles and an interior point");
    let mut verts = vec![Vec3::new(0.0, 0.0, profile[0].1)];
    for &(rho, z) in &profile[1..k - 1] {
        for j in 0..n_rot {
            let a = TAU * j as f64 / n_rot as f64;
            verts.push(Vec3::new(rho * a.cos(), rho * a.sin(), z));
        }
    }
    let last = verts.len();
    verts.push(Vec3::new(0.0, 0.0, profile[k - 1].1));
    let ring = |i: usize, j: usize| 1 + (i - 1) * n_rot + j % n_rot;
    let mut tris = Vec::new();
    for j in 0..n_rot {
        tris.push([0, ring(1, j + 1), ring(1, j)]);
    }
    for i in 1..k - 2 {
        for j in 0..n_rot {
            tris.push([ring(i, j), ring(i, j + 1), ring(i + 1, j + 1)]);
            tris.push([ring(i, j), ring(i + 1, j + 1), ring(i + 1, j)]);
        }
    }
    for j in 0..n_rot {
        tris.push([last, ring(k - 2, j), ring(k - 2, j + 1)]);
    }
    outward(DiscreteSurface::new(verts, tris).expect("surface of revolution is valid"))
}

/// Torus-like surface of revolution from a closed profile loop of (ρ, z)
/// points with ρ > 0.
pub fn revolve_closed(profile: &[(f64, f64)], n_rot: usize) -> DiscreteSurface {
    let k = profile.len();
    let mut verts = Vec::with_capacity(k * n_rot);
    for &(rho, z) in profile {
        for j in 0..n_rot {
            let a = TAU * j as f64 / n_rot as f64;
            verts.push(Vec3::new(rho * a.cos(), rho * a.sin(), z));
        }
    }
    let id = |i: usize, j: usize| (i % k) * n_rot + j % n_rot;
    let mut tris = Vec::new();
    for i in 0..k {
        for j in 0..n_rot {
            tris.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    outward(DiscreteSurface::new(verts, tris).expect("torus of revolution is valid"))
}

/// Latitude–longitude sphere of radius `radius` with `n_lat` latitude bands.
pub fn uv_sphere(radius: f64, n_lat: usize, n_rot: usize) -> DiscreteSurface {
    let profile: Vec<(f64, f64)> = (0..=n_lat)
        .map(|i| {
            let th = PI * i as f64 / n_lat as f64;
            (radius * th.sin(), -radius * th.cos())
        })
        .collect();
    revolve_open(&profile, n_rot)
}

/// Icosphere of radius `radius` with smooth outward bumps of the given
/// height and width centred on each unit direction in `directions`.
pub fn bumpy_sphere(
    subdivisions: usize,
    radius: f64,
    directions: &[Vec3],
    height: f64,
    width: f64,
) -> DiscreteSurface {
    let s = icosphere(subdivisions, radius);
    let dirs: Vec<Vec3> = directions.iter().map(|d| d.normalize()).collect();
    let v = s
        .vertices()
        .iter()
        .map(|p| {
            let u = p.normalize();
            let bump: f64 = dirs
                .iter()
                .map(|d| {
                    let arc = radius * u.dot(d).clamp(-1.0, 1.0).acos();
                    height * (-(arc / width).powi(2)).exp()
                })
                .sum();
            p + bump * u
        })
        .collect();
    s.with_positions(v).expect("bumps are finite")
}

/// Disjoint union of concentric icospheres (one mesh, one component per
/// radius), all outward oriented.
pub fn concentric_spheres(subdivisions: usize, radii: &[f64]) -> DiscreteSurface {
    let parts: Vec<DiscreteSurface> = radii.iter().map(|&r| icosphere(subdivisions, r)).collect();
    let refs: Vec<&DiscreteSurface> = parts.iter().collect();
    DiscreteSurface::merge(&refs).expect("same dimension")
}

/// Two overlapping spheres merged into one immersed (self-intersecting) mesh.
pub fn crossing_spheres(subdivisions: usize, radius: f64, offset: f64) -> DiscreteSurface {
    let a = icosphere(subdivisions, radius);
    let b = icosphere_at(subdivisions, radius, Vec3::new(offset, 0.0, 0.0));
    DiscreteSurface::merge(&[&a, &b]).expect("same dimension")
}

/// Two concentric spherical sheets of radii `inner` < `outer` joined by a
/// short band through a hole of angular radius `hole` around the north pole.
/// The result is one closed embedded surface (a thick shell with a neck).
pub fn neck_shell(inner: f64, outer: f64, hole: f64, n_lat: usize, n_rot: usize) -> DiscreteSurface {
    let mut profile = Vec::new();
    // outer sheet from the south pole up to the hole rim
    for i in 0..=n_lat {
        let th = PI - (PI - hole) * i as f64 / n_lat as f64;
        profile.push((outer * th.sin(), outer * th.cos()));
    }
    // band across the gap
    let band = 3;
    for b in 1..band {
        let r = outer + (inner - outer) * b as f64 / band as f64;
        profile.push((r * hole.sin(), r * hole.cos()));
    }
    // inner sheet from the hole rim back down to its south pole
    for i in 0..=n_lat {
        let th = hole + (PI - hole) * i as f64 / n_lat as f64;
        profile.push((inner * th.sin(), inner * th.cos()));
    }
    revolve_open(&profile, n_rot)
}

/// Profile of the Angenent torus: the closed (ρ, z) curve solving the
/// rotationally symmetric shrinker equation H = ⟨x, n⟩/2, found by shooting
/// from the outer equator. Returns `n` points equally spaced in arclength.
pub fn angenent_profile(n: usize) -> Vec<(f64, f64)> {
    // θ' = (ρ sinθ − z cosθ)/2 − sinθ/ρ along unit-speed (ρ', z') = (cosθ, sinθ)
    fn rhs(y: [f64; 3]) -> [f64; 3] {
        let [r, z, th] = y;
        let (s, c) = th.sin_cos();
        [c, s, (r * s - z * c) / 2.0 - s / r]
    }
    fn rk4(y: [f64; 3], h: f64) -> [f64; 3] {
        let add = |a: [f64; 3], b: [f64; 3], k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]];
        let k1 = rhs(y);
        let k2 = rhs(add(y, k1, h / 2.0));
        let k3 = rhs(add(y, k2, h / 2.0));
        let k4 = rhs(add(y, k3, h));
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ]
    }
    const H: f64 = 1e-3;
    // Integrates the upper arc until z returns to 0; returns the samples
    // (s, ρ, z) and the final state.
    let shoot = |r0: f64| -> (Vec<(f64, f64, f64)>, [f64; 3]) {
        let mut y = [r0, 0.0, PI / 2.0];
        let mut s = 0.0;
        let mut samples = vec![(0.0, r0, 0.0)];
        loop {
            let next = rk4(y, H);
            if next[1] < 0.0 && s > 0.1 {
                // land exactly on z = 0 with a shortened final step
                let mut lo = 0.0;
                let mut hi = H;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if rk4(y, mid)[1] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let h = 0.5 * (lo + hi);
                let end = rk4(y, h);
                samples.push((s + h, end[0], 0.0));
                return (samples, end);
            }
            y = next;
            s += H;
            samples.push((s, y[0], y[1]));
            if s > 20.0 {
                return (samples, y);
            }
        }
    };
    // the arc must meet the axis plane perpendicularly: cos θ = 0
    let (mut lo, mut hi) = (3.2, 3.4);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid).1[2].cos() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (arc, _) = shoot(0.5 * (lo + hi));
    let half = arc.last().unwrap().0;
    let total = 2.0 * half;
    let at = |s: f64| -> (f64, f64) {
        let (s, sign) = if s <= half { (s, 1.0) } else { (total - s, -1.0) };
        let k = arc.partition_point(|p| p.0 < s).clamp(1, arc.len() - 1);
        let (a, b) = (arc[k - 1], arc[k]);
        let w = if b.0 > a.0 { (s - a.0) / (b.0 - a.0) } else { 0.0 };
        (a.1 + w * (b.1 - a.1), sign * (a.2 + w * (b.2 - a.2)))
    };
    (0..n).map(|i| at(total * i as f64 / n as f64)).collect()
}

/// The Angenent torus, a closed non-round self-shrinker, as a triangle mesh.
pub fn angenent_torus(n_profile: usize, n_rot: usize) -> DiscreteSurface {
    revolve_closed(&angenent_profile(n_profile), n_rot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_closure() {
        let s = icosphere(2, 1.0);
        assert_eq!(s.n_vertices(), 162);
        assert_eq!(s.n_cells(), 320);
        assert!(s.is_closed());
        assert!(signed_volume(&s) > 0.0);
    }

    #[test]
    fn disk_area_converges() {
        let d = disk(1.0, 20);
        assert!(!d.is_closed());
        assert!((d.area() - PI).abs() < 0.01);
        assert!(d.triangles().iter().all(|t| {
            let v = d.vertices();
            (v[t[1]] - v[t[0]]).cross(&(v[t[2]] - v[t[0]])).z > 0.0
        }));
    }

    #[test]
    fn revolution_fixtures_are_closed_and_outward() {
        for s in [uv_sphere(2.0, 24, 32), neck_shell(1.95, 2.05, 0.1, 30, 40), angenent_torus(48, 48)] {
            assert!(s.is_closed());
            assert!(signed_volume(&s) > 0.0);
        }
    }

    #[test]
    fn angenent_profile_hits_known_radii() {
        let p = angenent_profile(400);
        let rmax = p.iter().map(|q| q.0).fold(0.0, f64::max);
        let rmin = p.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
        assert!((rmax - 3.3147).abs() < 1e-3, "{rmax}");
        assert!((rmin - 0.4371).abs() < 1e-3, "{rmin}");
    }
}
