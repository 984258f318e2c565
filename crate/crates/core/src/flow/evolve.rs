use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::differential::{differential_quantities, edge_weights, mixed_voronoi_areas};
use crate::geometry::fixtures::{circle, icosphere};
use crate::geometry::{Cells, DiscreteSurface};
use crate::linalg::{conjugate_gradient, CsrMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowScheme {
    /// xᵢ ← xᵢ − Δt Hᵢ nᵢ.
    #[default]
    Explicit,
    /// (M + Δt K) x_new = M x_old with the cotangent operator frozen per step.
    SemiImplicit,
    /// Closed-form round sphere or circle.
    Analytic,
}

impl std::str::FromStr for FlowScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Self::Explicit),
            "semi-implicit" => Ok(Self::SemiImplicit),
            other => Err(Error::domain(format!("unknown flow scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub scheme: FlowScheme,
    /// Constant c in Δt ≤ c·(min edge)²/max(1, max|H·edge|).
    pub cfl: f64,
    /// Keep every k-th step as a snapshot (the last step is always kept).
    pub record_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            scheme: FlowScheme::Explicit,
            cfl: 0.25,
            record_every: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMeta {
    pub t: f64,
    pub max_displacement: f64,
    pub min_angle_degrees: f64,
    pub area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    QualityCollapse,
    AreaExtinction,
    DiameterExtinction,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub surface: DiscreteSurface,
}

#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub snapshots: Vec<Snapshot>,
    pub scheme: FlowScheme,
    pub dt: f64,
    pub steps: Vec<StepMeta>,
    /// Why the run ended before `n_steps`, if it did.
    pub stopped: Option<StopReason>,
    /// Set when any snapshot was produced by interpolating between steps.
    pub interpolated: bool,
}

impl FlowTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories are never empty")
    }
}

/// Largest step the guard accepts: c·(min edge)²/max(1, max|H·edge|).
/// The floor of 1 keeps the explicit diffusion limit when the surface is
/// well resolved.
pub fn stable_timestep(surface: &DiscreteSurface, cfl: f64) -> Result<f64> {
    let dq = differential_quantities(surface)?;
    let v = surface.vertices();
    let mut longest = vec![0.0f64; v.len()];
    for [a, b] in surface.edges() {
        let l = (v[a] - v[b]).norm();
        longest[a] = longest[a].max(l);
        longest[b] = longest[b].max(l);
    }
    let he = dq
        .mean_curvature
        .iter()
        .zip(&longest)
        .map(|(h, l)| (h * l).abs())
        .fold(0.0, f64::max);
    Ok(cfl * surface.min_edge_length().powi(2) / he.max(1.0))
}

pub fn evolve(surface: &DiscreteSurface, dt: f64, n_steps: usize, scheme: FlowScheme) -> Result<FlowTrajectory> {
    evolve_with(surface, dt, n_steps, &FlowOptions { scheme, ..FlowOptions::default() })
}

pub fn evolve_with(surface: &DiscreteSurface, dt: f64, n_steps: usize, opts: &FlowOptions) -> Result<FlowTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    if opts.scheme == FlowScheme::Analytic {
        return Err(Error::domain("the analytic scheme is only available for round spheres"));
    }
    if opts.scheme == FlowScheme::Explicit {
        let bound = stable_timestep(surface, opts.cfl)?;
        if dt > bound {
            return Err(Error::Timestep { dt, suggested: bound });
        }
    }
    let initial_area = surface.area();
    let min_edge0 = surface.min_edge_length();
    let mut current = surface.clone();
    let mut traj = FlowTrajectory {
        snapshots: vec![Snapshot { t: 0.0, surface: surface.clone() }],
        scheme: opts.scheme,
        dt,
        steps: Vec::new(),
        stopped: None,
        interpolated: false,
    };
    for step in 1..=n_steps {
        let next = match opts.scheme {
            FlowScheme::Explicit => explicit_step(&current, dt)?,
            _ => semi_implicit_step(&current, dt)?,
        };
        let max_displacement = current
            .vertices()
            .iter()
            .zip(next.vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let t = step as f64 * dt;
        let min_angle = match next.cells() {
            Cells::Triangles(_) => next.min_angle_degrees(),
            Cells::Segments(_) => 180.0,
        };
        let area = next.area();
        traj.steps.push(StepMeta {
            t,
            max_displacement,
            min_angle_degrees: min_angle,
            area,
        });
        let (lo, hi) = next.bounding_box();
        let extent = (hi - lo).max();
        let stop = if !(area.is_finite() && area >= 1e-6 * initial_area) {
            Some(StopReason::AreaExtinction)
        } else if min_angle < 1.0 {
            Some(StopReason::QualityCollapse)
        } else if extent < 10.0 * next.min_edge_length().min(min_edge0) {
            Some(StopReason::DiameterExtinction)
        } else {
            None
        };
        current = next;
        if stop.is_some() || step == n_steps || step % opts.record_every.max(1) == 0 {
            traj.snapshots.push(Snapshot { t, surface: current.clone() });
        }
        if stop.is_some() {
            traj.stopped = stop;
            break;
        }
    }
    Ok(traj)
}

fn explicit_step(surface: &DiscreteSurface, dt: f64) -> Result<DiscreteSurface> {
    let dq = differential_quantities(surface)?;
    let moved = surface
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, x)| x - (dt * dq.mean_curvature[i]) * dq.normals[i])
        .collect();
    surface.with_positions(moved)
}

fn semi_implicit_step(surface: &DiscreteSurface, dt: f64) -> Result<DiscreteSurface> {
    let n = surface.n_vertices();
    let mass = mixed_voronoi_areas(surface);
    let mut triplets: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i, mass[i])).collect();
    for ([a, b], w) in edge_weights(surface) {
        triplets.push((a, a, dt * w));
        triplets.push((b, b, dt * w));
        triplets.push((a, b, -dt * w));
        triplets.push((b, a, -dt * w));
    }
    let a = CsrMatrix::from_triplets(n, triplets);
    let v = surface.vertices();
    let mut out = v.to_vec();
    for k in 0..3 {
        let rhs: Vec<f64> = (0..n).map(|i| mass[i] * v[i][k]).collect();
        let mut x: Vec<f64> = v.iter().map(|p| p[k]).collect();
        conjugate_gradient(&a, &rhs, &mut x, 1e-12, 10 * n + 100)?;
        for i in 0..n {
            out[i][k] = x[i];
        }
    }
    surface.with_positions(out)
}

/// Extinction time R₀²/(2n) of a round sphere of dimension n.
pub fn sphere_extinction_time(r0: f64, n_dim: usize) -> f64 {
    r0 * r0 / (2.0 * n_dim as f64)
}

/// Round meshes of radius √(R₀² − 2n t) at the given times: icospheres with
/// `resolution` subdivisions for n = 2, circles with `resolution` segments
/// for n = 1.
pub fn analytic_shrinking_sphere(r0: f64, n_dim: usize, times: &[f64], resolution: usize) -> Result<FlowTrajectory> {
    if !(r0 > 0.0) || !(n_dim == 1 || n_dim == 2) {
        return Err(Error::domain("need R0 > 0 and dimension 1 or 2"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("times must be strictly increasing"));
    }
    let t_ext = sphere_extinction_time(r0, n_dim);
    let snapshots = times
        .iter()
        .map(|&t| {
            if t >= t_ext {
                return Err(Error::domain(format!("time {t} is at or past extinction {t_ext}")));
            }
            let r = (r0 * r0 - 2.0 * n_dim as f64 * t).sqrt();
            let surface = if n_dim == 2 { icosphere(resolution, r) } else { circle(resolution, r) };
            Ok(Snapshot { t, surface })
        })
        .collect::<Result<Vec<_>>>()?;
    if snapshots.is_empty() {
        return Err(Error::domain("no times requested"));
    }
    Ok(FlowTrajectory {
        snapshots,
        scheme: FlowScheme::Analytic,
        dt: 0.0,
        steps: Vec::new(),
        stopped: None,
        interpolated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures::ellipsoid;

    fn mean_radius(s: &DiscreteSurface) -> f64 {
        s.vertices().iter().map(|p| p.norm()).sum::<f64>() / s.n_vertices() as f64
    }

    #[test]
    fn sphere_shrinks_like_the_ode() {
        let s = icosphere(3, 2.0);
        let traj = evolve(&s, 1e-3, 500, FlowScheme::Explicit).unwrap();
        let r = mean_radius(&traj.last().surface);
        assert!((r - 2f64.sqrt()).abs() < 0.01 * 2f64.sqrt(), "{r}");
        let traj = evolve(&s, 1e-3, 500, FlowScheme::SemiImplicit).unwrap();
        let r = mean_radius(&traj.last().surface);
        assert!((r - 2f64.sqrt()).abs() < 0.01 * 2f64.sqrt(), "{r}");
    }

    #[test]
    fn zero_steps_returns_input() {
        let s = icosphere(2, 1.0);
        let traj = evolve(&s, 1e-3, 0, FlowScheme::Explicit).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0].surface.vertices(), s.vertices());
    }

    #[test]
    fn unstable_step_is_rejected_with_suggestion() {
        let s = icosphere(3, 2.0);
        match evolve(&s, 1.0, 10, FlowScheme::Explicit) {
            Err(Error::Timestep { dt, suggested }) => assert!(suggested < dt && suggested > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ellipsoid_rounds_off_and_loses_area() {
        let s = ellipsoid(3, [1.6, 1.2, 1.0]);
        let traj = evolve(&s, 2e-4, 1000, FlowScheme::Explicit).unwrap();
        let aspher = |s: &DiscreteSurface| {
            let c = s.area_centroid();
            let d: Vec<f64> = s.vertices().iter().map(|p| (p - c).norm()).collect();
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            (d.iter().copied().fold(0.0, f64::max) - d.iter().copied().fold(f64::INFINITY, f64::min)) / mean
        };
        let values: Vec<f64> = traj.snapshots.iter().step_by(100).map(|s| aspher(&s.surface)).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
        let mut prev = s.area();
        for m in &traj.steps {
            assert!(m.area <= prev * (1.0 + 1e-6));
            prev = m.area;
        }
    }

    #[test]
    fn analytic_sphere_radii() {
        let traj = analytic_shrinking_sphere(2.0, 2, &[0.0, 0.75], 2).unwrap();
        assert!((mean_radius(&traj.snapshots[0].surface) - 2.0).abs() < 1e-12);
        assert!((mean_radius(&traj.snapshots[1].surface) - 1.0).abs() < 1e-12);
        assert_eq!(sphere_extinction_time(2.0, 2), 1.0);
        assert!(analytic_shrinking_sphere(2.0, 2, &[1.0], 2).is_err());
    }
}
