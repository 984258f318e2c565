use crate::error::{Error, Result};
use crate::flow::evolve::{FlowTrajectory, Snapshot};
use crate::geometry::{DiscreteSurface, Vec3};

/// The parabolic rescaling M_t ↦ α(M_{s + α⁻²t} − y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescalingParams {
    pub alpha: f64,
    pub y: Vec3,
    pub s: f64,
}

impl RescalingParams {
    pub fn new(alpha: f64, y: Vec3, s: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { alpha, y, s })
    }

    pub fn identity() -> Self {
        Self {
            alpha: 1.0,
            y: Vec3::zeros(),
            s: 0.0,
        }
    }

    /// Original time of rescaled time t.
    pub fn original_time(&self, t: f64) -> f64 {
        self.s + t / (self.alpha * self.alpha)
    }

    pub fn rescaled_time(&self, t: f64) -> f64 {
        self.alpha * self.alpha * (t - self.s)
    }
}

/// Every snapshot mapped to time α²(t − s) and position α(x − y).
pub fn parabolic_rescale(traj: &FlowTrajectory, p: &RescalingParams) -> FlowTrajectory {
    FlowTrajectory {
        snapshots: traj
            .snapshots
            .iter()
            .map(|s| Snapshot {
                t: p.rescaled_time(s.t),
                surface: s.surface.rescaled(p.alpha, &p.y),
            })
            .collect(),
        scheme: traj.scheme,
        dt: traj.dt * p.alpha * p.alpha,
        steps: traj.steps.clone(),
        stopped: traj.stopped,
        interpolated: traj.interpolated,
    }
}

/// The surface at time t, interpolated linearly in vertex positions between
/// bracketing snapshots. The flag is true when interpolation was needed.
pub fn slice_at(traj: &FlowTrajectory, t: f64) -> Result<(DiscreteSurface, bool)> {
    let snaps = &traj.snapshots;
    let (first, last) = (snaps[0].t, traj.last().t);
    if !(t >= first && t <= last) {
        return Err(Error::domain(format!("time {t} outside trajectory range [{first}, {last}]")));
    }
    if let Some(s) = snaps.iter().find(|s| s.t == t) {
        return Ok((s.surface.clone(), false));
    }
    let k = snaps.partition_point(|s| s.t < t);
    let (a, b) = (&snaps[k - 1], &snaps[k]);
    if a.surface.n_vertices() != b.surface.n_vertices() {
        return Err(Error::domain("cannot interpolate between snapshots with different connectivity"));
    }
    let w = (t - a.t) / (b.t - a.t);
    let pos = a
        .surface
        .vertices()
        .iter()
        .zip(b.surface.vertices())
        .map(|(p, q)| p + w * (q - p))
        .collect();
    Ok((a.surface.with_positions(pos)?, true))
}

/// The rescaled flow at rescaled time t: α(M_{s+α⁻²t} − y).
pub fn rescaled_slice(traj: &FlowTrajectory, p: &RescalingParams, t: f64) -> Result<(DiscreteSurface, bool)> {
    let (surface, interpolated) = slice_at(traj, p.original_time(t))?;
    Ok((surface.rescaled(p.alpha, &p.y), interpolated))
}

/// Symmetric Hausdorff distance between the vertex sets of two meshes
/// against the other's triangles.
pub fn hausdorff_distance(a: &DiscreteSurface, b: &DiscreteSurface) -> f64 {
    use crate::geometry::bvh::Bvh;
    let one_way = |from: &DiscreteSurface, to: &DiscreteSurface| {
        let bvh = Bvh::new(to);
        from.vertices()
            .iter()
            .map(|p| bvh.closest_point(p).map_or(f64::INFINITY, |c| c.distance))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}
