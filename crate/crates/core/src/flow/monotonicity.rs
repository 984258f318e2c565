use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::evolve::FlowTrajectory;
use crate::functionals::GaussianDensity;
use crate::geometry::Vec3;
use crate::quadrature::QuadratureRule;

/// Relative tolerance for an increase between consecutive samples.
pub const MONOTONICITY_TOL: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub x0: [f64; 3],
    pub t_ref: f64,
    /// (t, F_{x₀, t_ref − t}(M_t)).
    pub samples: Vec<(f64, f64)>,
    /// Indices k with F_k > F_{k−1}(1 + tol).
    pub violations: Vec<usize>,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,F\n");
        for (t, f) in &self.samples {
            writeln!(out, "{t:.16e},{f:.16e}").unwrap();
        }
        out
    }
}

/// Gaussian density ratios toward the spacetime point (x₀, t_ref).
pub fn monotonicity_report(traj: &FlowTrajectory, x0: &Vec3, t_ref: f64) -> Result<MonotonicityReport> {
    let t_max = traj.last().t;
    if !(t_ref > t_max) {
        return Err(Error::domain(format!("reference time {t_ref} must exceed the last snapshot time {t_max}")));
    }
    let samples: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| {
            let d = GaussianDensity::new(&s.surface.clone().into(), QuadratureRule::default());
            (s.t, d.value(x0, t_ref - s.t))
        })
        .collect();
    let violations = (1..samples.len())
        .filter(|&k| samples[k].1 > samples[k - 1].1 * (1.0 + MONOTONICITY_TOL))
        .collect();
    Ok(MonotonicityReport {
        x0: [x0.x, x0.y, x0.z],
        t_ref,
        samples,
        violations,
    })
}
