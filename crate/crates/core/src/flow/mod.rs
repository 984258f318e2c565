//! Mean curvature flow of discrete surfaces and the monotone quantities,
//! rescalings and barriers built on it.

mod barrier;
mod evolve;
mod extinction;
mod monotonicity;
mod rescale;
mod store;

pub use barrier::{barrier_certificate, BarrierCertificate, Verdict};
pub use evolve::{
    analytic_shrinking_sphere, evolve, evolve_with, sphere_extinction_time, stable_timestep, FlowOptions, FlowScheme,
    FlowTrajectory, Snapshot, StepMeta, StopReason,
};
pub use extinction::{extinction_lower_bound, ExtinctionBound};
pub use monotonicity::{monotonicity_report, MonotonicityReport, MONOTONICITY_TOL};
pub use rescale::{hausdorff_distance, parabolic_rescale, rescaled_slice, slice_at, RescalingParams};
pub use store::write_trajectory;
