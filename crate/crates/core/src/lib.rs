//! Numerical tools for Gaussian entropy of weighted surfaces under mean
//! curvature flow: F-functionals, entropy and local entropy, discrete flow,
//! entropy-reducing perturbations and multi-sheet layer diagnostics.

pub mod config;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod instability;
pub mod layers;
pub mod linalg;
pub mod pipeline;
pub mod quadrature;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{DiscreteSurface, Vec3, WeightedSurfaceMeasure};
