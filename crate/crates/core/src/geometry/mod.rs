//! Discrete surfaces and curves, weighted measures and the differential
//! quantities computed on them.

mod surface;

pub mod bvh;
pub mod differential;
pub mod embedding;
pub mod fixtures;
pub mod geodesic;
pub mod io;
pub mod measure;
pub mod normal_graph;

pub use differential::{differential_quantities, shrinker_residual, DifferentialQuantities};
pub use embedding::{check_embedded, EmbeddingReport};
pub use geodesic::geodesic_distance;
pub use measure::WeightedSurfaceMeasure;
pub use normal_graph::{build_normal_graph, FieldNorms, PerturbationField};
pub use surface::*;
