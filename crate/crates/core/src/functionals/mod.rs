//! Gaussian F-functionals, entropy, local entropy and area growth.

mod density;
mod entropy;
mod volume;

pub use density::{f_functional, f_functional_with, f_gradient, FGradient, GaussianDensity};
pub use entropy::{
    entropy, local_entropy, rescaled_local_entropy_check, EntropyOptions, EntropyWitness, RescaleCheck,
    ScaleWindow, SpatialDomain,
};
pub use volume::{ball_mass, volume_growth, volume_growth_over, VolumeGrowth};
