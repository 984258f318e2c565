//! Entropy-decreasing perturbations of a shrinker and of a multi-sheet slice
//! over it: the unstable direction, its localization away from given
//! points, the normal-collar isotopy, and numerical checks of the drop.

mod cutoff;
mod direction;
mod drop;
mod isotopy;
mod perturb;

pub use cutoff::{cutoff_function, cutoff_profile, graph_area_defect, localize_field, smoothstep5, CutoffSpec};
pub use direction::{
    asphericity, unstable_direction, UnstableDirection, EIGEN_TOLERANCE, ROUND_TOLERANCE, SHRINKER_TOLERANCE,
};
pub use drop::{entropy_drop_ladder, verify_entropy_drop, DropLadder, DropReport, LadderEntry};
pub use isotopy::{graph_isotopy, CollarProfile, IsotopyImage, IsotopyParams};
pub use perturb::perturb_top_layer;
