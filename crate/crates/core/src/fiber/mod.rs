//! Fiber maps on the closed unit ball: simplex contractions, the radial
//! repellor and their base-dependent blend.

pub mod blend;
pub mod family;
pub mod profile;
pub mod simplex;

pub use blend::{
    average_log_lipschitz, blend, blend_weights, fiber_map, lipschitz_in_base_estimate,
    lipschitz_in_x, AverageLogLipschitz, BlendWeights, FiberMap,
};
pub use family::{make_family, FiberMapFamily};
pub use profile::RadialProfile;
pub use simplex::{circumradius, simplex_vertices};
