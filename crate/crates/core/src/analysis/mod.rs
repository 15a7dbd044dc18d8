//! Measurements of the attractor: bones, graph part, dimension bounds,
//! large deviations and likely-limit sampling.

pub mod bones;
pub mod classify;
pub mod deviation;
pub mod dimension;
pub mod fit;
pub mod likely;

pub use bones::{
    bone_check, bone_persistence, bone_propagate, bone_propagate_unstable, repellor_labels,
    repellor_words, BoneCertificate, PropagatedBone,
};
pub use classify::{classify_fiber, Class, Evidence, FiberClass};
pub use deviation::{large_deviation_beta, LargeDeviation};
pub use dimension::{
    box_count, choose_delta, dimension_bound, dimension_report, plaque_spread_constant, BoxCount,
    DimensionReport,
};
pub use likely::{likely_limit_sample, LikelyLimitReport};
