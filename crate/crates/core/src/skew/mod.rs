//! The skew product and approximations of its fiber slices.

pub mod cover;
pub mod system;

pub use cover::{slice_diameter, Ball, SliceCover};
pub use system::{AssemblyFlags, SkewSystem};
