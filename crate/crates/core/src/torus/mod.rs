//! The base dynamics: the hyperbolic toral automorphism, its Markov
//! partition, symbolic words and exact periodic points.

pub mod anosov;
pub mod lattice;
pub mod partition;
pub mod point;
pub mod symbolic;

pub use anosov::{make_anosov, AnosovMap, Direction, UnstableSegment};
pub use partition::{
    build_partition, select_marked_rectangles, EigenBox, MarkedRectangles, MarkovPartition,
    MarkovRectangle,
};
pub use point::{torus_distance, ExactPoint, TorusPoint};
pub use symbolic::{
    enumerate_periodic_words, fixed_point_census, periodic_point_from_word, PeriodicOrbit,
    SymbolicWord,
};
