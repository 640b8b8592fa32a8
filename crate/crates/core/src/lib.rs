//! Sharp-threshold experiments for random geometric graphs.
//!
//! The crate samples points in the unit cube, builds geometric graphs,
//! computes exact per-sample entry radii of increasing properties, solves
//! bottleneck bipartite matchings (exactly and by recursive subdivision),
//! and estimates threshold locations and widths by Monte Carlo.

pub mod error;
pub mod format;
pub mod geom;
pub mod graphs;
pub mod matching;
pub mod properties;
pub mod rng;
pub mod stats;
pub mod thresholds;

pub use error::{Error, Result};
pub use geom::{Norm, PointSet};
