//! Incremental sampling-based informative path planning.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation over grid worlds, belief maps and Gaussian processes; file
//! formats and the command line live in the `iig` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod belief;
pub mod error;
pub mod geometry;
pub mod gp;
pub mod info;
pub mod linalg;
pub mod mission;
pub mod path;
pub mod planner;
pub mod pose;
pub mod spatial;
pub mod worlds;

pub use error::{Error, Result};
pub use geometry::{GridGeometry, GridWorld, Point2, SeededRng};
pub use spatial::SpatialIndex;
