//! Numerical laboratory for the two-dimensional compressible boundary-layer
//! system with a thermal layer, its tangential-viscosity regularization,
//! and the Littlewood-Paley / weighted-Besov machinery used to track the
//! tangential analyticity radius of its solutions.

pub mod config;
pub mod error;
pub mod fd;
pub mod grid;
pub mod lpaley;
pub mod mms;
pub mod phase;
pub mod report;
pub mod snapshot;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Field, Grid, GridRef, SpectralField};
