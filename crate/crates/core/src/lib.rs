//! Radicals, triple decompositions and exponentially distorted length
//! functions for linear complex Lie groups given by structure constants and
//! a matrix representation.

pub mod algebra;
pub mod decomposition;
pub mod distortion;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod io;
pub mod length;
pub mod linalg;
pub mod par;
pub mod pi;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
