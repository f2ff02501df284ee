//! Weighted unions of group orbits as projective and spherical designs.
//!
//! Build a finite matrix group, take orbits of seed vectors as line sets,
//! and solve for the weighting that makes a union of two orbits a design of
//! higher strength.

pub mod designs;
pub mod error;
pub mod groups;
pub mod numerics;
pub mod orbits;
pub mod pairscan;
pub mod unions;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use groups::{FiniteMatrixGroup, GroupSpec, build_group};
pub use numerics::Tolerance;
pub use orbits::LineSet;
