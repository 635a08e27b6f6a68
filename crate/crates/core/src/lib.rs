//! Planar toolkit for overdetermined infinity-Laplacian boundary value problems.
//!
//! The crate builds the explicit web-function solutions of the classical and
//! normalized infinity-Laplacian problems `-Δ∞u = 1`, `u = 0`, `-∂u/∂ν = a`,
//! extracts the ridge (cut locus) and the set of deepest points of a domain,
//! and checks numerically when such solutions exist. It also solves the
//! p-Laplacian torsion problem and tracks its convergence to the distance
//! function as `p` grows.

pub mod cli;
pub mod eikonal;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod plaplace;
pub mod ridge;
pub mod verify;
pub mod web;

pub use error::{Error, Result};
