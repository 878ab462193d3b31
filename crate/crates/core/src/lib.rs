//! Lie-algebraic and spectral invariants of bracket-generating frames:
//! free nilpotent algebras, tangent cones, symbols on nilpotent-group
//! representations, sub-Riemannian distances and maximal estimates.

pub mod cones;
pub mod error;
pub mod estimates;
pub mod frame;
pub mod lie;
pub mod linalg;
pub mod metric;
pub mod model;
pub mod rational;
pub mod symbols;

pub use error::{Error, Result};
