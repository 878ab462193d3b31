//! Polynomial and trigonometric vector-field frames on a chart, their
//! brackets, and the anchor map from the free nilpotent algebra.

mod chart;
mod field;
mod poly;

pub use chart::{Frame, HormanderReport, Point};
pub use field::{vf_bracket, CompiledField, PolyVF};
pub use poly::{CPoly, CompiledPoly, Monomial, Phase, Poly};
