//! Noncommutative operator polynomials, representations of the osculating
//! group, principal symbols and the injectivity test.

mod diffop;
mod ncpoly;
mod rep;
mod symbol;

pub use diffop::{expand_operator, DiffOp};
pub use ncpoly::NCPoly;
pub use rep::{dpi, hermite_derivative, hermite_position, interior_size, Representation, SymbolOperator};
pub use symbol::{
    check_max_hypoelliptic, injectivity_margin, presentation_gap, rational_sphere, symbol, HypoOptions,
    HypoReport, PointVerdict, RepCatalog, RepMargin,
};
