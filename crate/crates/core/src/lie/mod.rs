//! Free nilpotent Lie algebras in exact arithmetic: Hall basis, bracket,
//! graded dilations, the group law and the (co)adjoint actions.

mod bch;
mod coadjoint;
mod element;
mod hall;

pub use bch::{bch, inverse};
pub use coadjoint::{coadjoint, orbit_dimension, orbit_form, orbit_map_rank_at};
pub use element::{
    ad_matrix, adjoint, bracket, dilate, exp_ad, Functional, LieElement, LieScalar,
};
pub(crate) use element::{bracket_raw, dilate_raw};
pub use hall::{Entry, HallBasis, HallWord, DEFAULT_DIMENSION_CAP, MAX_BCH_STEP};

/// Shorthand for [`HallBasis::new`].
pub fn build_free_nilpotent(generators: usize, step: usize) -> crate::Result<HallBasis> {
    HallBasis::new(generators, step)
}
