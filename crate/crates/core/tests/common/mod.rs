#![allow(dead_code)]

pub mod oracles;

use hypocone::frame::{CPoly, Frame, Poly, PolyVF};
use hypocone::rational::{qi, Q};
use hypocone::symbols::NCPoly;

pub fn grushin() -> Frame {
    let x1 = PolyVF::coordinate(2, 0);
    let x2 = PolyVF::new(vec![Poly::zero(2), Poly::var(2, 0)]).unwrap();
    Frame::new(2, vec![x1, x2], 2).unwrap()
}

pub fn elliptic() -> Frame {
    Frame::new(2, vec![PolyVF::coordinate(2, 0), PolyVF::coordinate(2, 1)], 1).unwrap()
}

/// `X1^2 + X2^2 + i ell (X1 X2 - X2 X1)` with constant `ell`.
pub fn d_ell(ell: Q) -> NCPoly {
    let one = CPoly::real(Poly::one(2));
    let c = CPoly::constant(2, qi(0), ell.clone());
    NCPoly::zero(2, 2)
        .with_term(one.clone(), &[0, 0])
        .unwrap()
        .with_term(one, &[1, 1])
        .unwrap()
        .with_term(c.clone(), &[0, 1])
        .unwrap()
        .with_term(&CPoly::zero(2) - &c, &[1, 0])
        .unwrap()
}
