use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::frame::{CPoly, Frame, PolyVF};

use super::ncpoly::NCPoly;

/// Linear differential operator `sum_a c_a(x) d^a` in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, CPoly>,
}

impl DiffOp {
    pub fn zero(nvars: usize) -> Self {
        DiffOp {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(nvars: usize) -> Self {
        let mut d = DiffOp::zero(nvars);
        d.add(vec![0; nvars], CPoly::real(crate::frame::Poly::one(nvars)));
        d
    }

    fn add(&mut self, alpha: Vec<u32>, c: CPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(alpha.clone()).or_insert_with(|| CPoly::zero(c.nvars()));
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &CPoly)> {
        self.terms.iter().map(|(a, c)| (a.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.iter().sum()).max()
    }

    /// Coefficient of `d^alpha`.
    pub fn coefficient(&self, alpha: &[u32]) -> CPoly {
        self.terms.get(alpha).cloned().unwrap_or_else(|| CPoly::zero(self.nvars))
    }

    /// `X o self`.
    pub fn apply_field(&self, x: &PolyVF) -> DiffOp {
        let mut out = DiffOp::zero(self.nvars);
        for (alpha, c) in &self.terms {
            for (j, a) in x.components().iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                out.add(alpha.clone(), c.derivative(j).mul_real(a));
                let mut beta = alpha.clone();
                beta[j] += 1;
                out.add(beta, c.mul_real(a));
            }
        }
        out
    }

    /// `c o self` for a multiplication operator `c`.
    pub fn left_mul(&self, c: &CPoly) -> DiffOp {
        let mut out = DiffOp::zero(self.nvars);
        for (alpha, a) in &self.terms {
            out.add(alpha.clone(), c * a);
        }
        out
    }

    pub fn sum(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add(alpha.clone(), c.clone());
        }
        out
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(alpha, c)| {
                let d: Vec<String> = alpha
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| if e == 1 { format!("d{}", j + 1) } else { format!("d{}^{}", j + 1, e) })
                    .collect();
                if d.is_empty() {
                    format!("[{c}]")
                } else {
                    format!("[{c}]*{}", d.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The differential operator `P(X_1, ..., X_n)` defined by the frame.
pub fn expand_operator(frame: &Frame, p: &NCPoly) -> Result<DiffOp> {
    if p.generators() != frame.generators() || p.nvars() != frame.dimension() {
        return Err(Error::DimensionMismatch {
            expected: frame.generators(),
            found: p.generators(),
        });
    }
    let m = frame.dimension();
    let mut total = DiffOp::zero(m);
    for (w, c) in p.terms() {
        let mut op = DiffOp::identity(m);
        for &g in w.iter().rev() {
            op = op.apply_field(&frame.fields()[g]);
        }
        total = total.sum(&op.left_mul(c));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Poly;
    use crate::rational::qi;

    #[test]
    fn grushin_operator_expands() {
        let x1 = PolyVF::coordinate(2, 0);
        let x2 = PolyVF::new(vec![Poly::zero(2), Poly::var(2, 0)]).unwrap();
        let f = Frame::new(2, vec![x1, x2], 2).unwrap();
        let one = CPoly::real(Poly::one(2));
        let ell = CPoly::constant(2, qi(0), qi(3));
        let p = NCPoly::zero(2, 2)
            .with_term(one.clone(), &[0, 0])
            .unwrap()
            .with_term(one, &[1, 1])
            .unwrap()
            .with_term(ell.clone(), &[0, 1])
            .unwrap()
            .with_term(&CPoly::zero(2) - &ell, &[1, 0])
            .unwrap();
        let d = expand_operator(&f, &p).unwrap();
        assert_eq!(d.coefficient(&[2, 0]), CPoly::real(Poly::one(2)));
        assert_eq!(d.coefficient(&[0, 2]), CPoly::real(Poly::monomial(2, qi(1), vec![2, 0])));
        assert_eq!(d.coefficient(&[0, 1]), ell);
        assert_eq!(d.terms().count(), 3);
    }
}
