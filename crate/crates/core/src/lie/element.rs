use std::ops::{Add, Index, Neg, Sub};

use crate::error::{Error, Result};
use crate::rational::{Scalar, Q};

use super::hall::{Entry, HallBasis};

/// Scalars with access to the matching cached copy of the structure constants.
pub trait LieScalar: Scalar {
    fn structure(basis: &HallBasis) -> &[Entry<Self>];
    fn dynkin(basis: &HallBasis) -> Option<&[(Vec<u8>, Self)]>;
}

impl LieScalar for Q {
    fn structure(basis: &HallBasis) -> &[Entry<Self>] {
        &basis.entries_q
    }
    fn dynkin(basis: &HallBasis) -> Option<&[(Vec<u8>, Self)]> {
        basis.bch_q.as_deref()
    }
}

impl LieScalar for f64 {
    fn structure(basis: &HallBasis) -> &[Entry<Self>] {
        &basis.entries_f
    }
    fn dynkin(basis: &HallBasis) -> Option<&[(Vec<u8>, Self)]> {
        basis.bch_f.as_deref()
    }
}

/// Element of `g` in Hall coordinates; doubles as exponential coordinates on `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement<S = Q> {
    coords: Vec<S>,
}

/// Element of `g*` in the dual basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional<S = Q> {
    coords: Vec<S>,
}

macro_rules! coord_vector {
    ($ty:ident) => {
        impl<S: Scalar> $ty<S> {
            pub fn new(coords: Vec<S>) -> Self {
                Self { coords }
            }

            pub fn zero(dim: usize) -> Self {
                Self {
                    coords: vec![S::zero(); dim],
                }
            }

            /// The `k`-th basis vector.
            pub fn basis(dim: usize, k: usize) -> Self {
                let mut v = Self::zero(dim);
                v.coords[k] = S::one();
                v
            }

            pub fn coords(&self) -> &[S] {
                &self.coords
            }

            pub fn into_coords(self) -> Vec<S> {
                self.coords
            }

            pub fn len(&self) -> usize {
                self.coords.len()
            }

            pub fn is_empty(&self) -> bool {
                self.coords.is_empty()
            }

            pub fn is_zero(&self) -> bool {
                self.coords.iter().all(|c| c.is_zero())
            }

            pub fn scale(&self, s: &S) -> Self {
                Self {
                    coords: self.coords.iter().map(|c| c.clone() * s.clone()).collect(),
                }
            }

            pub fn check_dim(&self, basis: &HallBasis) -> Result<()> {
                if self.coords.len() != basis.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: basis.dim(),
                        found: self.coords.len(),
                    });
                }
                Ok(())
            }
        }

        impl<S: Scalar> Index<usize> for $ty<S> {
            type Output = S;
            fn index(&self, k: usize) -> &S {
                &self.coords[k]
            }
        }

        impl<S: Scalar> Add for &$ty<S> {
            type Output = $ty<S>;
            fn add(self, rhs: Self) -> $ty<S> {
                $ty {
                    coords: self
                        .coords
                        .iter()
                        .zip(&rhs.coords)
                        .map(|(a, b)| a.clone() + b.clone())
                        .collect(),
                }
            }
        }

        impl<S: Scalar> Sub for &$ty<S> {
            type Output = $ty<S>;
            fn sub(self, rhs: Self) -> $ty<S> {
                $ty {
                    coords: self
                        .coords
                        .iter()
                        .zip(&rhs.coords)
                        .map(|(a, b)| a.clone() - b.clone())
                        .collect(),
                }
            }
        }

        impl<S: Scalar> Neg for &$ty<S> {
            type Output = $ty<S>;
            fn neg(self) -> $ty<S> {
                $ty {
                    coords: self.coords.iter().map(|a| -a.clone()).collect(),
                }
            }
        }
    };
}

coord_vector!(LieElement);
coord_vector!(Functional);

impl LieElement<Q> {
    pub fn to_f64(&self) -> LieElement<f64> {
        LieElement::new(self.coords.iter().map(f64::from_q).collect())
    }
}

impl Functional<Q> {
    pub fn to_f64(&self) -> Functional<f64> {
        Functional::new(self.coords.iter().map(f64::from_q).collect())
    }
}

impl<S: Scalar> Functional<S> {
    /// Pairing `<xi, v>`.
    pub fn pair(&self, v: &LieElement<S>) -> S {
        self.coords
            .iter()
            .zip(v.coords())
            .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }
}

/// Bracket on raw coordinate slices; callers check lengths.
pub(crate) fn bracket_raw<S: LieScalar>(basis: &HallBasis, a: &[S], b: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); a.len()];
    for e in S::structure(basis) {
        let (ai, aj, bi, bj) = (&a[e.i], &a[e.j], &b[e.i], &b[e.j]);
        if (ai.is_zero() || bj.is_zero()) && (aj.is_zero() || bi.is_zero()) {
            continue;
        }
        let v = ai.clone() * bj.clone() - aj.clone() * bi.clone();
        out[e.k] = out[e.k].clone() + e.c.clone() * v;
    }
    out
}

/// Lie bracket, bilinear extension of the structure constants.
pub fn bracket<S: LieScalar>(
    basis: &HallBasis,
    a: &LieElement<S>,
    b: &LieElement<S>,
) -> Result<LieElement<S>> {
    a.check_dim(basis)?;
    b.check_dim(basis)?;
    Ok(LieElement::new(bracket_raw(basis, &a.coords, &b.coords)))
}

/// Graded dilation: the coordinate of a degree-`d` word is multiplied by `t^d`.
pub fn dilate<S: LieScalar + PartialOrd>(
    basis: &HallBasis,
    t: &S,
    a: &LieElement<S>,
) -> Result<LieElement<S>> {
    a.check_dim(basis)?;
    if *t <= S::zero() {
        return Err(Error::NonPositiveDilation(format!("{t:?}")));
    }
    Ok(LieElement::new(dilate_raw(basis, t, &a.coords)))
}

pub(crate) fn dilate_raw<S: Scalar>(basis: &HallBasis, t: &S, a: &[S]) -> Vec<S> {
    let mut powers = vec![S::one()];
    for d in 1..=basis.step() {
        let p = powers[d - 1].clone() * t.clone();
        powers.push(p);
    }
    a.iter()
        .zip(basis.words())
        .map(|(c, w)| c.clone() * powers[w.degree].clone())
        .collect()
}

/// Matrix of `ad_g` acting on coordinates: column `j` is `[g, b_j]`.
pub fn ad_matrix<S: LieScalar>(basis: &HallBasis, g: &LieElement<S>) -> Result<Vec<Vec<S>>> {
    g.check_dim(basis)?;
    let dim = basis.dim();
    let mut m = vec![vec![S::zero(); dim]; dim];
    for e in S::structure(basis) {
        // [g, b_j] picks c_{ij}^k g_i for j = e.j and -c g_j for j = e.i
        let gi = &g.coords[e.i];
        let gj = &g.coords[e.j];
        if !gi.is_zero() {
            m[e.k][e.j] = m[e.k][e.j].clone() + e.c.clone() * gi.clone();
        }
        if !gj.is_zero() {
            m[e.k][e.i] = m[e.k][e.i].clone() - e.c.clone() * gj.clone();
        }
    }
    Ok(m)
}

/// `exp(ad_g) v = sum_k ad_g^k v / k!`, finite by nilpotency.
pub fn exp_ad<S: LieScalar>(
    basis: &HallBasis,
    g: &LieElement<S>,
    v: &LieElement<S>,
) -> Result<LieElement<S>> {
    g.check_dim(basis)?;
    v.check_dim(basis)?;
    let mut term = v.coords.clone();
    let mut out = v.coords.clone();
    let mut k = S::zero();
    for _ in 1..basis.step() {
        k = k + S::one();
        term = bracket_raw(basis, &g.coords, &term)
            .into_iter()
            .map(|t| t / k.clone())
            .collect();
        if term.iter().all(|c| c.is_zero()) {
            break;
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o = o.clone() + t.clone();
        }
    }
    Ok(LieElement::new(out))
}

/// Adjoint action `Ad_g v = exp(ad_g) v`.
pub fn adjoint<S: LieScalar>(
    basis: &HallBasis,
    g: &LieElement<S>,
    v: &LieElement<S>,
) -> Result<LieElement<S>> {
    exp_ad(basis, g, v)
}
