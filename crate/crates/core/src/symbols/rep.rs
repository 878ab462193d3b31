use std::fmt;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::HallBasis;
use crate::rational::{fmt_q, to_f64, Q};

/// Differentiated unitary representation, given by the images of the
/// Hall basis elements.
#[derive(Debug, Clone)]
pub enum Representation {
    /// One-dimensional: generator `j` acts by `i mu_j`, brackets by zero.
    Character { mu: Vec<Q> },
    /// Two generators: `X1 -> eps sqrt(s) d/dt`, `X2 -> i sqrt(s) t`,
    /// `[X1,X2] -> i eps s`, higher brackets by zero; truncated to the
    /// first `dim` Hermite functions.
    Schrodinger { eps: i8, dim: usize, scale: f64 },
    /// Explicit `K x K` images, one per Hall basis element.
    Custom { images: Vec<DMatrix<Complex64>>, tol: f64 },
}

impl Representation {
    pub fn character(mu: Vec<Q>) -> Self {
        Representation::Character { mu }
    }

    pub fn schrodinger(eps: i8, dim: usize) -> Self {
        Representation::Schrodinger { eps, dim, scale: 1.0 }
    }

    /// Checks the commutation relations before accepting the images.
    pub fn custom(hall: &HallBasis, images: Vec<DMatrix<Complex64>>, tol: f64) -> Result<Self> {
        let rep = Representation::Custom { images, tol };
        rep.validate(hall)?;
        Ok(rep)
    }

    pub fn dim(&self) -> usize {
        match self {
            Representation::Character { .. } => 1,
            Representation::Schrodinger { dim, .. } => *dim,
            Representation::Custom { images, .. } => images.first().map_or(0, |m| m.nrows()),
        }
    }

    pub fn is_character(&self) -> bool {
        matches!(self, Representation::Character { .. })
    }

    /// Point of the coadjoint orbit attached to the representation, with
    /// `dpi(X) = i xi(X)` on characters; `None` for custom images.
    pub fn orbit_functional(&self, hall: &HallBasis) -> Option<Vec<f64>> {
        let mut xi = vec![0.0; hall.dim()];
        match self {
            Representation::Character { mu } => {
                for (j, m) in mu.iter().enumerate() {
                    xi[hall.generator_index(j)] = to_f64(m);
                }
            }
            Representation::Schrodinger { eps, scale, .. } => {
                let k = bracket12(hall)?;
                xi[k] = *eps as f64 * scale;
            }
            Representation::Custom { .. } => return None,
        }
        Some(xi)
    }

    pub fn validate(&self, hall: &HallBasis) -> Result<()> {
        match self {
            Representation::Character { mu } => {
                if mu.len() != hall.generators() {
                    return Err(Error::DimensionMismatch {
                        expected: hall.generators(),
                        found: mu.len(),
                    });
                }
                Ok(())
            }
            Representation::Schrodinger { eps, dim, scale } => {
                if hall.generators() != 2 || bracket12(hall).is_none() {
                    return Err(Error::InvalidArgument(
                        "Schrodinger images need two generators and step at least 2".into(),
                    ));
                }
                if eps.abs() != 1 || *dim < 2 || !(*scale > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "Schrodinger parameters eps = {eps}, K = {dim}, scale = {scale}"
                    )));
                }
                Ok(())
            }
            Representation::Custom { images, tol } => {
                if images.len() != hall.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: hall.dim(),
                        found: images.len(),
                    });
                }
                let k = self.dim();
                if images.iter().any(|m| m.nrows() != k || m.ncols() != k) {
                    return Err(Error::InvalidArgument("custom images must be square of equal size".into()));
                }
                if images.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
                    return Err(Error::InvalidArgument("custom images have non-finite entries".into()));
                }
                let defect = self.consistency_defect(hall, 1.0)?;
                if defect > *tol {
                    return Err(Error::InconsistentRepresentation { defect, tol: *tol });
                }
                Ok(())
            }
        }
    }

    /// Largest entry of `[dpi(b_i), dpi(b_j)] - sum_k c_ij^k dpi(b_k)` on
    /// the leading `fraction * K` block.
    pub fn consistency_defect(&self, hall: &HallBasis, fraction: f64) -> Result<f64> {
        let images = (0..hall.dim())
            .map(|k| dpi(self, hall, k).map(|s| s.to_matrix(self.dim())))
            .collect::<Result<Vec<_>>>()?;
        let n = interior_size(self.dim(), fraction);
        let mut worst = 0.0f64;
        for i in 0..hall.dim() {
            for j in i + 1..hall.dim() {
                let mut c = &images[i] * &images[j] - &images[j] * &images[i];
                for k in 0..hall.dim() {
                    let s = hall.structure_constant(i, j, k);
                    if !s.is_zero() {
                        c -= &images[k] * Complex64::new(to_f64(&s), 0.0);
                    }
                }
                let block = c.view((0, 0), (n, n));
                worst = worst.max(block.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Character { mu } => {
                write!(f, "char({})", mu.iter().map(fmt_q).collect::<Vec<_>>().join(","))
            }
            Representation::Schrodinger { eps, dim, scale } => {
                let sign = if *eps > 0 { "+" } else { "-" };
                if *scale == 1.0 {
                    write!(f, "schrodinger({sign}1,K={dim})")
                } else {
                    write!(f, "schrodinger({sign}1,K={dim},scale={scale})")
                }
            }
            Representation::Custom { images, .. } => write!(f, "custom(K={})", images.first().map_or(0, |m| m.nrows())),
        }
    }
}

/// Number of leading basis functions treated as free of truncation effects.
pub fn interior_size(k: usize, fraction: f64) -> usize {
    ((fraction * k as f64).floor() as usize).clamp(1, k.max(1))
}

fn bracket12(hall: &HallBasis) -> Option<usize> {
    if hall.generators() < 2 || hall.step() < 2 {
        return None;
    }
    hall.index_of(&[0, 1])
}

/// Value of a symbol: a scalar for characters, a truncated matrix otherwise.
#[derive(Debug, Clone)]
pub enum SymbolOperator {
    Scalar {
        value: Complex64,
        exact: Option<Complex<Q>>,
    },
    Matrix(DMatrix<Complex64>),
}

impl SymbolOperator {
    pub fn exact_scalar(v: Complex<Q>) -> Self {
        SymbolOperator::Scalar {
            value: Complex64::new(to_f64(&v.re), to_f64(&v.im)),
            exact: Some(v),
        }
    }

    pub fn to_matrix(&self, k: usize) -> DMatrix<Complex64> {
        match self {
            SymbolOperator::Scalar { value, .. } => DMatrix::from_diagonal_element(k, k, *value),
            SymbolOperator::Matrix(m) => m.clone(),
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, SymbolOperator::Scalar { .. })
    }

    /// Eigenvalues of the leading `fraction * K` block, sorted by real part
    /// in decreasing order.
    pub fn interior_eigenvalues(&self, fraction: f64) -> Vec<Complex64> {
        match self {
            SymbolOperator::Scalar { value, .. } => vec![*value],
            SymbolOperator::Matrix(m) => {
                let n = interior_size(m.nrows(), fraction);
                let block = m.view((0, 0), (n, n)).into_owned();
                let hermitian = (&block - block.adjoint()).iter().all(|z| z.norm() < 1e-12);
                let mut ev: Vec<Complex64> = if hermitian {
                    block
                        .symmetric_eigen()
                        .eigenvalues
                        .iter()
                        .map(|r| Complex64::new(*r, 0.0))
                        .collect()
                } else {
                    match block.clone().schur().eigenvalues() {
                        Some(e) => e.iter().copied().collect(),
                        None => Vec::new(),
                    }
                };
                ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
                ev
            }
        }
    }
}

/// Matrix of `t` in the first `k` Hermite functions.
pub fn hermite_position(k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| {
        if j == i + 1 || i == j + 1 {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// Matrix of `d/dt` in the first `k` Hermite functions.
pub fn hermite_derivative(k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| {
        if j == i + 1 {
            (j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            -(i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

fn complexify(m: &DMatrix<f64>, c: Complex64) -> DMatrix<Complex64> {
    m.map(|v| c * v)
}

/// Image of the Hall basis element `w`.
pub fn dpi(rep: &Representation, hall: &HallBasis, w: usize) -> Result<SymbolOperator> {
    if w >= hall.dim() {
        return Err(Error::DimensionMismatch {
            expected: hall.dim(),
            found: w + 1,
        });
    }
    match rep {
        Representation::Character { mu } => {
            if mu.len() != hall.generators() {
                return Err(Error::DimensionMismatch {
                    expected: hall.generators(),
                    found: mu.len(),
                });
            }
            let word = &hall.words()[w];
            let v = if word.degree == 1 {
                let j = (0..hall.generators()).find(|&j| hall.generator_index(j) == w).expect("generator");
                Complex::new(Q::zero(), mu[j].clone())
            } else {
                Complex::new(Q::zero(), Q::zero())
            };
            Ok(SymbolOperator::exact_scalar(v))
        }
        Representation::Schrodinger { eps, dim, scale } => {
            rep.validate(hall)?;
            let e = *eps as f64;
            let r = scale.sqrt();
            let k = *dim;
            if w == hall.generator_index(0) {
                Ok(SymbolOperator::Matrix(complexify(&hermite_derivative(k), Complex64::new(e * r, 0.0))))
            } else if w == hall.generator_index(1) {
                Ok(SymbolOperator::Matrix(complexify(&hermite_position(k), Complex64::new(0.0, r))))
            } else if Some(w) == bracket12(hall) {
                Ok(SymbolOperator::Matrix(DMatrix::from_diagonal_element(
                    k,
                    k,
                    Complex64::new(0.0, e * scale),
                )))
            } else {
                Ok(SymbolOperator::Matrix(DMatrix::zeros(k, k)))
            }
        }
        Representation::Custom { images, .. } => {
            let m = images.get(w).ok_or(Error::DimensionMismatch {
                expected: hall.dim(),
                found: images.len(),
            })?;
            Ok(SymbolOperator::Matrix(m.clone()))
        }
    }
}
