use std::fmt;

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::{dilate_raw, HallBasis};
use crate::linalg::{from_rows, orthonormal_span, projector};
use crate::rational::{approx_rational, fmt_q, rref, to_f64, Q};

/// A linear subspace of `g`: orthonormal float rows, plus an exact RREF
/// basis whenever one is known.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
    exact: Option<Vec<Vec<Q>>>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: DMatrix::zeros(0, ambient),
            exact: Some(Vec::new()),
        }
    }

    /// Span of the given rational vectors.
    pub fn from_exact(ambient: usize, mut rows: Vec<Vec<Q>>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != ambient) {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: r.len(),
            });
        }
        rref(&mut rows);
        let float: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        let basis = orthonormal_span(&from_rows(&float, ambient), 0.0);
        Ok(Subspace {
            ambient,
            basis,
            exact: Some(rows),
        })
    }

    /// Span of float rows; entries below `1e-13` times the largest entry
    /// are treated as rounding noise when deciding the dimension.
    pub fn from_rows(ambient: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != ambient) {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: r.len(),
            });
        }
        let m = from_rows(rows, ambient);
        Ok(Self::from_matrix(&m))
    }

    pub(crate) fn from_matrix(m: &DMatrix<f64>) -> Self {
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Subspace {
            ambient: m.ncols(),
            basis: orthonormal_span(m, 1e-13 * scale),
            exact: None,
        }
    }

    /// Wraps rows already known to be orthonormal.
    pub(crate) fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Subspace {
            ambient: basis.ncols(),
            basis,
            exact: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Orthonormal rows.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.basis.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Exact RREF rows when available.
    pub fn exact(&self) -> Option<&[Vec<Q>]> {
        self.exact.as_deref()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        projector(&self.basis)
    }

    /// Distance from `v / |v|` to the subspace.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let mut r: Vec<f64> = v.iter().map(|x| x / n).collect();
        for row in self.basis.row_iter() {
            let d: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
            for (x, a) in r.iter_mut().zip(row.iter()) {
                *x -= d * a;
            }
        }
        r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.residual(v) <= tol
    }

    /// Exact membership, `None` without an exact basis.
    pub fn contains_exact(&self, v: &[Q]) -> Option<bool> {
        let rows = self.exact.as_ref()?;
        let mut m = rows.clone();
        m.push(v.to_vec());
        Some(crate::rational::rank(&m) == rows.len())
    }

    /// `max_i |xi(h_i)| / |xi|` over the orthonormal basis; zero iff `xi`
    /// annihilates the subspace.
    pub fn annihilation_defect(&self, xi: &[f64]) -> f64 {
        let n = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        self.basis
            .row_iter()
            .map(|r| r.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>().abs() / n)
            .fold(0.0, f64::max)
    }

    /// Image under the graded dilation `alpha_t`, `t > 0`.
    pub fn dilate(&self, hall: &HallBasis, t: f64) -> Result<Subspace> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveDilation(t.to_string()));
        }
        // alpha_t rescaled by a common factor so the largest weight is one
        let lt = t.ln();
        let top = (1..=hall.step()).map(|d| d as f64 * lt).fold(f64::MIN, f64::max);
        let weights: Vec<f64> = hall
            .words()
            .iter()
            .map(|w| (w.degree as f64 * lt - top).exp())
            .collect();
        let m = DMatrix::from_fn(self.dim(), self.ambient, |i, j| self.basis[(i, j)] * weights[j]);
        Ok(Subspace::from_matrix(&m))
    }

    /// Exact image under `alpha_t` for rational `t > 0`.
    pub fn dilate_exact(&self, hall: &HallBasis, t: &Q) -> Result<Option<Subspace>> {
        if *t <= Q::zero() {
            return Err(Error::NonPositiveDilation(fmt_q(t)));
        }
        let Some(rows) = &self.exact else {
            return Ok(None);
        };
        let scaled = rows.iter().map(|r| dilate_raw(hall, t, r)).collect();
        Subspace::from_exact(self.ambient, scaled).map(Some)
    }

    /// Reduced row echelon basis in floats.
    pub(crate) fn float_rref(&self) -> Option<Vec<Vec<f64>>> {
        if let Some(e) = &self.exact {
            return Some(e.iter().map(|r| r.iter().map(to_f64).collect()).collect());
        }
        let (k, n) = (self.dim(), self.ambient);
        let mut a = self.basis.clone();
        let mut row = 0;
        for c in 0..n {
            if row == k {
                break;
            }
            let (p, v) = (row..k)
                .map(|i| (i, a[(i, c)].abs()))
                .fold((row, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if v < 1e-9 {
                continue;
            }
            a.swap_rows(row, p);
            let piv = a[(row, c)];
            for j in 0..n {
                a[(row, j)] /= piv;
            }
            for i in 0..k {
                if i != row {
                    let f = a[(i, c)];
                    for j in 0..n {
                        let d = f * a[(row, j)];
                        a[(i, j)] -= d;
                    }
                }
            }
            row += 1;
        }
        if row < k {
            return None;
        }
        let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
        Some((0..k).map(|i| (0..n).map(|j| clean(a[(i, j)])).collect()).collect())
    }

    /// Exact subspace with small-denominator entries within `tol` of this
    /// one, if there is one.
    pub fn rationalize(&self, max_den: i64, tol: f64) -> Option<Subspace> {
        if self.exact.is_some() {
            return Some(self.clone());
        }
        let (k, n) = (self.dim(), self.ambient);
        let a = self.float_rref()?;
        let rows: Vec<Vec<Q>> = (0..k)
            .map(|i| (0..n).map(|j| approx_rational(a[i][j], max_den)).collect())
            .collect();
        let candidate = Subspace::from_exact(n, rows).ok()?;
        if candidate.dim() != k {
            return None;
        }
        match grassmann_distance(self, &candidate) {
            Ok(d) if d <= tol => Some(candidate),
            _ => None,
        }
    }

    /// Human-readable span using Hall labels, e.g. `<X2 + 1/2*[X1,X2]>`.
    pub fn describe(&self, hall: &HallBasis) -> String {
        let term = |c: String, k: usize, first: bool| -> String {
            let label = hall.label(k);
            let (neg, mag) = match c.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, c),
            };
            let body = if mag == "1" { label } else { format!("{mag}*{label}") };
            match (first, neg) {
                (true, true) => format!("-{body}"),
                (true, false) => body,
                (false, true) => format!(" - {body}"),
                (false, false) => format!(" + {body}"),
            }
        };
        let rows: Vec<String> = match &self.exact {
            Some(rows) => rows
                .iter()
                .map(|r| {
                    let mut s = String::new();
                    for (k, c) in r.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                        s.push_str(&term(fmt_q(c), k, s.is_empty()));
                    }
                    s
                })
                .collect(),
            None => self
                .basis
                .row_iter()
                .map(|r| {
                    let mut s = String::new();
                    for (k, c) in r.iter().enumerate().filter(|(_, c)| c.abs() > 1e-12) {
                        s.push_str(&term(format!("{c:.9}"), k, s.is_empty()));
                    }
                    s
                })
                .collect(),
        };
        if rows.is_empty() {
            "<0>".to_string()
        } else {
            format!("<{}>", rows.join(", "))
        }
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = match &self.exact {
            Some(rows) => rows
                .iter()
                .map(|r| r.iter().map(fmt_q).collect::<Vec<_>>().join(" "))
                .collect(),
            None => self
                .basis
                .row_iter()
                .map(|r| r.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(" "))
                .collect(),
        };
        write!(f, "<{}>", rows.join("; "))
    }
}

/// Largest principal angle between two subspaces of equal dimension.
pub fn grassmann_distance(a: &Subspace, b: &Subspace) -> Result<f64> {
    if a.ambient != b.ambient {
        return Err(Error::DimensionMismatch {
            expected: a.ambient,
            found: b.ambient,
        });
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.dim() == 0 {
        return Ok(0.0);
    }
    let qa = &a.basis;
    let qb = &b.basis;
    let cross = qa * qb.transpose();
    let cos = cross
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    // rows of B with their A-component removed; singular values are the sines
    let rest = qb - cross.transpose() * qa;
    let sin = rest
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max);
    Ok(sin.atan2(cos.max(0.0)))
}
