//! Galerkin truncations of frame operators on a torus and the finite-K
//! constants of the maximal a priori estimate.

mod fourier;

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, Phase, Poly, PolyVF};
use crate::rational::qi;
use crate::symbols::NCPoly;

use fourier::{add_into, cpoly_series, derivative, multiply, poly_series, Series};

/// Header carried by every growth report.
pub const REPORT_HEADER: &str =
    "finite-K check of a necessary consequence of the maximal estimate, not the estimate itself";

/// A frame with trigonometric coefficients on the flat torus `(R / 2 pi Z)^m`.
#[derive(Debug, Clone)]
pub struct TorusModel {
    frame: Frame,
    fields: Vec<Vec<Series>>,
}

impl TorusModel {
    pub fn new(frame: Frame) -> Result<Self> {
        if !frame.periodic().iter().all(|&p| p) {
            return Err(Error::InvalidArgument("torus model needs every coordinate periodic".into()));
        }
        let fields = frame
            .fields()
            .iter()
            .map(|f| f.components().iter().map(poly_series).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(TorusModel { frame, fields })
    }

    /// `X1 = d/dx`, `X2 = sin(x) d/dy` on the two-torus.
    pub fn grushin_torus() -> Self {
        let x1 = PolyVF::coordinate(2, 0);
        let x2 = PolyVF::new(vec![Poly::zero(2), Poly::trig(2, qi(1), vec![1, 0], Phase::Sin)])
            .expect("two components");
        let frame = Frame::new(2, vec![x1, x2], 2)
            .and_then(|f| f.with_periodic(vec![true, true]))
            .expect("valid frame");
        TorusModel::new(frame).expect("trigonometric frame")
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// In-band modes `|k_i| <= cutoff`, lexicographic.
    pub fn modes(&self, cutoff: usize) -> Vec<Vec<i64>> {
        let m = self.frame.dimension();
        let k = cutoff as i64;
        let mut out = vec![Vec::new()];
        for _ in 0..m {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-k..=k).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    fn apply_field(&self, j: usize, f: &Series) -> Series {
        let mut out = Series::new();
        for (m, a) in self.fields[j].iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (k, c) in multiply(a, &derivative(f, m)) {
                add_into(&mut out, k, c);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spillover {
    /// Out-of-band output modes are dropped.
    Project,
}

/// Sparse Galerkin matrix `P_K A P_K` on the in-band Fourier modes.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub cutoff: usize,
    pub modes: Vec<Vec<i64>>,
    /// Nonzero entries per column as `(row, value)`.
    columns: Vec<Vec<(usize, Complex64)>>,
    pub policy: Spillover,
    /// `|(1 - P_K) A P_K|_F / |A P_K|_F`.
    pub spillover: f64,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.columns[col]
            .iter()
            .find(|(r, _)| *r == row)
            .map_or(Complex64::new(0.0, 0.0), |(_, v)| *v)
    }

    pub fn index_of(&self, mode: &[i64]) -> Option<usize> {
        self.modes.iter().position(|m| m == mode)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for (c, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                d[(*r, c)] += v;
            }
        }
        d
    }

    pub fn try_add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.modes != other.modes {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                let mut m: HashMap<usize, Complex64> = HashMap::new();
                for (r, v) in a.iter().chain(b) {
                    *m.entry(*r).or_insert(Complex64::new(0.0, 0.0)) += v;
                }
                let mut col: Vec<(usize, Complex64)> = m.into_iter().filter(|(_, v)| v.norm() != 0.0).collect();
                col.sort_by_key(|(r, _)| *r);
                col
            })
            .collect();
        Ok(OperatorMatrix {
            cutoff: self.cutoff,
            modes: self.modes.clone(),
            columns,
            policy: self.policy,
            spillover: self.spillover.max(other.spillover),
        })
    }
}

/// Galerkin matrix of `P` on modes `|k_i| <= cutoff`. Words are applied
/// exactly and only the output is truncated.
pub fn assemble(model: &TorusModel, p: &NCPoly, cutoff: usize) -> Result<OperatorMatrix> {
    let frame = &model.frame;
    if p.generators() != frame.generators() || p.nvars() != frame.dimension() {
        return Err(Error::DimensionMismatch {
            expected: frame.generators(),
            found: p.generators(),
        });
    }
    let terms: Vec<(Vec<usize>, Series)> = p
        .terms()
        .map(|(w, c)| Ok((w.to_vec(), cpoly_series(c)?)))
        .collect::<Result<_>>()?;
    let modes = model.modes(cutoff);
    let index: HashMap<&[i64], usize> = modes.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut inside = 0.0;
    let mut outside = 0.0;
    let mut columns = Vec::with_capacity(modes.len());
    for k in &modes {
        let mut total = Series::new();
        for (w, coeff) in &terms {
            let mut f = Series::new();
            f.insert(k.clone(), Complex64::new(1.0, 0.0));
            for &g in w.iter().rev() {
                f = model.apply_field(g, &f);
            }
            for (kk, c) in multiply(coeff, &f) {
                add_into(&mut total, kk, c);
            }
        }
        let mut col = Vec::new();
        for (kk, c) in total {
            if c.norm() == 0.0 {
                continue;
            }
            match index.get(kk.as_slice()) {
                Some(&r) => {
                    inside += c.norm_sqr();
                    col.push((r, c));
                }
                None => outside += c.norm_sqr(),
            }
        }
        col.sort_by_key(|(r, _)| *r);
        columns.push(col);
    }
    let all = inside + outside;
    Ok(OperatorMatrix {
        cutoff,
        modes,
        columns,
        policy: Spillover::Project,
        spillover: if all > 0.0 { (outside / all).sqrt() } else { 0.0 },
    })
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

/// `max |P f| / sqrt(|D f|^2 + |f|^2)` over `f` supported on `support`
/// (all modes when `None`). This is the largest generalized singular value
/// of `(P, [D; I])`, and lies within a factor `sqrt 2` of
/// `max |P f| / (|D f| + |f|)`.
pub fn best_constant_matrices(p: &OperatorMatrix, d: &OperatorMatrix, support: Option<&[usize]>) -> Result<f64> {
    if p.modes != d.modes {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: d.dim(),
        });
    }
    let n = p.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    for op in [p, d] {
        for (c, col) in op.columns.iter().enumerate() {
            for (r, _) in col {
                let (a, b) = (find(&mut parent, c), find(&mut parent, *r));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let allowed: Vec<bool> = match support {
        None => vec![true; n],
        Some(s) => {
            let mut a = vec![false; n];
            for &i in s {
                if i >= n {
                    return Err(Error::InvalidArgument(format!("mode index {i} out of range")));
                }
                a[i] = true;
            }
            a
        }
    };
    let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        blocks.entry(r).or_default().push(i);
    }
    let blocks: Vec<Vec<usize>> = blocks.into_values().collect();
    let values = blocks
        .par_iter()
        .map(|rows| {
            let cols: Vec<usize> = rows.iter().copied().filter(|&i| allowed[i]).collect();
            if cols.is_empty() {
                return Ok(0.0);
            }
            let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(a, &i)| (i, a)).collect();
            let (r, s) = (rows.len(), cols.len());
            let mut pm = DMatrix::<Complex64>::zeros(r, s);
            let mut stacked = DMatrix::<Complex64>::zeros(r + s, s);
            for (b, &c) in cols.iter().enumerate() {
                for (row, v) in &p.columns[c] {
                    pm[(pos[row], b)] += v;
                }
                for (row, v) in &d.columns[c] {
                    stacked[(pos[row], b)] += v;
                }
                stacked[(r + b, b)] = Complex64::new(1.0, 0.0);
            }
            let rr = stacked.qr().r();
            let diag: Vec<f64> = (0..s).map(|i| rr[(i, i)].norm()).collect();
            let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
            let cond = hi / lo;
            // X R = P, solved as R^T X^T = P^T
            let xt = rr
                .transpose()
                .solve_lower_triangular(&pm.transpose())
                .filter(|x| x.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
                .ok_or_else(|| Error::Numerical(format!("triangular solve failed (condition estimate {cond:e})")))?;
            Ok(xt.singular_values().max())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Finite-K constant of `|P f| <= C (|D f| + |f|)`; see
/// [`best_constant_matrices`] for the normalization.
pub fn best_constant(model: &TorusModel, p: &NCPoly, d: &NCPoly, cutoff: usize) -> Result<f64> {
    let pm = assemble(model, p, cutoff)?;
    let dm = assemble(model, d, cutoff)?;
    best_constant_matrices(&pm, &dm, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Growing,
    Inconclusive,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Growth::Bounded => "bounded",
            Growth::Growing => "growing",
            Growth::Inconclusive => "inconclusive",
        })
    }
}

/// Slope below 0.05 is bounded, above 0.3 growing. The thresholds are
/// engineering choices.
pub fn classify_slope(slope: f64) -> Growth {
    if slope < 0.05 {
        Growth::Bounded
    } else if slope > 0.3 {
        Growth::Growing
    } else {
        Growth::Inconclusive
    }
}

/// Least-squares slope of `log c` against `log k`.
pub fn log_slope(ks: &[usize], cs: &[f64]) -> Result<f64> {
    if ks.len() < 3 || ks.len() != cs.len() {
        return Err(Error::InvalidArgument("slope fit needs at least three (K, C) pairs".into()));
    }
    if ks.contains(&0) || cs.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidArgument("slope fit needs positive K and C".into()));
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = cs.iter().map(|c| c.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct K values".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone)]
pub struct GrowthRow {
    pub cutoff: usize,
    pub constant: f64,
    pub spillover: f64,
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub header: &'static str,
    pub rows: Vec<GrowthRow>,
    pub slope: f64,
    pub classification: Growth,
}

pub fn growth_report(model: &TorusModel, p: &NCPoly, d: &NCPoly, cutoffs: &[usize]) -> Result<GrowthReport> {
    if cutoffs.len() < 3 {
        return Err(Error::InvalidArgument("growth report needs at least three cutoffs".into()));
    }
    let rows = cutoffs
        .par_iter()
        .map(|&k| {
            let pm = assemble(model, p, k)?;
            let dm = assemble(model, d, k)?;
            Ok(GrowthRow {
                cutoff: k,
                constant: best_constant_matrices(&pm, &dm, None)?,
                spillover: pm.spillover.max(dm.spillover),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ks: Vec<usize> = rows.iter().map(|r| r.cutoff).collect();
    let cs: Vec<f64> = rows.iter().map(|r| r.constant).collect();
    let slope = log_slope(&ks, &cs)?;
    Ok(GrowthReport {
        header: REPORT_HEADER,
        rows,
        slope,
        classification: classify_slope(slope),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_simple_sequences() {
        let ks = [8, 16, 24, 32];
        assert!(log_slope(&ks, &[2.0; 4]).unwrap().abs() < 1e-12);
        let lin: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        assert!((log_slope(&ks, &lin).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(classify_slope(0.0), Growth::Bounded);
        assert_eq!(classify_slope(1.0), Growth::Growing);
        assert_eq!(classify_slope(0.1), Growth::Inconclusive);
        assert!(log_slope(&ks[..2], &[1.0, 1.0]).is_err());
    }
}
