use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frame::{Frame, Point};
use crate::lie::{bracket_raw, dilate_raw, HallBasis};
use crate::linalg::top_eigenvectors;
use crate::rational::{from_f64, q, to_f64, Q};

use super::path::ApproachPath;
use super::subspace::{grassmann_distance, Subspace};

/// `alpha_{1/t}(ker natural_x)`, exact when `x` is rational and every
/// coefficient can be evaluated exactly there.
pub fn dilated_kernel(frame: &Frame, x: &Point, t: f64) -> Result<Subspace> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveDilation(t.to_string()));
    }
    frame.check_point(x)?;
    if let Some(xe) = x.exact_coords() {
        if let Some(s) = dilated_kernel_exact(frame, xe, &from_f64(t)?)? {
            return Ok(s);
        }
    }
    frame.kernel_at(x)?.dilate(frame.basis(), 1.0 / t)
}

/// Exact `alpha_{1/t}(ker natural_x)`; `None` if a trigonometric
/// coefficient prevents exact evaluation at `x`.
pub fn dilated_kernel_exact(frame: &Frame, x: &[Q], t: &Q) -> Result<Option<Subspace>> {
    if *t <= Q::zero() {
        return Err(Error::NonPositiveDilation(crate::rational::fmt_q(t)));
    }
    let Some(rows) = frame.kernel_rows_exact(x) else {
        return Ok(None);
    };
    let inv = t.recip();
    let scaled = rows?
        .iter()
        .map(|r| dilate_raw(frame.basis(), &inv, r))
        .collect();
    Subspace::from_exact(frame.basis().dim(), scaled).map(Some)
}

/// Largest distance of a bracket of basis vectors from the subspace;
/// exactly zero when an exact basis proves closure.
pub fn subalgebra_defect(hall: &HallBasis, s: &Subspace) -> f64 {
    if let Some(rows) = s.exact() {
        let closed = rows.iter().enumerate().all(|(i, a)| {
            rows[i + 1..]
                .iter()
                .all(|b| s.contains_exact(&bracket_raw(hall, a, b)) == Some(true))
        });
        if closed {
            return 0.0;
        }
    }
    let rows = s.rows();
    let mut worst = 0.0f64;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let b = bracket_raw(hall, &rows[i], &rows[j]);
            let n = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max(s.residual(&b) * n);
        }
    }
    worst
}

pub fn is_subalgebra(hall: &HallBasis, s: &Subspace, tol: f64) -> bool {
    if s.ambient() != hall.dim() {
        return false;
    }
    subalgebra_defect(hall, s) <= tol
}

#[derive(Debug, Clone)]
pub struct LimitOptions {
    /// Cauchy threshold on successive extrapolated limits.
    pub tol: f64,
    /// First sample of the path parameter; later samples halve it.
    pub s0: f64,
    pub max_halvings: usize,
    pub subalgebra_tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            tol: 1e-8,
            s0: 0.5,
            max_halvings: 40,
            subalgebra_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConeLimit {
    pub subspace: Subspace,
    /// Distance between the last two extrapolated limits.
    pub residual: f64,
    /// Distance between the last raw dilated kernel and the limit.
    pub raw_gap: f64,
    pub samples: usize,
    pub subalgebra_defect: f64,
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub path: String,
    /// `(s, distance between consecutive extrapolated limits)`.
    pub gaps: Vec<(f64, f64)>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub enum LimitOutcome {
    Converged(ConeLimit),
    Diverged(DivergenceReport),
}

impl LimitOutcome {
    pub fn converged(self) -> Option<ConeLimit> {
        match self {
            LimitOutcome::Converged(c) => Some(c),
            LimitOutcome::Diverged(_) => None,
        }
    }
}

/// Richardson extrapolation of a sequence sampled at `s_j = s0 / 2^j`,
/// eliminating the `s` and `s^2` terms.
pub(crate) struct Richardson {
    raw: Vec<DMatrix<f64>>,
    first: Vec<DMatrix<f64>>,
}

impl Richardson {
    pub(crate) fn new() -> Self {
        Richardson {
            raw: Vec::new(),
            first: Vec::new(),
        }
    }

    /// Pushes a sample and returns the current second-order estimate.
    pub(crate) fn push(&mut self, p: DMatrix<f64>) -> Option<DMatrix<f64>> {
        if let Some(prev) = self.raw.last() {
            self.first.push(&p * 2.0 - prev);
        }
        self.raw.push(p);
        let n = self.first.len();
        if n >= 2 {
            Some((&self.first[n - 1] * 4.0 - &self.first[n - 2]) / 3.0)
        } else {
            None
        }
    }
}

fn projector_to_subspace(p: &DMatrix<f64>, k: usize) -> Subspace {
    let sym = (p + p.transpose()) * 0.5;
    Subspace::from_orthonormal(top_eigenvectors(&sym, k))
}

/// Grassmannian limit of the dilated kernels along the path, extrapolated
/// and checked to be a Lie subalgebra.
pub fn limit_along(frame: &Frame, path: &ApproachPath, opts: &LimitOptions) -> Result<LimitOutcome> {
    path.validate()?;
    if path.chart_dim() != frame.dimension() {
        return Err(Error::DimensionMismatch {
            expected: frame.dimension(),
            found: path.chart_dim(),
        });
    }
    let hall = frame.basis();
    let k = hall.dim() - frame.dimension();
    let total = match path {
        ApproachPath::Rational { .. } => opts.max_halvings + 1,
        ApproachPath::Sampled { samples, .. } => samples.len(),
    };
    let s0 = match path {
        ApproachPath::Rational { .. } => opts.s0,
        ApproachPath::Sampled { s0, .. } => *s0,
    };
    let s0_exact = from_f64(s0)?;
    let mut rich = Richardson::new();
    let mut prev: Option<Subspace> = None;
    let mut gaps = Vec::new();
    let mut below = 0;
    for j in 0..total {
        let s = s0 / 2f64.powi(j as i32);
        let kernel = match path {
            ApproachPath::Rational { .. } => {
                let sq = &s0_exact * q(1, 1i64 << j.min(62));
                let (x, t) = path.at(&sq).expect("rational path");
                if t <= Q::zero() {
                    return Err(Error::NonPositiveDilation(format!("t(s) at s = {s}")));
                }
                match dilated_kernel_exact(frame, &x, &t)? {
                    Some(sub) => sub,
                    None => dilated_kernel(frame, &Point::new(x.iter().map(to_f64).collect()), to_f64(&t))?,
                }
            }
            ApproachPath::Sampled { samples, .. } => {
                let (x, t) = &samples[j];
                dilated_kernel(frame, x, *t)?
            }
        };
        if k == 0 {
            return Ok(LimitOutcome::Converged(ConeLimit {
                subspace: Subspace::zero(hall.dim()),
                residual: 0.0,
                raw_gap: 0.0,
                samples: j + 1,
                subalgebra_defect: 0.0,
            }));
        }
        let estimate = rich.push(kernel.projector());
        let Some(est) = estimate else { continue };
        let current = projector_to_subspace(&est, k);
        if let Some(p) = &prev {
            let d = grassmann_distance(p, &current)?;
            gaps.push((s, d));
            below = if d < opts.tol { below + 1 } else { 0 };
            if below >= 2 {
                return finish(hall, current, d, Some(&kernel), j + 1, opts).map(LimitOutcome::Converged);
            }
        }
        prev = Some(current);
    }
    let tail: Vec<f64> = gaps.iter().rev().take(6).map(|g| g.1).collect();
    let shrinking = tail.windows(2).all(|w| w[0] <= w[1]);
    Ok(LimitOutcome::Diverged(DivergenceReport {
        path: path.to_string(),
        gaps,
        reason: if shrinking {
            "extrapolated kernels still moving at the smallest scale".into()
        } else {
            "extrapolated kernels oscillate".into()
        },
    }))
}

fn finish(
    hall: &HallBasis,
    limit: Subspace,
    residual: f64,
    raw: Option<&Subspace>,
    samples: usize,
    opts: &LimitOptions,
) -> Result<ConeLimit> {
    let limit = limit
        .rationalize(1000, opts.tol.max(1e-10))
        .unwrap_or(limit);
    let defect = subalgebra_defect(hall, &limit);
    if defect > opts.subalgebra_tol {
        return Err(Error::LimitNotSubalgebra { defect });
    }
    let raw_gap = match raw {
        Some(r) => grassmann_distance(r, &limit)?,
        None => 0.0,
    };
    Ok(ConeLimit {
        subspace: limit,
        residual,
        raw_gap,
        samples,
        subalgebra_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Poly, PolyVF};
    use crate::rational::qi;

    fn grushin() -> Frame {
        let x1 = PolyVF::coordinate(2, 0);
        let x2 = PolyVF::new(vec![Poly::zero(2), Poly::var(2, 0)]).unwrap();
        Frame::new(2, vec![x1, x2], 2).unwrap()
    }

    #[test]
    fn grushin_dilated_kernel() {
        let f = grushin();
        let k = dilated_kernel_exact(&f, &[q(2, 3), qi(1)], &q(1, 5)).unwrap().unwrap();
        let expected = Subspace::from_exact(3, vec![vec![qi(0), q(1, 5), q(-2, 3)]]).unwrap();
        assert_eq!(k.exact(), expected.exact());
    }

    #[test]
    fn fixed_point_limit_is_centre() {
        let f = grushin();
        let out = limit_along(&f, &ApproachPath::fixed(&[qi(1), qi(0)]), &LimitOptions::default())
            .unwrap()
            .converged()
            .unwrap();
        assert_eq!(out.subspace.exact().unwrap(), &[vec![qi(0), qi(0), qi(1)]]);
        assert!(out.residual < 1e-8);
    }
}
