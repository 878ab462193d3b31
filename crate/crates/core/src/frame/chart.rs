use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::cones::Subspace;
use crate::error::{Error, Result};
use crate::lie::{HallBasis, LieElement};
use crate::linalg::{self, REL_RANK_TOL};
use crate::rational::{self, fmt_q, nullspace, parse_q, to_f64, Q};

use super::field::{vf_bracket, CompiledField, PolyVF};

/// Point of the chart, with exact rational coordinates when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
    exact: Option<Vec<Q>>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point {
            coords,
            exact: None,
        }
    }

    pub fn exact(coords: Vec<Q>) -> Self {
        Point {
            coords: coords.iter().map(to_f64).collect(),
            exact: Some(coords),
        }
    }

    /// Comma separated rational or decimal literals, e.g. `"0,1/2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(parse_q)
            .collect::<Result<Vec<Q>>>()?;
        Ok(Point::exact(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn exact_coords(&self) -> Option<&[Q]> {
        self.exact.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.exact {
            Some(e) => e.iter().map(fmt_q).collect(),
            None => self.coords.iter().map(|x| format!("{x}")).collect(),
        };
        write!(f, "({})", parts.join(", "))
    }
}

/// Outcome of the bracket-generating test at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HormanderReport {
    pub satisfied: bool,
    /// Smallest bracket length whose span is the full tangent space.
    pub depth: Option<usize>,
    /// Rank of the anchor using all words up to the step.
    pub rank: usize,
    pub exact: bool,
}

/// `n` polynomial vector fields on an `m`-dimensional chart together with
/// the anchor from the free nilpotent algebra of the chosen step.
#[derive(Debug, Clone)]
pub struct Frame {
    dimension: usize,
    periodic: Vec<bool>,
    bounds: Vec<Option<(f64, f64)>>,
    fields: Vec<PolyVF>,
    basis: Arc<HallBasis>,
    anchors: Vec<PolyVF>,
    compiled: Vec<CompiledField>,
}

impl Frame {
    pub fn new(dimension: usize, fields: Vec<PolyVF>, step: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("chart dimension must be positive".into()));
        }
        if fields.is_empty() {
            return Err(Error::InvalidArgument("a frame needs at least one field".into()));
        }
        if let Some(f) = fields.iter().find(|f| f.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: f.dimension(),
            });
        }
        let basis = HallBasis::new(fields.len(), step)?;
        let mut anchors: Vec<PolyVF> = Vec::with_capacity(basis.dim());
        for w in basis.words() {
            let a = match w.factors {
                None => fields[w.letters[0] as usize].clone(),
                Some((l, r)) => vf_bracket(&anchors[l], &anchors[r])?,
            };
            anchors.push(a);
        }
        let compiled = anchors.iter().map(CompiledField::new).collect();
        Ok(Frame {
            dimension,
            periodic: vec![false; dimension],
            bounds: vec![None; dimension],
            fields,
            basis: Arc::new(basis),
            anchors,
            compiled,
        })
    }

    pub fn with_periodic(mut self, periodic: Vec<bool>) -> Result<Self> {
        if periodic.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: periodic.len(),
            });
        }
        self.periodic = periodic;
        Ok(self)
    }

    /// Box constraints on non-periodic axes; `None` leaves an axis unbounded.
    pub fn with_bounds(mut self, bounds: Vec<Option<(f64, f64)>>) -> Result<Self> {
        if bounds.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: bounds.len(),
            });
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> usize {
        self.fields.len()
    }

    pub fn step(&self) -> usize {
        self.basis.step()
    }

    pub fn basis(&self) -> &HallBasis {
        &self.basis
    }

    pub fn shared_basis(&self) -> Arc<HallBasis> {
        Arc::clone(&self.basis)
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn bounds(&self) -> &[Option<(f64, f64)>] {
        &self.bounds
    }

    pub fn fields(&self) -> &[PolyVF] {
        &self.fields
    }

    /// Anchored field of Hall basis element `k`.
    pub fn anchor(&self, k: usize) -> &PolyVF {
        &self.anchors[k]
    }

    pub fn anchors(&self) -> &[PolyVF] {
        &self.anchors
    }

    pub fn compiled(&self, k: usize) -> &CompiledField {
        &self.compiled[k]
    }

    /// True if every coefficient of every anchored field is a trigonometric
    /// polynomial (the class the Fourier assembly accepts).
    pub fn is_trigonometric(&self) -> bool {
        self.fields
            .iter()
            .all(|f| f.components().iter().all(|p| p.is_trig_polynomial()))
    }

    pub fn in_chart(&self, x: &[f64]) -> bool {
        x.len() == self.dimension
            && x.iter().all(|v| v.is_finite())
            && x.iter().zip(&self.bounds).zip(&self.periodic).all(|((v, b), &p)| {
                p || b.is_none_or(|(lo, hi)| *v >= lo && *v <= hi)
            })
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.dim(),
            });
        }
        if !self.in_chart(x.coords()) {
            return Err(Error::OutsideChart {
                point: x.to_string(),
            });
        }
        Ok(())
    }

    /// Columns `anchor_k(x)` as an `m x dim g` matrix, exactly if possible.
    pub fn anchor_matrix_exact(&self, x: &[Q]) -> Option<Vec<Vec<Q>>> {
        let cols: Vec<Vec<Q>> = self
            .anchors
            .iter()
            .map(|a| a.eval_exact(x))
            .collect::<Option<_>>()?;
        Some(
            (0..self.dimension)
                .map(|i| cols.iter().map(|c| c[i].clone()).collect())
                .collect(),
        )
    }

    pub fn anchor_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dimension, self.anchors.len());
        let mut col = vec![0.0; self.dimension];
        for (k, c) in self.compiled.iter().enumerate() {
            c.eval_into(x, &mut col);
            for i in 0..self.dimension {
                m[(i, k)] = col[i];
            }
        }
        m
    }

    /// `natural_x(v)` in floating point.
    pub fn anchor_at(&self, v: &LieElement<f64>, x: &Point) -> Result<Vec<f64>> {
        v.check_dim(&self.basis)?;
        self.check_point(x)?;
        Ok(self.anchor_at_raw(v.coords(), x.coords()))
    }

    pub(crate) fn anchor_at_raw(&self, v: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        let mut col = vec![0.0; self.dimension];
        for (c, vk) in self.compiled.iter().zip(v) {
            if *vk == 0.0 {
                continue;
            }
            c.eval_into(x, &mut col);
            for (o, ci) in out.iter_mut().zip(&col) {
                *o += vk * ci;
            }
        }
        out
    }

    /// `natural_x(v)` exactly; `None` when a coefficient cannot be evaluated
    /// exactly at `x` or `x` has no exact coordinates.
    pub fn anchor_at_exact(&self, v: &LieElement<Q>, x: &Point) -> Result<Option<Vec<Q>>> {
        v.check_dim(&self.basis)?;
        self.check_point(x)?;
        let Some(xe) = x.exact_coords() else {
            return Ok(None);
        };
        let Some(m) = self.anchor_matrix_exact(xe) else {
            return Ok(None);
        };
        Ok(Some(m.iter().map(|row| rational::dot(row, v.coords())).collect()))
    }

    /// Smallest bracket length at which the evaluated anchors span the
    /// tangent space at `x`.
    pub fn check_hormander(&self, x: &Point) -> Result<HormanderReport> {
        self.check_point(x)?;
        let degrees = self.basis.degrees();
        let exact = x.exact_coords().and_then(|e| self.anchor_matrix_exact(e));
        let rank_upto = |k: usize| -> usize {
            let cols: Vec<usize> = (0..degrees.len()).filter(|&c| degrees[c] <= k).collect();
            match &exact {
                Some(m) => {
                    let sub: Vec<Vec<Q>> = m
                        .iter()
                        .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
                        .collect();
                    rational::rank(&sub)
                }
                None => {
                    let full = self.anchor_matrix(x.coords());
                    let sub = full.select_columns(&cols);
                    linalg::numerical_rank(&sub, REL_RANK_TOL)
                }
            }
        };
        let mut depth = None;
        let mut rank = 0;
        for k in 1..=self.step() {
            rank = rank_upto(k);
            if rank == self.dimension {
                depth = Some(k);
                break;
            }
        }
        Ok(HormanderReport {
            satisfied: depth.is_some(),
            depth,
            rank,
            exact: exact.is_some(),
        })
    }

    /// `ker natural_x`, exact at rational points where possible.
    pub fn kernel_at(&self, x: &Point) -> Result<Subspace> {
        self.check_point(x)?;
        let dim = self.basis.dim();
        if let Some(m) = x.exact_coords().and_then(|e| self.anchor_matrix_exact(e)) {
            let r = rational::rank(&m);
            if r < self.dimension {
                return Err(Error::NotSurjective {
                    point: x.to_string(),
                    rank: r,
                    dimension: self.dimension,
                });
            }
            return Subspace::from_exact(dim, nullspace(&m, dim));
        }
        let m = self.anchor_matrix(x.coords());
        let r = linalg::numerical_rank(&m, REL_RANK_TOL);
        if r < self.dimension {
            return Err(Error::NotSurjective {
                point: x.to_string(),
                rank: r,
                dimension: self.dimension,
            });
        }
        Ok(Subspace::from_orthonormal(linalg::nullspace(&m, REL_RANK_TOL)))
    }

    /// Exact kernel rows when available; used by the limit machinery.
    pub(crate) fn kernel_rows_exact(&self, x: &[Q]) -> Option<Result<Vec<Vec<Q>>>> {
        let m = self.anchor_matrix_exact(x)?;
        let r = rational::rank(&m);
        if r < self.dimension {
            return Some(Err(Error::NotSurjective {
                point: Point::exact(x.to_vec()).to_string(),
                rank: r,
                dimension: self.dimension,
            }));
        }
        Some(Ok(nullspace(&m, self.basis.dim())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Poly;
    use crate::rational::{q, qi};

    fn grushin() -> Frame {
        let x1 = PolyVF::coordinate(2, 0);
        let x2 = PolyVF::new(vec![Poly::zero(2), Poly::var(2, 0)]).unwrap();
        Frame::new(2, vec![x1, x2], 2).unwrap()
    }

    #[test]
    fn grushin_anchor_formula() {
        let f = grushin();
        let x = Point::exact(vec![q(3, 7), q(-2, 1)]);
        let v = LieElement::new(vec![q(1, 2), q(5, 3), qi(-4)]);
        let got = f.anchor_at_exact(&v, &x).unwrap().unwrap();
        assert_eq!(got, vec![q(1, 2), q(5, 3) * q(3, 7) - qi(4)]);
    }

    #[test]
    fn hormander_depths() {
        let f = grushin();
        let r0 = f.check_hormander(&Point::parse("0,0").unwrap()).unwrap();
        assert_eq!((r0.satisfied, r0.depth), (true, Some(2)));
        let r1 = f.check_hormander(&Point::parse("1,0").unwrap()).unwrap();
        assert_eq!((r1.satisfied, r1.depth), (true, Some(1)));
        let lone = Frame::new(2, vec![PolyVF::coordinate(2, 0)], 3).unwrap();
        let r = lone.check_hormander(&Point::parse("0,0").unwrap()).unwrap();
        assert!(!r.satisfied && r.depth.is_none());
    }

    #[test]
    fn kernel_is_one_dimensional() {
        let f = grushin();
        let k = f.kernel_at(&Point::parse("2,5").unwrap()).unwrap();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.exact().unwrap()[0], vec![qi(0), qi(1), qi(-2)]);
    }

    #[test]
    fn bounds_are_enforced() {
        let f = grushin().with_bounds(vec![Some((-1.0, 1.0)), None]).unwrap();
        assert!(matches!(
            f.check_point(&Point::parse("2,0").unwrap()),
            Err(Error::OutsideChart { .. })
        ));
    }
}
