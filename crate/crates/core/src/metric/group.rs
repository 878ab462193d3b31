use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cones::{canon_right, Subspace};
use crate::error::{Error, Result};
use crate::frame::{Frame, Point, Poly, PolyVF};
use crate::lie::HallBasis;
use crate::rational::{qi, Q};

use super::flow::flow_anchored;
use super::solver::{cc_distance, fd_jacobian, solve, DistanceEstimate, SolverOptions, Target};

/// `B_k^+ / k!` for `k < n`, the coefficients of `x / (1 - e^-x)`.
fn bernoulli_weights(n: usize) -> Vec<Q> {
    let mut b: Vec<Q> = vec![qi(1)];
    for k in 1..n {
        // sum_{j<=k} C(k+1, j) B_j = 0
        let mut binom = qi(1);
        let mut acc = qi(0);
        for (j, bj) in b.iter().enumerate() {
            acc += &binom * bj;
            binom = binom * qi((k + 1 - j) as i64) / qi((j + 1) as i64);
        }
        b.push(-acc / qi((k + 1) as i64));
    }
    if n > 1 {
        b[1] = -b[1].clone();
    }
    let mut fact = qi(1);
    b.into_iter()
        .enumerate()
        .map(|(k, bk)| {
            if k > 0 {
                fact *= qi(k as i64);
            }
            bk / &fact
        })
        .collect()
}

fn poly_bracket(hall: &HallBasis, a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let d = hall.dim();
    let nvars = a[0].nvars();
    let mut out = vec![Poly::zero(nvars); d];
    for (&(i, j), terms) in hall.bracket_table() {
        let ij = &a[i] * &b[j];
        let ji = &a[j] * &b[i];
        let coeff = &ij - &ji;
        if coeff.is_zero() {
            continue;
        }
        for (k, c) in terms {
            out[*k] = &out[*k] + &coeff.scale(c);
        }
    }
    out
}

/// Left-invariant frame of the simply connected group in exponential
/// coordinates: `X_j(g) = d/ds log(exp g exp(s e_j))` at `s = 0`, i.e.
/// `sum_k (B_k^+ / k!) ad_g^k e_j`.
pub fn group_frame(hall: &HallBasis) -> Result<Frame> {
    let d = hall.dim();
    let g: Vec<Poly> = (0..d).map(|i| Poly::var(d, i)).collect();
    let weights = bernoulli_weights(hall.step());
    let mut fields = Vec::new();
    for j in 0..hall.generators() {
        let mut term: Vec<Poly> = (0..d)
            .map(|i| if i == hall.generator_index(j) { Poly::one(d) } else { Poly::zero(d) })
            .collect();
        let mut total = term.clone();
        for w in weights.iter().skip(1) {
            term = poly_bracket(hall, &g, &term);
            for (t, x) in total.iter_mut().zip(&term) {
                *t = &*t + &x.scale(w);
            }
        }
        fields.push(PolyVF::new(total)?);
    }
    Frame::new(d, fields, hall.step())
}

/// Constraint `Hg = Hv`, in the coordinates left free by the pivots of `H`.
struct CosetTarget<'a> {
    hall: &'a HallBasis,
    rows: Vec<Vec<f64>>,
    free: Vec<usize>,
    base: Vec<f64>,
}

impl<'a> CosetTarget<'a> {
    fn new(hall: &'a HallBasis, h: &Subspace, v: &[f64]) -> Result<Self> {
        let rows = h
            .float_rref()
            .ok_or_else(|| Error::Numerical("subspace basis is rank deficient".into()))?;
        let pivots: Vec<usize> = rows
            .iter()
            .map(|r| r.iter().position(|c| *c != 0.0).unwrap_or(0))
            .collect();
        let free = (0..hall.dim()).filter(|k| !pivots.contains(k)).collect();
        let mut t = CosetTarget {
            hall,
            rows,
            free,
            base: Vec::new(),
        };
        t.base = t.canonical(v)?;
        Ok(t)
    }

    fn canonical(&self, g: &[f64]) -> Result<Vec<f64>> {
        let c = canon_right(self.hall, g, &self.rows)?;
        Ok(self.free.iter().map(|&k| c[k]).collect())
    }
}

impl Target for CosetTarget<'_> {
    fn residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.canonical(z)?.iter().zip(&self.base).map(|(a, b)| a - b).collect())
    }

    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        fd_jacobian(self, z)
    }
}

/// Distance from the identity coset to `Hv` in `H\G`, for the metric
/// induced by the left-invariant generator frame. `H` should be a
/// subalgebra.
pub fn group_cc_distance(hall: &HallBasis, h: &Subspace, v: &[f64], opts: &SolverOptions) -> Result<DistanceEstimate> {
    if v.len() != hall.dim() {
        return Err(Error::DimensionMismatch {
            expected: hall.dim(),
            found: v.len(),
        });
    }
    if h.ambient() != hall.dim() {
        return Err(Error::DimensionMismatch {
            expected: hall.dim(),
            found: h.ambient(),
        });
    }
    let frame = group_frame(hall)?;
    let target = CosetTarget::new(hall, h, v)?;
    solve(&frame, &vec![0.0; hall.dim()], &target, hall.step(), opts)
}

#[derive(Debug, Clone)]
pub struct ConeCheckCell {
    pub direction: usize,
    pub t: f64,
    /// `d(x, y_t) / t`.
    pub ratio: Option<f64>,
    pub reference: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ConeCheckTable {
    pub directions: Vec<Vec<f64>>,
    /// Ordered by direction, then by decreasing `t`.
    pub cells: Vec<ConeCheckCell>,
}

impl ConeCheckTable {
    pub fn row(&self, direction: usize) -> impl Iterator<Item = &ConeCheckCell> {
        self.cells.iter().filter(move |c| c.direction == direction)
    }

    /// Residuals do not grow as `t` shrinks; failed cells count as growth.
    pub fn decreasing(&self, direction: usize, slack: f64) -> bool {
        let r: Vec<Option<f64>> = self.row(direction).map(|c| c.residual).collect();
        r.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b <= a + slack,
            _ => false,
        })
    }

    /// Largest `residual / reference` over cells with a positive reference.
    pub fn max_relative(&self) -> Option<f64> {
        self.cells
            .iter()
            .filter_map(|c| match (c.residual, c.reference) {
                (Some(r), Some(d)) if d > 0.0 => Some(r / d),
                _ => None,
            })
            .reduce(f64::max)
    }
}

/// Compares `d(x, exp natural(alpha_t v) x) / t` against the distance on the
/// model space `H\G` for each direction and each `t`.
pub fn cone_convergence_check(
    frame: &Frame,
    x: &Point,
    h: &Subspace,
    directions: &[Vec<f64>],
    ts: &[f64],
    opts: &SolverOptions,
) -> Result<ConeCheckTable> {
    frame.check_point(x)?;
    let hall = frame.basis();
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::NonPositiveDilation(t.to_string()));
    }
    for v in directions {
        if v.len() != hall.dim() {
            return Err(Error::DimensionMismatch {
                expected: hall.dim(),
                found: v.len(),
            });
        }
    }
    let mut ts = ts.to_vec();
    ts.sort_by(|a, b| b.total_cmp(a));
    let references: Vec<std::result::Result<f64, String>> = directions
        .par_iter()
        .map(|v| group_cc_distance(hall, h, v, opts).map(|d| d.value).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, f64)> = (0..directions.len()).flat_map(|i| ts.iter().map(move |&t| (i, t))).collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, t)| {
            let scaled: Vec<f64> = directions[i]
                .iter()
                .enumerate()
                .map(|(k, c)| c * t.powi(hall.degree(k) as i32))
                .collect();
            let ratio = flow_anchored(frame, &scaled, x.coords(), 64)
                .and_then(|y| cc_distance(frame, x, &Point::new(y), opts))
                .map(|d| d.value / t);
            let reference = references[i].clone();
            let error = match (&ratio, &reference) {
                (Err(e), _) => Some(e.to_string()),
                (_, Err(e)) => Some(format!("model space: {e}")),
                _ => None,
            };
            let ratio = ratio.ok();
            let reference = reference.ok();
            ConeCheckCell {
                direction: i,
                t,
                ratio,
                reference,
                residual: ratio.zip(reference).map(|(a, b)| (a - b).abs()),
                error,
            }
        })
        .collect();
    Ok(ConeCheckTable {
        directions: directions.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{bch, LieElement};
    use crate::metric::flow_anchored;
    use crate::rational::q;

    #[test]
    fn bernoulli_series() {
        let w = bernoulli_weights(5);
        assert_eq!(w, vec![qi(1), q(1, 2), q(1, 12), qi(0), q(-1, 720)]);
    }

    #[test]
    fn generator_flows_are_right_translations() {
        let hall = HallBasis::new(2, 3).unwrap();
        let f = group_frame(&hall).unwrap();
        let g0 = vec![0.3, -0.7, 0.2, 0.5, -0.1];
        let mut v = vec![0.0; 5];
        v[hall.generator_index(1)] = 0.9;
        let end = flow_anchored(&f, &v, &g0, 200).unwrap();
        let want = bch(&hall, &LieElement::new(g0), &LieElement::new(v)).unwrap();
        for (a, b) in end.iter().zip(want.coords()) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
