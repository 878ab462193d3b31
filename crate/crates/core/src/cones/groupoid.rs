use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frame::{Frame, Point};
use crate::lie::{bch, exp_ad, HallBasis, LieElement, LieScalar};
use crate::metric::flow_anchored;
use crate::rational::{fmt_q, from_f64, q, rref, to_f64, Q};

use super::limit::{dilated_kernel, dilated_kernel_exact};
use super::path::ApproachPath;
use super::subspace::{grassmann_distance, Subspace};

/// Element of the limit groupoid: a pair of points at scale `t > 0`, or a
/// left coset `gH` over `x` at `t = 0`. Cosets are stored through the
/// unique representative whose coordinates vanish on the pivot columns of
/// the RREF basis of `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupoidElement {
    Pair { x: Vec<Q>, y: Vec<Q>, t: Q },
    Coset { g: Vec<Q>, h: Vec<Vec<Q>>, x: Vec<Q> },
}

fn pivots(rows: &[Vec<Q>]) -> Vec<usize> {
    rows.iter()
        .map(|r| r.iter().position(|c| !c.is_zero()).expect("rref rows are nonzero"))
        .collect()
}

fn lie<S: LieScalar>(v: &[S]) -> LieElement<S> {
    LieElement::new(v.to_vec())
}

/// Representative of `gH` with zero pivot coordinates, obtained by right
/// multiplication with `exp(c r_i)` in pivot order.
pub fn canon_left<S: LieScalar>(hall: &HallBasis, g: &[S], h_rref: &[Vec<S>]) -> Result<Vec<S>> {
    let mut g = lie(g);
    for r in h_rref {
        let p = r.iter().position(|c| !c.is_zero()).expect("rref rows are nonzero");
        let c = S::zero() - g.coords()[p].clone();
        if c.is_zero() {
            continue;
        }
        let step: Vec<S> = r.iter().map(|a| a.clone() * c.clone()).collect();
        g = bch(hall, &g, &lie(&step))?;
    }
    Ok(g.into_coords())
}

/// Representative of `Hg` with zero pivot coordinates, by left multiplication.
pub fn canon_right<S: LieScalar>(hall: &HallBasis, g: &[S], h_rref: &[Vec<S>]) -> Result<Vec<S>> {
    let mut g = lie(g);
    for r in h_rref {
        let p = r.iter().position(|c| !c.is_zero()).expect("rref rows are nonzero");
        let c = S::zero() - g.coords()[p].clone();
        if c.is_zero() {
            continue;
        }
        let step: Vec<S> = r.iter().map(|a| a.clone() * c.clone()).collect();
        g = bch(hall, &lie(&step), &g)?;
    }
    Ok(g.into_coords())
}

/// RREF basis of `Ad_g H`.
fn conjugate_exact(hall: &HallBasis, g: &[Q], h: &[Vec<Q>]) -> Result<Vec<Vec<Q>>> {
    let mut rows = h
        .iter()
        .map(|r| exp_ad(hall, &lie(g), &lie(r)).map(LieElement::into_coords))
        .collect::<Result<Vec<_>>>()?;
    rref(&mut rows);
    Ok(rows)
}

fn closed_under_bracket(hall: &HallBasis, h: &[Vec<Q>]) -> Result<bool> {
    let s = Subspace::from_exact(hall.dim(), h.to_vec())?;
    Ok(super::limit::subalgebra_defect(hall, &s) == 0.0)
}

impl GroupoidElement {
    pub fn pair(x: Vec<Q>, y: Vec<Q>, t: Q) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if t <= Q::zero() {
            return Err(Error::NonPositiveDilation(fmt_q(&t)));
        }
        Ok(GroupoidElement::Pair { x, y, t })
    }

    /// `gH` over `x`; `H` needs an exact basis and must be a subalgebra.
    pub fn coset(hall: &HallBasis, g: &[Q], h: &Subspace, x: Vec<Q>) -> Result<Self> {
        if g.len() != hall.dim() || h.ambient() != hall.dim() {
            return Err(Error::DimensionMismatch {
                expected: hall.dim(),
                found: if g.len() != hall.dim() { g.len() } else { h.ambient() },
            });
        }
        let rows = h
            .exact()
            .ok_or_else(|| Error::InvalidArgument("coset needs an exact subalgebra basis".into()))?
            .to_vec();
        if !closed_under_bracket(hall, &rows)? {
            return Err(Error::InvalidArgument(format!("{} is not a subalgebra", h.describe(hall))));
        }
        let g = canon_left(hall, g, &rows)?;
        Ok(GroupoidElement::Coset { g, h: rows, x })
    }

    /// Identity arrow `(H, x, 0)`.
    pub fn unit_zero(hall: &HallBasis, h: &Subspace, x: Vec<Q>) -> Result<Self> {
        Self::coset(hall, &vec![Q::zero(); hall.dim()], h, x)
    }

    pub fn t(&self) -> Q {
        match self {
            GroupoidElement::Pair { t, .. } => t.clone(),
            GroupoidElement::Coset { .. } => Q::zero(),
        }
    }

    pub fn is_unit(&self) -> bool {
        match self {
            GroupoidElement::Pair { x, y, .. } => x == y,
            GroupoidElement::Coset { g, .. } => g.iter().all(Zero::is_zero),
        }
    }

    /// Subspace part of a `t = 0` element.
    pub fn subalgebra(&self) -> Option<&[Vec<Q>]> {
        match self {
            GroupoidElement::Coset { h, .. } => Some(h),
            GroupoidElement::Pair { .. } => None,
        }
    }
}

impl fmt::Display for GroupoidElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |c: &[Q]| c.iter().map(fmt_q).collect::<Vec<_>>().join(", ");
        match self {
            GroupoidElement::Pair { x, y, t } => write!(f, "(({}), ({}), {})", v(x), v(y), fmt_q(t)),
            GroupoidElement::Coset { g, h, x } => {
                let rows: Vec<String> = h.iter().map(|r| v(r)).collect();
                write!(f, "(({})<{}>, ({}), 0)", v(g), rows.join("; "), v(x))
            }
        }
    }
}

/// Unit at the range: `(x, x, t)` or `(Ad_g H, x, 0)`.
pub fn groupoid_range(hall: &HallBasis, a: &GroupoidElement) -> Result<GroupoidElement> {
    Ok(match a {
        GroupoidElement::Pair { x, t, .. } => GroupoidElement::Pair {
            x: x.clone(),
            y: x.clone(),
            t: t.clone(),
        },
        GroupoidElement::Coset { g, h, x } => GroupoidElement::Coset {
            g: vec![Q::zero(); hall.dim()],
            h: conjugate_exact(hall, g, h)?,
            x: x.clone(),
        },
    })
}

/// Unit at the source: `(y, y, t)` or `(H, x, 0)`.
pub fn groupoid_source(hall: &HallBasis, a: &GroupoidElement) -> GroupoidElement {
    match a {
        GroupoidElement::Pair { y, t, .. } => GroupoidElement::Pair {
            x: y.clone(),
            y: y.clone(),
            t: t.clone(),
        },
        GroupoidElement::Coset { h, x, .. } => GroupoidElement::Coset {
            g: vec![Q::zero(); hall.dim()],
            h: h.clone(),
            x: x.clone(),
        },
    }
}

/// `a . b`, defined when the source of `a` is the range of `b`.
pub fn groupoid_compose(hall: &HallBasis, a: &GroupoidElement, b: &GroupoidElement) -> Result<GroupoidElement> {
    match (a, b) {
        (GroupoidElement::Pair { x, y, t }, GroupoidElement::Pair { x: y2, y: z, t: t2 }) => {
            if t != t2 || y != y2 {
                return Err(Error::NotComposable(format!("{a} after {b}")));
            }
            Ok(GroupoidElement::Pair {
                x: x.clone(),
                y: z.clone(),
                t: t.clone(),
            })
        }
        (GroupoidElement::Coset { g: ga, h: ha, x: xa }, GroupoidElement::Coset { g: gb, h: hb, x: xb }) => {
            if xa != xb || *ha != conjugate_exact(hall, gb, hb)? {
                return Err(Error::NotComposable(format!("{a} after {b}")));
            }
            let g = bch(hall, &lie(ga), &lie(gb))?;
            Ok(GroupoidElement::Coset {
                g: canon_left(hall, g.coords(), hb)?,
                h: hb.clone(),
                x: xb.clone(),
            })
        }
        _ => Err(Error::NotComposable(format!("{a} and {b} lie over different scales"))),
    }
}

/// `(x, y, t)^-1 = (y, x, t)`, `(gH)^-1 = g^-1 (Ad_g H)`.
pub fn groupoid_inverse(hall: &HallBasis, a: &GroupoidElement) -> Result<GroupoidElement> {
    Ok(match a {
        GroupoidElement::Pair { x, y, t } => GroupoidElement::Pair {
            x: y.clone(),
            y: x.clone(),
            t: t.clone(),
        },
        GroupoidElement::Coset { g, h, x } => {
            let h2 = conjugate_exact(hall, g, h)?;
            let minus: Vec<Q> = g.iter().map(|c| -c.clone()).collect();
            GroupoidElement::Coset {
                g: canon_left(hall, &minus, &h2)?,
                h: h2,
                x: x.clone(),
            }
        }
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub s: f64,
    pub t: f64,
    /// `|x_n - x|`.
    pub base_gap: f64,
    /// Principal angle between `alpha_{1/t_n}(ker natural_{x_n})` and `H`.
    pub kernel_gap: f64,
    /// `|w_n - w|` where `w_n` solves `exp(alpha_{t_n} w_n) . x_n = y_n` in
    /// the section transverse to `H` and `w` is the section point of `Hv`.
    pub class_residual: f64,
    /// `|y_n - x_n|`.
    pub displacement: f64,
}

impl ConvergenceRow {
    pub fn worst(&self) -> f64 {
        self.base_gap.max(self.kernel_gap).max(self.class_residual).max(self.displacement)
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Section representative of `Hv`.
    pub target: Vec<f64>,
    /// Representative of the limit class `v^-1 H`.
    pub limit_class: Vec<f64>,
}

impl ConvergenceTable {
    /// Largest `worst() / t` over the rows.
    pub fn rate_constant(&self) -> f64 {
        self.rows.iter().map(|r| r.worst() / r.t).fold(0.0, f64::max)
    }

    /// Least-squares slope of `log worst` against `log t` over rows with a
    /// residual above rounding level; `None` when all residuals vanish.
    pub fn rate(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.worst() > 1e-13)
            .map(|r| (r.t.ln(), r.worst().ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }
}

fn scaled(hall: &HallBasis, w: &[f64], t: f64) -> Vec<f64> {
    w.iter()
        .zip(hall.words())
        .map(|(c, word)| c * t.powi(word.degree as i32))
        .collect()
}

/// Solves `flow(alpha_t w) x = y` for `w` with zero pivot coordinates.
fn recover(frame: &Frame, x: &[f64], y: &[f64], t: f64, start: &[f64], free: &[usize], steps: usize) -> Option<Vec<f64>> {
    let hall = frame.basis();
    let m = free.len();
    let residual = |w: &[f64]| -> Option<DVector<f64>> {
        let end = flow_anchored(frame, &scaled(hall, w, t), x, steps).ok()?;
        Some(DVector::from_iterator(m, end.iter().zip(y).map(|(a, b)| a - b)))
    };
    let mut w = start.to_vec();
    let mut r = residual(&w)?;
    let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for _ in 0..60 {
        if r.norm() <= 1e-14 * scale {
            break;
        }
        let mut jac = DMatrix::zeros(m, m);
        for (c, &k) in free.iter().enumerate() {
            let h = 1e-4 * w[k].abs().max(1.0);
            let mut wp = w.clone();
            wp[k] += h;
            let mut wm = w.clone();
            wm[k] -= h;
            let d = (residual(&wp)? - residual(&wm)?) / (2.0 * h);
            jac.set_column(c, &d);
        }
        let delta = jac.lu().solve(&(-&r))?;
        let mut lambda = 1.0;
        let rn = r.norm();
        loop {
            let mut trial = w.clone();
            for (c, &k) in free.iter().enumerate() {
                trial[k] += lambda * delta[c];
            }
            if let Some(rt) = residual(&trial) {
                if rt.norm() < rn {
                    w = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return (rn <= 1e-10 * scale).then_some(w);
            }
        }
    }
    Some(w)
}

/// Residual table for the sequence `(y_n, x_n, t_n)` with `y_n` the time-one
/// flow of the anchored field of `alpha_{t_n} v` from `x_n`, sampled at
/// `s_j = s0 / 2^j` along the path.
pub fn groupoid_convergence_check(
    frame: &Frame,
    v: &[f64],
    h: &Subspace,
    path: &ApproachPath,
    s0: f64,
    samples: usize,
) -> Result<ConvergenceTable> {
    let hall = frame.basis();
    if v.len() != hall.dim() {
        return Err(Error::DimensionMismatch {
            expected: hall.dim(),
            found: v.len(),
        });
    }
    if h.ambient() != hall.dim() || h.dim() + frame.dimension() != hall.dim() {
        return Err(Error::DimensionMismatch {
            expected: hall.dim() - frame.dimension(),
            found: h.dim(),
        });
    }
    path.validate()?;
    let hq = h
        .rationalize(1000, 1e-9)
        .ok_or_else(|| Error::InvalidArgument("H needs a rational basis".into()))?;
    let rows_q = hq.exact().expect("rationalized").to_vec();
    let rows: Vec<Vec<f64>> = rows_q.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let piv = pivots(&rows_q);
    let free: Vec<usize> = (0..hall.dim()).filter(|k| !piv.contains(k)).collect();
    let target = canon_right(hall, v, &rows)?;
    let minus: Vec<f64> = v.iter().map(|c| -c).collect();
    let limit_class = canon_left(hall, &minus, &rows)?;
    let base = path.base_point()?;
    let steps = 64;
    let mut start: Vec<f64> = v.to_vec();
    for &p in &piv {
        start[p] = 0.0;
    }
    let mut table = Vec::new();
    for j in 0..samples {
        let s = s0 / 2f64.powi(j as i32);
        let (x, t, kernel) = match path {
            ApproachPath::Rational { .. } => {
                let sq = from_f64(s0)? * q(1, 1i64 << j.min(62));
                let (xe, te) = path.at(&sq).expect("rational path");
                let x: Vec<f64> = xe.iter().map(to_f64).collect();
                let kernel = match dilated_kernel_exact(frame, &xe, &te)? {
                    Some(k) => k,
                    None => dilated_kernel(frame, &Point::new(x.clone()), to_f64(&te))?,
                };
                (x, to_f64(&te), kernel)
            }
            ApproachPath::Sampled { samples: pts, .. } => {
                let (p, t) = pts
                    .get(j)
                    .ok_or_else(|| Error::InvalidArgument("not enough path samples".into()))?;
                (p.coords().to_vec(), *t, dilated_kernel(frame, p, *t)?)
            }
        };
        let y = flow_anchored(frame, &scaled(hall, v, t), &x, steps)?;
        let w = recover(frame, &x, &y, t, &start, &free, steps)
            .or_else(|| recover(frame, &x, &y, t, &target, &free, steps))
            .ok_or_else(|| Error::Numerical(format!("could not invert the flow at t = {t:e}")))?;
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        table.push(ConvergenceRow {
            s,
            t,
            base_gap: dist(&x, base.coords()),
            kernel_gap: grassmann_distance(&kernel, &hq)?,
            class_residual: dist(&w, &target),
            displacement: dist(&y, &x),
        });
        start = w;
    }
    Ok(ConvergenceTable {
        rows: table,
        target,
        limit_class,
    })
}
