use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frame::{Frame, Point};
use crate::lie::{coadjoint, Functional, HallBasis, LieElement};
use crate::rational::{from_f64, q, to_f64, Q};

use super::cone::{cone_g0, ConeSample, ConeSampling};
use super::limit::{dilated_kernel, dilated_kernel_exact, DivergenceReport, LimitOptions, Richardson};
use super::path::{ApproachPath, Laurent};
use super::subspace::Subspace;

#[derive(Debug, Clone)]
pub struct HnMembership {
    pub member: bool,
    /// Smallest `|xi(h)| / |xi|` found (after moving along the coadjoint orbit).
    pub defect: f64,
    /// Index of the cone member realising the defect.
    pub witness: Option<usize>,
    /// Group element `g` with `g^-1 . xi` annihilating the witness, when one
    /// was needed.
    pub orbit_element: Option<Vec<f64>>,
}

/// Membership in the union of annihilators of the sampled cone at `x`.
pub fn hn_membership_def2(
    frame: &Frame,
    x: &Point,
    xi: &[f64],
    sampling: &ConeSampling,
    tol: f64,
) -> Result<HnMembership> {
    let cone = cone_g0(frame, x, sampling)?;
    hn_membership_in(frame.basis(), &cone, xi, tol)
}

/// Decides `xi ∈ ∪ h^⊥` over a sampled cone. The cone set is stable under
/// conjugation, so its annihilators form a union of coadjoint orbits; `xi`
/// is tested against every sampled member after moving along its orbit.
pub fn hn_membership_in(hall: &HallBasis, cone: &ConeSample, xi: &[f64], tol: f64) -> Result<HnMembership> {
    if xi.len() != hall.dim() {
        return Err(Error::DimensionMismatch {
            expected: hall.dim(),
            found: xi.len(),
        });
    }
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(HnMembership {
            member: true,
            defect: 0.0,
            witness: cone.members.first().map(|_| 0),
            orbit_element: None,
        });
    }
    let mut best = HnMembership {
        member: false,
        defect: f64::INFINITY,
        witness: None,
        orbit_element: None,
    };
    for (i, m) in cone.members.iter().enumerate() {
        let direct = m.subspace.annihilation_defect(xi);
        if direct < best.defect {
            best = HnMembership {
                member: false,
                defect: direct,
                witness: Some(i),
                orbit_element: None,
            };
        }
        if best.defect <= tol {
            break;
        }
        let (g, d) = orbit_search(hall, &m.subspace, xi, tol);
        if d < best.defect {
            best = HnMembership {
                member: false,
                defect: d,
                witness: Some(i),
                orbit_element: Some(g),
            };
        }
        if best.defect <= tol {
            break;
        }
    }
    best.member = best.defect <= tol;
    Ok(best)
}

fn orbit_residual(hall: &HallBasis, h: &Subspace, xi: &Functional<f64>, g: &[f64], norm: f64) -> DVector<f64> {
    let moved = coadjoint(hall, &LieElement::new(g.iter().map(|c| -c).collect()), xi)
        .expect("dimensions checked");
    let b = h.basis();
    DVector::from_fn(b.nrows(), |i, _| {
        b.row(i).iter().zip(moved.coords()).map(|(a, c)| a * c).sum::<f64>() / norm
    })
}

/// Levenberg–Marquardt on `g -> (g^-1 . xi)|_h` from a few deterministic starts.
fn orbit_search(hall: &HallBasis, h: &Subspace, xi: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let dim = hall.dim();
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let f = Functional::new(xi.to_vec());
    let mut starts = vec![vec![0.0; dim]];
    for k in 0..dim.min(6) {
        for sign in [1.0, -1.0] {
            let mut g = vec![0.0; dim];
            g[k] = sign;
            starts.push(g);
        }
    }
    let mut best = (vec![0.0; dim], f64::INFINITY);
    for start in starts {
        let mut g = start;
        let mut r = orbit_residual(hall, h, &f, &g, norm);
        let mut lambda = 1e-3;
        for _ in 0..200 {
            let rn = r.norm();
            if rn <= tol * 1e-3 {
                break;
            }
            let mut jac = DMatrix::zeros(r.len(), dim);
            for k in 0..dim {
                let step = 1e-6 * g[k].abs().max(1.0);
                let mut gp = g.clone();
                gp[k] += step;
                let mut gm = g.clone();
                gm[k] -= step;
                let d = (orbit_residual(hall, h, &f, &gp, norm) - orbit_residual(hall, h, &f, &gm, norm)) / (2.0 * step);
                jac.set_column(k, &d);
            }
            let jt = jac.transpose();
            let mut improved = false;
            for _ in 0..20 {
                let mut a = &jt * &jac;
                for k in 0..dim {
                    a[(k, k)] += lambda * (1.0 + a[(k, k)]);
                }
                let Some(delta) = a.lu().solve(&(-(&jt * &r))) else { break };
                let trial: Vec<f64> = g.iter().zip(delta.iter()).map(|(x, d)| x + d).collect();
                let rt = orbit_residual(hall, h, &f, &trial, norm);
                if rt.norm() < rn {
                    g = trial;
                    r = rt;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        let d = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if d < best.1 {
            best = (g, d);
        }
        if best.1 <= tol * 1e-3 {
            break;
        }
    }
    best
}

/// Cotangent data along an approach path.
#[derive(Debug, Clone)]
pub enum CovectorFamily {
    /// Components of `xi(s)` in the coordinate coframe.
    Explicit(Vec<Laurent>),
    /// At each `s`, the covector whose pulled-back functional is the
    /// orthogonal projection of the given functional onto the attainable set.
    Projected(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct CovectorPath {
    pub path: ApproachPath,
    pub covector: CovectorFamily,
}

#[derive(Debug, Clone)]
pub enum Def1Outcome {
    Converged {
        limit: Vec<f64>,
        residual: f64,
        samples: usize,
    },
    Diverged(DivergenceReport),
}

fn weights(hall: &HallBasis, t: &Q) -> Vec<Q> {
    let mut powers = vec![Q::from_integer(1.into())];
    for d in 1..=hall.step() {
        let p = &powers[d - 1] * t;
        powers.push(p);
    }
    hall.words().iter().map(|w| powers[w.degree].clone()).collect()
}

/// Value of `xi(s) ∘ natural_{x(s)} ∘ alpha_{t(s)}` at one sample.
fn pulled_back(frame: &Frame, cp: &CovectorPath, s: &Q) -> Result<Vec<f64>> {
    let hall = frame.basis();
    let (x, t) = cp
        .path
        .at(s)
        .ok_or_else(|| Error::InvalidArgument("covector paths must be rational".into()))?;
    if t <= Q::from_integer(0.into()) {
        return Err(Error::NonPositiveDilation(format!("t(s) at s = {}", to_f64(s))));
    }
    match &cp.covector {
        CovectorFamily::Explicit(xi) => {
            if xi.len() != frame.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: frame.dimension(),
                    found: xi.len(),
                });
            }
            let xi_s: Vec<Q> = xi.iter().map(|c| c.eval(s)).collect();
            let w = weights(hall, &t);
            if let Some(m) = frame.anchor_matrix_exact(&x) {
                return Ok((0..hall.dim())
                    .map(|k| {
                        let v = xi_s
                            .iter()
                            .zip(&m)
                            .fold(Q::from_integer(0.into()), |acc, (a, row)| acc + a * &row[k]);
                        to_f64(&(v * &w[k]))
                    })
                    .collect());
            }
            let xf: Vec<f64> = x.iter().map(to_f64).collect();
            let m = frame.anchor_matrix(&xf);
            Ok((0..hall.dim())
                .map(|k| {
                    let v: f64 = xi_s.iter().enumerate().map(|(i, a)| to_f64(a) * m[(i, k)]).sum();
                    v * to_f64(&w[k])
                })
                .collect())
        }
        CovectorFamily::Projected(eta) => {
            if eta.len() != hall.dim() {
                return Err(Error::DimensionMismatch {
                    expected: hall.dim(),
                    found: eta.len(),
                });
            }
            // the attainable functionals at (x, t) are the annihilator of the dilated kernel
            let kernel = match dilated_kernel_exact(frame, &x, &t)? {
                Some(k) => k,
                None => dilated_kernel(frame, &Point::new(x.iter().map(to_f64).collect()), to_f64(&t))?,
            };
            let p = kernel.projector();
            let e = DVector::from_column_slice(eta);
            Ok((&e - p * &e).iter().copied().collect())
        }
    }
}

/// Limit of the pulled-back functionals along the path, by Richardson
/// extrapolation at `s0 / 2^j`.
pub fn hn_sample_def1(frame: &Frame, cp: &CovectorPath, opts: &LimitOptions) -> Result<Def1Outcome> {
    cp.path.validate()?;
    let s0 = from_f64(opts.s0)?;
    let mut rich = Richardson::new();
    let mut prev: Option<DVector<f64>> = None;
    let mut gaps = Vec::new();
    let mut below = 0;
    for j in 0..=opts.max_halvings {
        let s = &s0 * q(1, 1i64 << j.min(62));
        let v = pulled_back(frame, cp, &s)?;
        let n = v.len();
        let Some(est) = rich.push(DMatrix::from_column_slice(n, 1, &v)) else {
            continue;
        };
        let est = DVector::from_column_slice(est.as_slice());
        if let Some(p) = &prev {
            let d = (&est - p).norm() / est.norm().max(1.0);
            gaps.push((to_f64(&s), d));
            below = if d < opts.tol { below + 1 } else { 0 };
            if below >= 2 {
                return Ok(Def1Outcome::Converged {
                    limit: est.iter().copied().collect(),
                    residual: d,
                    samples: j + 1,
                });
            }
        }
        prev = Some(est);
    }
    Ok(Def1Outcome::Diverged(DivergenceReport {
        path: cp.path.to_string(),
        gaps,
        reason: "pulled-back functionals do not settle".into(),
    }))
}
