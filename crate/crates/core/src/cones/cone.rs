use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Frame, Point};
use crate::lie::{exp_ad, HallBasis, LieElement};
use crate::linalg;
use crate::metric::flow_anchored;
use crate::rational::{fmt_q, q, qi, to_f64, Q};

use super::limit::{limit_along, ConeLimit, DivergenceReport, LimitOptions, LimitOutcome};
use super::path::ApproachPath;
use super::subspace::{grassmann_distance, Subspace};

/// Approach family used to sample the tangent cones at a point.
#[derive(Debug, Clone)]
pub struct ConeSampling {
    /// Ratios `lambda` of displacement to scale for paths `x* + lambda s e_j`, `t = s`.
    pub lambdas: Vec<Q>,
    /// Also use `x* +- s e_j` with `t = s^2` (ratio tending to infinity).
    pub infinity: bool,
    pub merge_tol: f64,
    pub limit: LimitOptions,
    /// Group elements for the conjugation-closure test; `None` picks a
    /// default set and an empty list disables the test.
    pub closure_elements: Option<Vec<Vec<f64>>>,
    pub closure_tol: f64,
    pub closure_flow_steps: usize,
}

impl Default for ConeSampling {
    fn default() -> Self {
        let mut lambdas = vec![qi(0)];
        for v in [q(1, 2), qi(1), qi(2), qi(8)] {
            lambdas.push(v.clone());
            lambdas.push(-v);
        }
        ConeSampling {
            lambdas,
            infinity: true,
            merge_tol: 1e-6,
            limit: LimitOptions::default(),
            closure_elements: None,
            closure_tol: 1e-5,
            closure_flow_steps: 64,
        }
    }
}

impl ConeSampling {
    fn closure_elements_for(&self, hall: &HallBasis) -> Vec<Vec<f64>> {
        if let Some(g) = &self.closure_elements {
            return g.clone();
        }
        let dim = hall.dim();
        let mut out = Vec::new();
        for j in 0..hall.generators().min(3) {
            let mut g = vec![0.0; dim];
            g[hall.generator_index(j)] = 0.5;
            out.push(g);
        }
        out.push((0..dim).map(|k| 1.0 / (k as f64 + 2.0)).collect());
        out
    }
}

#[derive(Debug, Clone)]
pub struct ConeMember {
    pub subspace: Subspace,
    /// `dim(h ∩ g_{>=d})` for `d = 1..N`, joined by `/`.
    pub stratum: String,
    pub subalgebra: bool,
    pub residual: f64,
    /// Approach paths whose limit merged into this member.
    pub approaches: Vec<String>,
    path: ApproachPath,
}

impl ConeMember {
    pub fn path(&self) -> &ApproachPath {
        &self.path
    }
}

#[derive(Debug, Clone)]
pub struct ClosureCheck {
    pub member: usize,
    pub element: Vec<f64>,
    /// Distance between the limit along the conjugated path and `Ad_{g^-1} h`.
    pub distance: f64,
    /// Whether the conjugate is within the merge tolerance of a sampled member.
    pub sampled: bool,
}

/// Finite sample of the tangent cone set at a point. Never exhaustive.
#[derive(Debug, Clone)]
pub struct ConeSample {
    pub point: Point,
    pub members: Vec<ConeMember>,
    pub divergent: Vec<DivergenceReport>,
    pub closure: Vec<ClosureCheck>,
    pub closure_tol: f64,
}

impl ConeSample {
    pub fn closure_ok(&self) -> bool {
        self.closure.iter().all(|c| c.distance <= self.closure_tol)
    }

    pub fn find(&self, s: &Subspace, tol: f64) -> Option<usize> {
        self.members
            .iter()
            .position(|m| grassmann_distance(&m.subspace, s).is_ok_and(|d| d < tol))
    }
}

/// Degree profile `dim(h ∩ g_{>=d})`.
pub fn stratum_label(hall: &HallBasis, h: &Subspace) -> String {
    let degrees = hall.degrees();
    let k = h.dim();
    (1..=hall.step())
        .map(|d| {
            let w: Vec<usize> = (0..hall.dim()).filter(|&c| degrees[c] >= d).collect();
            let mut rows = h.rows();
            for &c in &w {
                let mut e = vec![0.0; hall.dim()];
                e[c] = 1.0;
                rows.push(e);
            }
            let sum = linalg::numerical_rank(&linalg::from_rows(&rows, hall.dim()), 1e-9);
            (k + w.len() - sum).to_string()
        })
        .collect::<Vec<_>>()
        .join("/")
}

fn approach_family(x: &[Q], m: usize, sampling: &ConeSampling) -> Vec<(String, ApproachPath)> {
    let mut paths = vec![("fixed".to_string(), ApproachPath::fixed(x))];
    for axis in 0..m {
        for l in sampling.lambdas.iter().filter(|l| **l != qi(0)) {
            paths.push((
                format!("axis={} lambda={}", axis + 1, fmt_q(l)),
                ApproachPath::linear(x, axis, l),
            ));
        }
        if sampling.infinity {
            for sign in [1, -1] {
                paths.push((
                    format!("axis={} lambda={}inf", axis + 1, if sign > 0 { "+" } else { "-" }),
                    ApproachPath::parabolic(x, axis, sign),
                ));
            }
        }
    }
    paths
}

/// Samples `G_x^0`: limits of dilated kernels along a family of approach
/// paths, deduplicated, each checked to be a subalgebra, with a
/// conjugation-closure test.
pub fn cone_g0(frame: &Frame, x: &Point, sampling: &ConeSampling) -> Result<ConeSample> {
    frame.check_point(x)?;
    let report = frame.check_hormander(x)?;
    if !report.satisfied {
        return Err(Error::NotSurjective {
            point: x.to_string(),
            rank: report.rank,
            dimension: frame.dimension(),
        });
    }
    let xe = x
        .exact_coords()
        .ok_or_else(|| Error::InvalidArgument("cone sampling needs a rational base point".into()))?;
    let hall = frame.basis();
    let family = approach_family(xe, frame.dimension(), sampling);
    let results: Vec<(String, ApproachPath, Result<LimitOutcome>)> = family
        .into_par_iter()
        .map(|(label, path)| {
            let r = limit_along(frame, &path, &sampling.limit);
            (label, path, r)
        })
        .collect();
    let mut members: Vec<ConeMember> = Vec::new();
    let mut divergent = Vec::new();
    for (label, path, r) in results {
        match r? {
            LimitOutcome::Converged(ConeLimit {
                subspace, residual, ..
            }) => {
                let hit = members.iter_mut().find(|m| {
                    grassmann_distance(&m.subspace, &subspace).is_ok_and(|d| d < sampling.merge_tol)
                });
                match hit {
                    Some(m) => m.approaches.push(label),
                    None => members.push(ConeMember {
                        stratum: stratum_label(hall, &subspace),
                        subalgebra: super::limit::is_subalgebra(hall, &subspace, sampling.limit.subalgebra_tol),
                        subspace,
                        residual,
                        approaches: vec![label],
                        path,
                    }),
                }
            }
            LimitOutcome::Diverged(d) => divergent.push(d),
        }
    }
    members.sort_by_cached_key(|m| (m.stratum.clone(), m.subspace.describe(hall)));
    let elements = sampling.closure_elements_for(hall);
    let tasks: Vec<(usize, Vec<f64>)> = (0..members.len())
        .flat_map(|i| elements.iter().map(move |g| (i, g.clone())))
        .collect();
    let closure: Vec<ClosureCheck> = tasks
        .into_par_iter()
        .map(|(i, g)| {
            let distance = conjugation_distance(frame, &members[i], &g, sampling).unwrap_or(f64::INFINITY);
            let conj = conjugate(hall, &members[i].subspace, &g);
            let sampled = members
                .iter()
                .any(|m| grassmann_distance(&m.subspace, &conj).is_ok_and(|d| d < sampling.merge_tol));
            ClosureCheck {
                member: i,
                element: g,
                distance,
                sampled,
            }
        })
        .collect();
    Ok(ConeSample {
        point: x.clone(),
        members,
        divergent,
        closure,
        closure_tol: sampling.closure_tol,
    })
}

/// `Ad_{g^{-1}} h`.
pub fn conjugate(hall: &HallBasis, h: &Subspace, g: &[f64]) -> Subspace {
    let minus: LieElement<f64> = LieElement::new(g.iter().map(|c| -c).collect());
    let rows: Vec<Vec<f64>> = h
        .rows()
        .into_iter()
        .map(|r| {
            exp_ad(hall, &minus, &LieElement::new(r))
                .expect("sizes checked")
                .into_coords()
        })
        .collect();
    Subspace::from_matrix(&linalg::from_rows(&rows, hall.dim()))
}

/// Flows every point of the member's approach path by the anchored field
/// of `alpha_t(g)`; the limit along the new path should be `Ad_{g^-1} h`.
fn conjugation_distance(frame: &Frame, member: &ConeMember, g: &[f64], sampling: &ConeSampling) -> Result<f64> {
    let hall = frame.basis();
    let s0 = sampling.limit.s0;
    let mut samples = Vec::new();
    for j in 0..28 {
        let s = q(1, 1i64 << j) * crate::rational::from_f64(s0)?;
        let (x, t) = member.path.at(&s).expect("cone paths are rational");
        let t = to_f64(&t);
        let scaled: Vec<f64> = g
            .iter()
            .zip(hall.words())
            .map(|(c, w)| c * t.powi(w.degree as i32))
            .collect();
        let x0: Vec<f64> = x.iter().map(to_f64).collect();
        let y = flow_anchored(frame, &scaled, &x0, sampling.closure_flow_steps)?;
        samples.push((Point::new(y), t));
    }
    let path = ApproachPath::Sampled { s0, samples };
    let opts = LimitOptions {
        tol: sampling.closure_tol * 1e-2,
        ..sampling.limit.clone()
    };
    match limit_along(frame, &path, &opts)? {
        LimitOutcome::Converged(c) => grassmann_distance(&c.subspace, &conjugate(hall, &member.subspace, g)),
        LimitOutcome::Diverged(_) => Ok(f64::INFINITY),
    }
}
