use std::f64::consts::PI;

use argmin::core::{CostFunction, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{CompiledField, Frame, Point};

use super::flow::{path_length, ControlPath};

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub steps: usize,
    /// RK4 substeps per control interval.
    pub substeps: usize,
    pub restarts: usize,
    pub endpoint_tol: f64,
    pub penalty_rounds: usize,
    pub penalty_growth: f64,
    /// L-BFGS iterations per penalty round.
    pub max_inner: u64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            steps: 64,
            substeps: 4,
            restarts: 8,
            endpoint_tol: 1e-6,
            penalty_rounds: 6,
            penalty_growth: 10.0,
            max_inner: 300,
            seed: 0,
        }
    }
}

/// Upper-bound estimate of a Carnot-Caratheodory distance.
#[derive(Debug, Clone)]
pub struct DistanceEstimate {
    pub value: f64,
    pub controls: ControlPath,
    /// Chart endpoint of the returned path.
    pub endpoint: Vec<f64>,
    /// Norm of the endpoint constraint at the returned path.
    pub residual: f64,
    pub converged: bool,
    pub restarts: usize,
    pub converged_restarts: usize,
}

/// Endpoint constraint `c(z) = 0` on the chart.
pub(crate) trait Target: Sync {
    fn residual(&self, z: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>>;
}

struct PointTarget {
    y: Vec<f64>,
    periodic: Vec<bool>,
}

impl Target for PointTarget {
    fn residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(z.iter()
            .zip(&self.y)
            .zip(&self.periodic)
            .map(|((a, b), &p)| {
                let d = a - b;
                if p {
                    d - 2.0 * PI * (d / (2.0 * PI)).round()
                } else {
                    d
                }
            })
            .collect())
    }

    fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(z.len(), z.len()))
    }
}

/// Central differences, for targets without a closed-form Jacobian.
pub(crate) fn fd_jacobian(t: &dyn Target, z: &[f64]) -> Result<DMatrix<f64>> {
    let c0 = t.residual(z)?;
    let mut j = DMatrix::zeros(c0.len(), z.len());
    let mut zp = z.to_vec();
    for i in 0..z.len() {
        let h = 1e-6 * z[i].abs().max(1.0);
        zp[i] = z[i] + h;
        let a = t.residual(&zp)?;
        zp[i] = z[i] - h;
        let b = t.residual(&zp)?;
        zp[i] = z[i];
        for k in 0..c0.len() {
            j[(k, i)] = (a[k] - b[k]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Piecewise-constant control system integrated by RK4, with its discrete
/// adjoint.
struct Dynamics<'a> {
    frame: &'a Frame,
    fields: Vec<&'a CompiledField>,
    m: usize,
    n: usize,
    steps: usize,
    sub: usize,
    bounded: bool,
}

impl<'a> Dynamics<'a> {
    fn new(frame: &'a Frame, steps: usize, sub: usize) -> Self {
        let hall = frame.basis();
        Dynamics {
            frame,
            fields: (0..frame.generators())
                .map(|j| frame.compiled(hall.generator_index(j)))
                .collect(),
            m: frame.dimension(),
            n: frame.generators(),
            steps,
            sub,
            bounded: frame.bounds().iter().any(Option::is_some),
        }
    }

    fn rhs(&self, y: &[f64], row: &[f64], out: &mut [f64], col: &mut [f64]) {
        let s = 1.0 / self.steps as f64;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &c) in row.iter().enumerate() {
            if c != 0.0 {
                self.fields[j].eval_into(y, col);
                for (o, v) in out.iter_mut().zip(col.iter()) {
                    *o += s * c * v;
                }
            }
        }
    }

    /// `J(y)^T g` for the right-hand side with control `row`.
    fn rhs_vjp(&self, y: &[f64], row: &[f64], g: &[f64], ybar: &mut [f64], ubar: &mut [f64]) {
        let s = 1.0 / self.steps as f64;
        let mut col = vec![0.0; self.m];
        for (j, &c) in row.iter().enumerate() {
            self.fields[j].eval_into(y, &mut col);
            ubar[j] += s * col.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
            if c != 0.0 {
                for (i, yb) in ybar.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, gk) in g.iter().enumerate() {
                        if *gk != 0.0 {
                            acc += gk * self.fields[j].jacobian_entry(y, k, i);
                        }
                    }
                    *yb += s * c * acc;
                }
            }
        }
    }

    /// Endpoint, optionally recording the state at the start of every
    /// substep. `None` when the path leaves the chart or blows up.
    fn forward(&self, x0: &[f64], u: &[f64], mut store: Option<&mut Vec<Vec<f64>>>) -> Option<Vec<f64>> {
        let m = self.m;
        let h = 1.0 / self.sub as f64;
        let mut x = x0.to_vec();
        let (mut k1, mut k2, mut k3, mut k4, mut tmp, mut col) =
            (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..self.steps {
            let row = &u[i * self.n..(i + 1) * self.n];
            for _ in 0..self.sub {
                if let Some(s) = store.as_deref_mut() {
                    s.push(x.clone());
                }
                self.rhs(&x, row, &mut k1, &mut col);
                for j in 0..m {
                    tmp[j] = x[j] + 0.5 * h * k1[j];
                }
                self.rhs(&tmp, row, &mut k2, &mut col);
                for j in 0..m {
                    tmp[j] = x[j] + 0.5 * h * k2[j];
                }
                self.rhs(&tmp, row, &mut k3, &mut col);
                for j in 0..m {
                    tmp[j] = x[j] + h * k3[j];
                }
                self.rhs(&tmp, row, &mut k4, &mut col);
                for j in 0..m {
                    x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                if x.iter().any(|v| !v.is_finite()) || (self.bounded && !self.frame.in_chart(&x)) {
                    return None;
                }
            }
        }
        Some(x)
    }

    /// Gradient of `a . x(1)` with respect to the controls.
    fn backward(&self, u: &[f64], states: &[Vec<f64>], a_end: &[f64]) -> Vec<f64> {
        let m = self.m;
        let h = 1.0 / self.sub as f64;
        let mut grad = vec![0.0; u.len()];
        let mut a = a_end.to_vec();
        let (mut k1, mut k2, mut k3, mut col) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let (mut y2, mut y3, mut y4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in (0..self.steps).rev() {
            let row = &u[i * self.n..(i + 1) * self.n];
            let ubar = &mut grad[i * self.n..(i + 1) * self.n];
            for k in (0..self.sub).rev() {
                let y = &states[i * self.sub + k];
                self.rhs(y, row, &mut k1, &mut col);
                for j in 0..m {
                    y2[j] = y[j] + 0.5 * h * k1[j];
                }
                self.rhs(&y2, row, &mut k2, &mut col);
                for j in 0..m {
                    y3[j] = y[j] + 0.5 * h * k2[j];
                }
                self.rhs(&y3, row, &mut k3, &mut col);
                for j in 0..m {
                    y4[j] = y[j] + h * k3[j];
                }
                let mut g1: Vec<f64> = a.iter().map(|v| h / 6.0 * v).collect();
                let mut g2: Vec<f64> = a.iter().map(|v| h / 3.0 * v).collect();
                let mut g3 = g2.clone();
                let g4 = g1.clone();
                let mut total = a.clone();
                let mut ybar = vec![0.0; m];
                self.rhs_vjp(&y4, row, &g4, &mut ybar, ubar);
                for j in 0..m {
                    total[j] += ybar[j];
                    g3[j] += h * ybar[j];
                    ybar[j] = 0.0;
                }
                self.rhs_vjp(&y3, row, &g3, &mut ybar, ubar);
                for j in 0..m {
                    total[j] += ybar[j];
                    g2[j] += 0.5 * h * ybar[j];
                    ybar[j] = 0.0;
                }
                self.rhs_vjp(&y2, row, &g2, &mut ybar, ubar);
                for j in 0..m {
                    total[j] += ybar[j];
                    g1[j] += 0.5 * h * ybar[j];
                    ybar[j] = 0.0;
                }
                self.rhs_vjp(y, row, &g1, &mut ybar, ubar);
                for j in 0..m {
                    total[j] += ybar[j];
                }
                a = total;
            }
        }
        grad
    }
}

struct Problem<'a> {
    dyn_: &'a Dynamics<'a>,
    x0: &'a [f64],
    target: &'a dyn Target,
    lambda: Vec<f64>,
    mu: f64,
}

const BLOWUP: f64 = 1e30;

impl Problem<'_> {
    fn energy(&self, u: &[f64]) -> f64 {
        u.iter().map(|v| v * v).sum::<f64>() / self.dyn_.steps as f64
    }
}

impl CostFunction for Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let Some(z) = self.dyn_.forward(self.x0, u, None) else {
            return Ok(BLOWUP);
        };
        let Ok(c) = self.target.residual(&z) else {
            return Ok(BLOWUP);
        };
        let lin: f64 = self.lambda.iter().zip(&c).map(|(l, c)| l * c).sum();
        let quad: f64 = c.iter().map(|c| c * c).sum();
        Ok(self.energy(u) + lin + 0.5 * self.mu * quad)
    }
}

impl Gradient for Problem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, u: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        let h = 1.0 / self.dyn_.steps as f64;
        let mut states = Vec::with_capacity(self.dyn_.steps * self.dyn_.sub);
        let Some(z) = self.dyn_.forward(self.x0, u, Some(&mut states)) else {
            return Ok(vec![0.0; u.len()]);
        };
        let (Ok(c), Ok(jt)) = (self.target.residual(&z), self.target.jacobian(&z)) else {
            return Ok(vec![0.0; u.len()]);
        };
        let w = DVector::from_iterator(c.len(), self.lambda.iter().zip(&c).map(|(l, c)| l + self.mu * c));
        let a = jt.transpose() * w;
        let mut g = self.dyn_.backward(u, &states, a.as_slice());
        for (gi, ui) in g.iter_mut().zip(u) {
            *gi += 2.0 * h * ui;
        }
        Ok(g)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Attempt {
    u: Vec<f64>,
    endpoint: Vec<f64>,
    residual: f64,
    value: f64,
}

struct Context<'a> {
    dyn_: Dynamics<'a>,
    x0: Vec<f64>,
    target: &'a dyn Target,
    opts: &'a SolverOptions,
    /// Expected length scale of the answer.
    scale: f64,
    c0: f64,
}

impl Context<'_> {
    fn evaluate(&self, u: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let z = self.dyn_.forward(&self.x0, u, None)?;
        let c = self.target.residual(&z).ok()?;
        Some((z, c))
    }

    /// Rows of `d c(x(1)) / d u`.
    fn constraint_jacobian(&self, u: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let mut states = Vec::new();
        let z = self.dyn_.forward(&self.x0, u, Some(&mut states))?;
        let c = self.target.residual(&z).ok()?;
        let jt = self.target.jacobian(&z).ok()?;
        let mut j = DMatrix::zeros(c.len(), u.len());
        for r in 0..c.len() {
            let a: Vec<f64> = jt.row(r).iter().copied().collect();
            let g = self.dyn_.backward(u, &states, &a);
            for (k, v) in g.into_iter().enumerate() {
                j[(r, k)] = v;
            }
        }
        Some((c, j))
    }

    /// Gauss-Newton minimal-norm corrections onto the constraint.
    fn project(&self, mut u: Vec<f64>) -> Vec<f64> {
        let Some((_, mut c)) = self.evaluate(&u) else {
            return u;
        };
        for _ in 0..40 {
            let r = norm(&c);
            if r <= 1e-3 * self.opts.endpoint_tol {
                break;
            }
            let Some((_, j)) = self.constraint_jacobian(&u) else {
                break;
            };
            let gram = &j * j.transpose();
            let eps = 1e-14 * gram.norm().max(1e-300);
            let Ok(z) = gram.svd(true, true).solve(&DVector::from_column_slice(&c), eps) else {
                break;
            };
            let delta = j.transpose() * z;
            let mut alpha = 1.0;
            let mut improved = false;
            while alpha > 1e-4 {
                let trial: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a - alpha * d).collect();
                if let Some((_, ct)) = self.evaluate(&trial) {
                    if norm(&ct) < r {
                        u = trial;
                        c = ct;
                        improved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        u
    }

    fn minimize(&self, init: Vec<f64>, lambda: Vec<f64>, mu: f64) -> Vec<f64> {
        let problem = Problem {
            dyn_: &self.dyn_,
            x0: &self.x0,
            target: self.target,
            lambda,
            mu,
        };
        let solver = LBFGS::new(MoreThuenteLineSearch::new(), 10)
            .with_tolerance_grad(1e-9 * self.scale)
            .and_then(|s| s.with_tolerance_cost(1e-13 * self.scale * self.scale));
        let Ok(solver) = solver else {
            return init;
        };
        match Executor::new(problem, solver)
            .configure(|s| s.param(init.clone()).max_iters(self.opts.max_inner))
            .run()
        {
            Ok(res) => res.state().get_best_param().cloned().unwrap_or(init),
            Err(_) => init,
        }
    }

    fn solve_from(&self, init: Vec<f64>) -> Option<Attempt> {
        let (_, c) = self.evaluate(&init)?;
        let mut lambda = vec![0.0; c.len()];
        let mut mu = 10.0 * (self.scale / self.c0.max(1e-300)).powi(2);
        let mut u = init;
        for _ in 0..self.opts.penalty_rounds.max(1) {
            u = self.minimize(u, lambda.clone(), mu);
            let (_, c) = self.evaluate(&u)?;
            if norm(&c) <= 0.1 * self.opts.endpoint_tol {
                break;
            }
            for (l, ci) in lambda.iter_mut().zip(&c) {
                *l += mu * ci;
            }
            mu *= self.opts.penalty_growth;
        }
        let u = self.project(u);
        let (z, c) = self.evaluate(&u)?;
        let value = path_length(&ControlPath::from_flat(self.dyn_.steps, self.dyn_.n, u.clone()));
        Some(Attempt {
            u,
            endpoint: z,
            residual: norm(&c),
            value,
        })
    }

    /// Constant controls solving the linearized constraint at the start.
    fn straight_guess(&self) -> Vec<f64> {
        let n = self.dyn_.n;
        let mut a = DMatrix::zeros(self.x0.len(), n);
        for j in 0..n {
            let col = self.dyn_.fields[j].eval(&self.x0);
            for (i, v) in col.into_iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        let (Ok(jt), Some((_, c))) = (self.target.jacobian(&self.x0), self.evaluate(&vec![0.0; self.dyn_.steps * n])) else {
            return vec![0.0; self.dyn_.steps * n];
        };
        let b = jt * a;
        let rhs = -DVector::from_column_slice(&c);
        let row = b
            .svd(true, true)
            .solve(&rhs, 1e-10)
            .map(|v| v.iter().copied().collect::<Vec<f64>>())
            .unwrap_or_else(|_| vec![0.0; n]);
        (0..self.dyn_.steps).flat_map(|_| row.iter().copied()).collect()
    }

    fn perturbed(&self, base: &[f64], restart: usize) -> Vec<f64> {
        let n = self.dyn_.n;
        let steps = self.dyn_.steps;
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ restart as u64);
        let mut u = base.to_vec();
        for j in 0..n {
            for k in 0..4 {
                let a: f64 = rng.gen_range(-1.0..1.0);
                let b: f64 = rng.gen_range(-1.0..1.0);
                let w = self.scale / (k.max(1) as f64);
                for i in 0..steps {
                    let t = (i as f64 + 0.5) / steps as f64;
                    let arg = 2.0 * PI * k as f64 * t;
                    u[i * n + j] += w * (a * arg.cos() + if k > 0 { b * arg.sin() } else { 0.0 });
                }
            }
        }
        u
    }
}

pub(crate) fn solve(frame: &Frame, x0: &[f64], target: &dyn Target, depth: usize, opts: &SolverOptions) -> Result<DistanceEstimate> {
    if opts.steps == 0 || opts.substeps == 0 {
        return Err(Error::InvalidArgument("steps and substeps must be positive".into()));
    }
    if !(opts.endpoint_tol > 0.0) {
        return Err(Error::InvalidArgument("endpoint tolerance must be positive".into()));
    }
    let dyn_ = Dynamics::new(frame, opts.steps, opts.substeps);
    let n = dyn_.n;
    let c0 = norm(&target.residual(x0)?);
    if c0 <= opts.endpoint_tol {
        return Ok(DistanceEstimate {
            value: 0.0,
            controls: ControlPath::zeros(opts.steps, n),
            endpoint: x0.to_vec(),
            residual: c0,
            converged: true,
            restarts: 0,
            converged_restarts: 1,
        });
    }
    let ctx = Context {
        dyn_,
        x0: x0.to_vec(),
        target,
        opts,
        scale: c0.powf(1.0 / depth.max(1) as f64),
        c0,
    };
    let base = ctx.straight_guess();
    let attempts: Vec<Option<Attempt>> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let init = if r == 0 { base.clone() } else { ctx.perturbed(&base, r) };
            ctx.solve_from(init)
        })
        .collect();
    let tried = attempts.len();
    let finished: Vec<Attempt> = attempts.into_iter().flatten().collect();
    let converged: Vec<&Attempt> = finished.iter().filter(|a| a.residual <= opts.endpoint_tol).collect();
    let best = converged
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.residual.total_cmp(&b.residual)));
    match best {
        Some(a) => Ok(DistanceEstimate {
            value: a.value,
            controls: ControlPath::from_flat(opts.steps, n, a.u.clone()),
            endpoint: a.endpoint.clone(),
            residual: a.residual,
            converged: true,
            restarts: tried,
            converged_restarts: converged.len(),
        }),
        None => {
            let inc = finished.iter().min_by(|a, b| a.residual.total_cmp(&b.residual));
            Err(Error::NonConverged {
                best_value: inc.map_or(f64::NAN, |a| a.value),
                best_residual: inc.map_or(f64::INFINITY, |a| a.residual),
            })
        }
    }
}

/// Distance estimate between two chart points by direct transcription.
pub fn cc_distance(frame: &Frame, x: &Point, y: &Point, opts: &SolverOptions) -> Result<DistanceEstimate> {
    frame.check_point(x)?;
    frame.check_point(y)?;
    let depth = frame.check_hormander(x)?.depth.unwrap_or(frame.step());
    let target = PointTarget {
        y: y.coords().to_vec(),
        periodic: frame.periodic().to_vec(),
    };
    solve(frame, x.coords(), &target, depth, opts)
}
