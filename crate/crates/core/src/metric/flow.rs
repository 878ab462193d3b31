use crate::error::{Error, Result};
use crate::frame::{Frame, Point};

/// Piecewise-constant controls on a uniform partition of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    steps: usize,
    generators: usize,
    data: Vec<f64>,
}

impl ControlPath {
    pub fn zeros(steps: usize, generators: usize) -> Self {
        ControlPath {
            steps: steps.max(1),
            generators,
            data: vec![0.0; steps.max(1) * generators],
        }
    }

    /// Rows are intervals, columns are generators.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidArgument("control path needs at least one step".into()));
        };
        let generators = first.len();
        if let Some(r) = rows.iter().find(|r| r.len() != generators) {
            return Err(Error::DimensionMismatch {
                expected: generators,
                found: r.len(),
            });
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("control entries must be finite".into()));
        }
        Ok(ControlPath {
            steps: rows.len(),
            generators,
            data: rows.concat(),
        })
    }

    /// The same control on every interval.
    pub fn constant(steps: usize, u: &[f64]) -> Self {
        let steps = steps.max(1);
        ControlPath {
            steps,
            generators: u.len(),
            data: (0..steps).flat_map(|_| u.iter().copied()).collect(),
        }
    }

    pub(crate) fn from_flat(steps: usize, generators: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), steps * generators);
        ControlPath {
            steps,
            generators,
            data,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.generators..(i + 1) * self.generators]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Each interval repeated `factor` times; the length is unchanged.
    pub fn refine(&self, factor: usize) -> ControlPath {
        let factor = factor.max(1);
        let data = (0..self.steps)
            .flat_map(|i| (0..factor).flat_map(move |_| self.row(i).iter().copied()))
            .collect();
        ControlPath {
            steps: self.steps * factor,
            generators: self.generators,
            data,
        }
    }
}

/// `int_0^1 |u(t)| dt`, exact for piecewise-constant controls.
pub fn path_length(u: &ControlPath) -> f64 {
    let h = 1.0 / u.steps as f64;
    (0..u.steps)
        .map(|i| u.row(i).iter().map(|x| x * x).sum::<f64>().sqrt() * h)
        .sum()
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub endpoint: Point,
    /// State at the start of every interval and at the end.
    pub samples: Vec<Vec<f64>>,
}

/// Classical RK4 for `x' = f(x)` over `[0, 1]` with the given number of steps.
pub(crate) fn rk4_autonomous<F>(
    frame: &Frame,
    x0: &[f64],
    steps: usize,
    mut f: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m = x0.len();
    let h = 1.0 / steps as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for i in 0..steps {
        f(&x, &mut k1);
        for j in 0..m {
            tmp[j] = x[j] + 0.5 * h * k1[j];
        }
        f(&tmp, &mut k2);
        for j in 0..m {
            tmp[j] = x[j] + 0.5 * h * k2[j];
        }
        f(&tmp, &mut k3);
        for j in 0..m {
            tmp[j] = x[j] + h * k3[j];
        }
        f(&tmp, &mut k4);
        for j in 0..m {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !frame.in_chart(&x) {
            return Err(Error::ChartExit {
                time: (i + 1) as f64 * h,
                state: format!("{x:?}"),
            });
        }
    }
    Ok(x)
}

/// Time-one flow of the anchored field `sum_k v_k natural(b_k)`.
pub fn flow_anchored(frame: &Frame, v: &[f64], x0: &[f64], steps: usize) -> Result<Vec<f64>> {
    if v.len() != frame.basis().dim() {
        return Err(Error::DimensionMismatch {
            expected: frame.basis().dim(),
            found: v.len(),
        });
    }
    if x0.len() != frame.dimension() {
        return Err(Error::DimensionMismatch {
            expected: frame.dimension(),
            found: x0.len(),
        });
    }
    let active: Vec<(usize, f64)> = v
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| (k, *c))
        .collect();
    let mut col = vec![0.0; frame.dimension()];
    rk4_autonomous(frame, x0, steps.max(1), |x, out| {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(k, c) in &active {
            frame.compiled(k).eval_into(x, &mut col);
            for (o, ci) in out.iter_mut().zip(&col) {
                *o += c * ci;
            }
        }
    })
}

/// Integrates `x' = sum_i u_i(t) X_i(x)` with `substeps` RK4 steps per
/// control interval.
pub fn horizontal_flow(
    frame: &Frame,
    x0: &Point,
    u: &ControlPath,
    substeps: usize,
) -> Result<Trajectory> {
    frame.check_point(x0)?;
    if u.generators() != frame.generators() {
        return Err(Error::DimensionMismatch {
            expected: frame.generators(),
            found: u.generators(),
        });
    }
    let n = frame.generators();
    let gens: Vec<usize> = (0..n).map(|j| frame.basis().generator_index(j)).collect();
    let substeps = substeps.max(1);
    let mut x = x0.coords().to_vec();
    let mut samples = vec![x.clone()];
    let mut col = vec![0.0; frame.dimension()];
    for i in 0..u.steps() {
        let row = u.row(i).to_vec();
        if row.iter().any(|c| *c != 0.0) {
            let t0 = i as f64 / u.steps() as f64;
            let next = rk4_autonomous(frame, &x, substeps, |y, out| {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (j, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        frame.compiled(gens[j]).eval_into(y, &mut col);
                        for (o, ci) in out.iter_mut().zip(&col) {
                            *o += c * ci;
                        }
                    }
                }
                // the interval has length 1/steps; rk4 integrates over [0,1]
                let scale = 1.0 / u.steps() as f64;
                out.iter_mut().for_each(|o| *o *= scale);
            })
            .map_err(|e| match e {
                Error::ChartExit { time, state } => Error::ChartExit {
                    time: t0 + time / u.steps() as f64,
                    state,
                },
                other => other,
            })?;
            x = next;
        }
        samples.push(x.clone());
    }
    Ok(Trajectory {
        endpoint: Point::new(x),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_of_constant_controls() {
        assert!((path_length(&ControlPath::constant(7, &[3.0, 4.0])) - 5.0).abs() < 1e-14);
        let u = ControlPath::from_rows(vec![vec![1.0, 0.0], vec![0.0, -2.0]]).unwrap();
        assert!((path_length(&u.refine(3)) - path_length(&u)).abs() < 1e-15);
    }
}
