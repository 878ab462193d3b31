use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::frame::Point;
use crate::rational::{fmt_q, qi, to_f64, Q};

/// Laurent polynomial in the path parameter `s` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Laurent {
    coeffs: BTreeMap<i32, Q>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn constant(c: Q) -> Self {
        Laurent::monomial(c, 0)
    }

    /// `c s^k`.
    pub fn monomial(c: Q, k: i32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        Laurent { coeffs }
    }

    pub fn plus(mut self, c: Q, k: i32) -> Self {
        let e = self.coeffs.entry(k).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
        self
    }

    pub fn eval(&self, s: &Q) -> Q {
        self.coeffs.iter().fold(Q::zero(), |acc, (&k, c)| {
            let p = if k >= 0 {
                num_traits::pow(s.clone(), k as usize)
            } else {
                num_traits::pow(s.recip(), (-k) as usize)
            };
            acc + c * p
        })
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.coeffs.iter().map(|(&k, c)| to_f64(c) * s.powi(k)).sum()
    }

    /// Value at `s = 0`; `None` if a negative power is present.
    pub fn at_zero(&self) -> Option<Q> {
        if self.coeffs.keys().any(|&k| k < 0) {
            return None;
        }
        Some(self.coeffs.get(&0).cloned().unwrap_or_else(Q::zero))
    }

    pub fn lowest_power(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&k, c)| match k {
                0 => fmt_q(c),
                1 if c.is_one() => "s".to_string(),
                1 => format!("{}*s", fmt_q(c)),
                _ if c.is_one() => format!("s^{k}"),
                _ => format!("{}*s^{k}", fmt_q(c)),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Curve `s -> (x(s), t(s))` with `t(s) -> 0` as `s -> 0`.
#[derive(Debug, Clone)]
pub enum ApproachPath {
    Rational { x: Vec<Laurent>, t: Laurent },
    /// Explicit sequence `(x_j, t_j)` sampled at `s_j = s0 / 2^j`.
    Sampled { s0: f64, samples: Vec<(Point, f64)> },
}

impl ApproachPath {
    /// `x(s) = x*`, `t(s) = s`.
    pub fn fixed(x: &[Q]) -> Self {
        ApproachPath::Rational {
            x: x.iter().map(|c| Laurent::constant(c.clone())).collect(),
            t: Laurent::monomial(qi(1), 1),
        }
    }

    /// `x(s) = x* + lambda s e_axis`, `t(s) = s`.
    pub fn linear(x: &[Q], axis: usize, lambda: &Q) -> Self {
        let mut xs: Vec<Laurent> = x.iter().map(|c| Laurent::constant(c.clone())).collect();
        xs[axis] = xs[axis].clone().plus(lambda.clone(), 1);
        ApproachPath::Rational {
            x: xs,
            t: Laurent::monomial(qi(1), 1),
        }
    }

    /// `x(s) = x* + sign s e_axis`, `t(s) = s^2`: the ratio of displacement
    /// to scale diverges.
    pub fn parabolic(x: &[Q], axis: usize, sign: i64) -> Self {
        let mut xs: Vec<Laurent> = x.iter().map(|c| Laurent::constant(c.clone())).collect();
        xs[axis] = xs[axis].clone().plus(qi(sign), 1);
        ApproachPath::Rational {
            x: xs,
            t: Laurent::monomial(qi(1), 2),
        }
    }

    pub fn chart_dim(&self) -> usize {
        match self {
            ApproachPath::Rational { x, .. } => x.len(),
            ApproachPath::Sampled { samples, .. } => samples.first().map_or(0, |(p, _)| p.dim()),
        }
    }

    /// The limit point `x(0)`.
    pub fn base_point(&self) -> Result<Point> {
        match self {
            ApproachPath::Rational { x, .. } => {
                let coords = x
                    .iter()
                    .map(|c| {
                        c.at_zero().ok_or_else(|| {
                            Error::InvalidArgument(format!("path coordinate {c} diverges at s = 0"))
                        })
                    })
                    .collect::<Result<Vec<Q>>>()?;
                Ok(Point::exact(coords))
            }
            ApproachPath::Sampled { samples, .. } => samples
                .last()
                .map(|(p, _)| p.clone())
                .ok_or_else(|| Error::InvalidArgument("empty sampled path".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ApproachPath::Rational { t, .. } => {
                if t.at_zero().is_none_or(|v| !v.is_zero()) {
                    return Err(Error::InvalidArgument(format!("t(s) = {t} does not tend to 0")));
                }
                if t.lowest_power().is_none() {
                    return Err(Error::InvalidArgument("t(s) vanishes identically".into()));
                }
                self.base_point()?;
            }
            ApproachPath::Sampled { samples, .. } => {
                if samples.len() < 4 {
                    return Err(Error::InvalidArgument("sampled path needs at least 4 samples".into()));
                }
                if samples.iter().any(|(_, t)| !(*t > 0.0)) {
                    return Err(Error::NonPositiveDilation("sampled path has t <= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Exact sample at rational `s`.
    pub fn at(&self, s: &Q) -> Option<(Vec<Q>, Q)> {
        match self {
            ApproachPath::Rational { x, t } => Some((x.iter().map(|c| c.eval(s)).collect(), t.eval(s))),
            ApproachPath::Sampled { .. } => None,
        }
    }
}

impl fmt::Display for ApproachPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproachPath::Rational { x, t } => {
                let xs: Vec<String> = x.iter().map(|c| c.to_string()).collect();
                write!(f, "x(s)=({}) t(s)={}", xs.join(", "), t)
            }
            ApproachPath::Sampled { samples, .. } => write!(f, "sampled[{}]", samples.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn laurent_evaluation() {
        let l = Laurent::monomial(qi(3), -2).plus(q(1, 2), 1);
        assert_eq!(l.eval(&q(1, 2)), qi(12) + q(1, 4));
        assert!(l.at_zero().is_none());
        assert_eq!(l.to_string(), "3*s^-2 + 1/2*s");
    }
}
