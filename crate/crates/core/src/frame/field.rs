use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Q;

use super::poly::{CompiledPoly, Poly};

/// Polynomial vector field `sum_j c_j(x) d/dx_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyVF {
    components: Vec<Poly>,
}

impl PolyVF {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let m = components.len();
        if let Some(bad) = components.iter().find(|p| p.nvars() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.nvars(),
            });
        }
        Ok(PolyVF { components })
    }

    pub fn zero(m: usize) -> Self {
        PolyVF {
            components: vec![Poly::zero(m); m],
        }
    }

    /// The coordinate field `d/dx_j`.
    pub fn coordinate(m: usize, j: usize) -> Self {
        let mut components = vec![Poly::zero(m); m];
        components[j] = Poly::one(m);
        PolyVF { components }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Poly {
        &self.components[j]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    /// Derivation `X(f) = sum_j X^j d_j f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(f.nvars());
        for (j, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.derivative(j);
            if !d.is_zero() {
                out = &out + &(c * &d);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> PolyVF {
        PolyVF {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &PolyVF) -> PolyVF {
        PolyVF {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval_f64(x)).collect()
    }

    pub fn eval_exact(&self, x: &[Q]) -> Option<Vec<Q>> {
        self.components.iter().map(|p| p.eval_exact(x)).collect()
    }
}

impl fmt::Display for PolyVF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(j, p)| {
                if p.len() > 1 {
                    format!("({p})*d{}", j + 1)
                } else {
                    format!("{p}*d{}", j + 1)
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `[X, Y]^k = X(Y^k) - Y(X^k)`.
pub fn vf_bracket(x: &PolyVF, y: &PolyVF) -> Result<PolyVF> {
    if x.dimension() != y.dimension() {
        return Err(Error::DimensionMismatch {
            expected: x.dimension(),
            found: y.dimension(),
        });
    }
    let components = x
        .components
        .iter()
        .zip(&y.components)
        .map(|(xk, yk)| &x.apply(yk) - &y.apply(xk))
        .collect();
    Ok(PolyVF { components })
}

/// Float evaluator of a field together with its Jacobian `d X^k / d x_j`.
#[derive(Debug, Clone)]
pub struct CompiledField {
    components: Vec<CompiledPoly>,
    jacobian: Vec<Vec<CompiledPoly>>,
}

impl CompiledField {
    pub fn new(field: &PolyVF) -> Self {
        let m = field.dimension();
        CompiledField {
            components: field.components.iter().map(CompiledPoly::new).collect(),
            jacobian: field
                .components
                .iter()
                .map(|p| (0..m).map(|j| CompiledPoly::new(&p.derivative(j))).collect())
                .collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.eval_into(x, &mut out);
        out
    }

    /// Jacobian entry `(k, j)`.
    #[inline]
    pub fn jacobian_entry(&self, x: &[f64], k: usize, j: usize) -> f64 {
        self.jacobian[k][j].eval(x)
    }

    /// Row-major Jacobian.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.jacobian
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect()
    }
}
