use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::frame::{CPoly, Point};
use crate::rational::from_f64;

/// Noncommutative polynomial in the frame generators with coefficient
/// functions on the chart. Words are 0-based generator indices; the
/// coefficient stands to the left of its word.
#[derive(Debug, Clone, PartialEq)]
pub struct NCPoly {
    nvars: usize,
    generators: usize,
    terms: BTreeMap<Vec<usize>, CPoly>,
}

impl NCPoly {
    pub fn zero(nvars: usize, generators: usize) -> Self {
        NCPoly {
            nvars,
            generators,
            terms: BTreeMap::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn add_term(&mut self, coeff: CPoly, word: &[usize]) -> Result<()> {
        if coeff.nvars() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: coeff.nvars(),
            });
        }
        if let Some(&g) = word.iter().find(|&&g| g >= self.generators) {
            return Err(Error::InvalidArgument(format!(
                "word uses generator {} but the frame has {}",
                g + 1,
                self.generators
            )));
        }
        let entry = self
            .terms
            .entry(word.to_vec())
            .or_insert_with(|| CPoly::zero(coeff.nvars()));
        *entry = &*entry + &coeff;
        if entry.is_zero() {
            self.terms.remove(word);
        }
        Ok(())
    }

    pub fn with_term(mut self, coeff: CPoly, word: &[usize]) -> Result<Self> {
        self.add_term(coeff, word)?;
        Ok(self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &CPoly)> {
        self.terms.iter().map(|(w, c)| (w.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Declared degree: the longest word. `None` for the zero polynomial.
    pub fn hormander_degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }

    /// Terms of maximal length with coefficients frozen at `x`. Coefficients
    /// are exact when `x` is rational and they evaluate exactly there.
    pub fn top_part_at(&self, x: &Point) -> Result<NCPoly> {
        if x.dim() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: x.dim(),
            });
        }
        let mut out = NCPoly::zero(self.nvars, self.generators);
        let Some(k) = self.hormander_degree() else {
            return Ok(out);
        };
        for (w, c) in self.terms.iter().filter(|(w, _)| w.len() == k) {
            let value = match x.exact_coords().and_then(|xe| c.eval_exact(xe)) {
                Some(v) => v,
                None => {
                    let v = c.eval_f64(x.coords());
                    num_complex::Complex::new(from_f64(v.re)?, from_f64(v.im)?)
                }
            };
            out.add_term(CPoly::constant(self.nvars, value.re, value.im), w)?;
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &NCPoly) -> Result<()> {
        if self.nvars != other.nvars || self.generators != other.generators {
            return Err(Error::DimensionMismatch {
                expected: self.generators,
                found: other.generators,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &NCPoly) -> Result<NCPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(c.clone(), w)?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &NCPoly) -> Result<NCPoly> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(&CPoly::zero(self.nvars) - c, w)?;
        }
        Ok(out)
    }

    /// Formal product: words concatenate and coefficients multiply as
    /// scalars (they are not differentiated).
    pub fn try_mul(&self, other: &NCPoly) -> Result<NCPoly> {
        self.check_compatible(other)?;
        let mut out = NCPoly::zero(self.nvars, self.generators);
        for (wa, ca) in self.terms() {
            for (wb, cb) in other.terms() {
                let w: Vec<usize> = wa.iter().chain(wb).copied().collect();
                out.add_term(ca * cb, &w)?;
            }
        }
        Ok(out)
    }
}

impl Add for &NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: &NCPoly) -> NCPoly {
        self.try_add(rhs).expect("polynomials over different frames")
    }
}

impl Sub for &NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: &NCPoly) -> NCPoly {
        self.try_sub(rhs).expect("polynomials over different frames")
    }
}

impl Mul for &NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: &NCPoly) -> NCPoly {
        self.try_mul(rhs).expect("polynomials over different frames")
    }
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word = if w.is_empty() {
                    "1".to_string()
                } else {
                    w.iter().map(|g| format!("X{}", g + 1)).collect::<Vec<_>>().join("*")
                };
                format!("[{c}]*{word}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
