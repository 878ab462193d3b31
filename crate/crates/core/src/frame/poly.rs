//! Coefficient functions: polynomials times trigonometric monomials with
//! exact rational coefficients. The class is closed under products and
//! partial derivatives, so vector-field brackets stay exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_q, q, qi, to_f64, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Cos,
    Sin,
}

/// `x^exponents * trig(harmonics . x)`; `harmonics == 0` with `Cos` is the
/// purely polynomial monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub harmonics: Vec<i32>,
    pub phase: Phase,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            exponents: vec![0; nvars],
            harmonics: vec![0; nvars],
            phase: Phase::Cos,
        }
    }

    pub fn has_trig(&self) -> bool {
        self.harmonics.iter().any(|&h| h != 0)
    }

    pub fn has_powers(&self) -> bool {
        self.exponents.iter().any(|&e| e != 0)
    }

    /// Canonical form; `None` when the monomial is identically zero.
    fn canonical(mut self, coeff: Q) -> Option<(Monomial, Q)> {
        if coeff.is_zero() {
            return None;
        }
        match self.harmonics.iter().find(|&&h| h != 0) {
            None => {
                if self.phase == Phase::Sin {
                    return None;
                }
                Some((self, coeff))
            }
            Some(&first) if first < 0 => {
                for h in self.harmonics.iter_mut() {
                    *h = -*h;
                }
                let c = if self.phase == Phase::Sin { -coeff } else { coeff };
                Some((self, c))
            }
            Some(_) => Some((self, coeff)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Q::one())
    }

    /// The coordinate function `x_j` (zero based).
    pub fn var(nvars: usize, j: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[j] = 1;
        Poly::monomial(nvars, Q::one(), exps)
    }

    pub fn monomial(nvars: usize, c: Q, exponents: Vec<u32>) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(
            Monomial {
                exponents,
                harmonics: vec![0; nvars],
                phase: Phase::Cos,
            },
            c,
        );
        p
    }

    /// `c * cos(h . x)` or `c * sin(h . x)`.
    pub fn trig(nvars: usize, c: Q, harmonics: Vec<i32>, phase: Phase) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(
            Monomial {
                exponents: vec![0; nvars],
                harmonics,
                phase,
            },
            c,
        );
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every term is a pure trigonometric monomial (no powers of `x`).
    pub fn is_trig_polynomial(&self) -> bool {
        self.terms.keys().all(|m| !m.has_powers())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| !m.has_powers() && !m.has_trig())
    }

    /// Constant term (coefficient of the monomial `1`).
    pub fn constant_term(&self) -> Q {
        self.terms
            .get(&Monomial::one(self.nvars))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// True if the coefficient depends on coordinate `j`.
    pub fn depends_on(&self, j: usize) -> bool {
        self.terms
            .keys()
            .any(|m| m.exponents[j] != 0 || m.harmonics[j] != 0)
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Q) {
        let Some((mono, coeff)) = mono.canonical(coeff) else {
            return;
        };
        let entry = self.terms.entry(mono.clone()).or_insert_with(Q::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Partial derivative in coordinate `j`.
    pub fn derivative(&self, j: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.exponents[j] > 0 {
                let mut dm = m.clone();
                dm.exponents[j] -= 1;
                out.add_term(dm, c * qi(m.exponents[j] as i64));
            }
            let h = m.harmonics[j];
            if h != 0 {
                let mut dm = m.clone();
                let (phase, sign) = match m.phase {
                    Phase::Cos => (Phase::Sin, -1),
                    Phase::Sin => (Phase::Cos, 1),
                };
                dm.phase = phase;
                out.add_term(dm, c * qi(sign * h as i64));
            }
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| to_f64(c) * monomial_f64(m, x))
            .sum()
    }

    /// Exact value at a rational point; `None` if a trigonometric factor is
    /// evaluated at a nonzero argument.
    pub fn eval_exact(&self, x: &[Q]) -> Option<Q> {
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (xi, &e) in x.iter().zip(&m.exponents) {
                if e > 0 {
                    v *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            if m.has_trig() {
                let arg = m
                    .harmonics
                    .iter()
                    .zip(x)
                    .fold(Q::zero(), |acc, (&h, xi)| acc + qi(h as i64) * xi);
                if !arg.is_zero() {
                    return None;
                }
                if m.phase == Phase::Sin {
                    v = Q::zero();
                }
            }
            total += v;
        }
        Some(total)
    }

    /// Largest total power of `x` appearing.
    pub fn poly_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponents.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Largest `sum |h_j|` over trigonometric monomials.
    pub fn harmonic_width(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.harmonics.iter().map(|h| h.unsigned_abs()).sum())
            .max()
            .unwrap_or(0)
    }
}

fn monomial_f64(m: &Monomial, x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (xi, &e) in x.iter().zip(&m.exponents) {
        if e > 0 {
            v *= xi.powi(e as i32);
        }
    }
    if m.has_trig() {
        let arg: f64 = m.harmonics.iter().zip(x).map(|(&h, xi)| h as f64 * xi).sum();
        v *= match m.phase {
            Phase::Cos => arg.cos(),
            Phase::Sin => arg.sin(),
        };
    }
    v
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Vec<(Monomial, Q)> {
    let exponents: Vec<u32> = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
    if !a.has_trig() || !b.has_trig() {
        let (harmonics, phase) = if a.has_trig() {
            (a.harmonics.clone(), a.phase)
        } else {
            (b.harmonics.clone(), b.phase)
        };
        return vec![(
            Monomial {
                exponents,
                harmonics,
                phase,
            },
            Q::one(),
        )];
    }
    let sum: Vec<i32> = a.harmonics.iter().zip(&b.harmonics).map(|(x, y)| x + y).collect();
    let diff: Vec<i32> = a.harmonics.iter().zip(&b.harmonics).map(|(x, y)| x - y).collect();
    let half = q(1, 2);
    let mk = |h: Vec<i32>, phase: Phase| Monomial {
        exponents: exponents.clone(),
        harmonics: h,
        phase,
    };
    match (a.phase, b.phase) {
        (Phase::Cos, Phase::Cos) => vec![
            (mk(diff, Phase::Cos), half.clone()),
            (mk(sum, Phase::Cos), half),
        ],
        (Phase::Sin, Phase::Sin) => vec![
            (mk(diff, Phase::Cos), half.clone()),
            (mk(sum, Phase::Cos), -half),
        ],
        (Phase::Sin, Phase::Cos) => vec![
            (mk(sum, Phase::Sin), half.clone()),
            (mk(diff, Phase::Sin), half),
        ],
        (Phase::Cos, Phase::Sin) => vec![
            (mk(sum, Phase::Sin), half.clone()),
            (mk(diff, Phase::Sin), -half),
        ],
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&qi(-1))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let c = ca * cb;
                for (m, f) in mul_monomials(ma, mb) {
                    out.add_term(m, &c * f);
                }
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            for (j, &e) in m.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", j + 1)),
                    _ => factors.push(format!("x{}^{}", j + 1, e)),
                }
            }
            if m.has_trig() {
                let mut arg = String::new();
                for (j, &h) in m.harmonics.iter().enumerate() {
                    if h == 0 {
                        continue;
                    }
                    let sign = if h < 0 { "-" } else if arg.is_empty() { "" } else { "+" };
                    let mag = h.unsigned_abs();
                    if mag == 1 {
                        arg.push_str(&format!("{sign}x{}", j + 1));
                    } else {
                        arg.push_str(&format!("{sign}{mag}x{}", j + 1));
                    }
                }
                let name = match m.phase {
                    Phase::Cos => "cos",
                    Phase::Sin => "sin",
                };
                factors.push(format!("{name}({arg})"));
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if factors.is_empty() {
                write!(f, "{}", fmt_q(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_q(&mag), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Complex coefficient `re + i im`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CPoly {
    pub re: Poly,
    pub im: Poly,
}

impl CPoly {
    pub fn zero(nvars: usize) -> Self {
        CPoly {
            re: Poly::zero(nvars),
            im: Poly::zero(nvars),
        }
    }

    pub fn real(re: Poly) -> Self {
        let n = re.nvars();
        CPoly {
            re,
            im: Poly::zero(n),
        }
    }

    pub fn imag(im: Poly) -> Self {
        let n = im.nvars();
        CPoly {
            re: Poly::zero(n),
            im,
        }
    }

    pub fn constant(nvars: usize, re: Q, im: Q) -> Self {
        CPoly {
            re: Poly::constant(nvars, re),
            im: Poly::constant(nvars, im),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn nvars(&self) -> usize {
        self.re.nvars()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Complex64 {
        Complex64::new(self.re.eval_f64(x), self.im.eval_f64(x))
    }

    pub fn eval_exact(&self, x: &[Q]) -> Option<Complex<Q>> {
        Some(Complex::new(self.re.eval_exact(x)?, self.im.eval_exact(x)?))
    }

    pub fn derivative(&self, j: usize) -> CPoly {
        CPoly {
            re: self.re.derivative(j),
            im: self.im.derivative(j),
        }
    }

    pub fn mul_real(&self, p: &Poly) -> CPoly {
        CPoly {
            re: &self.re * p,
            im: &self.im * p,
        }
    }

    pub fn is_trig_polynomial(&self) -> bool {
        self.re.is_trig_polynomial() && self.im.is_trig_polynomial()
    }

    pub fn depends_on(&self, j: usize) -> bool {
        self.re.depends_on(j) || self.im.depends_on(j)
    }
}

impl Add for &CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        CPoly {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        CPoly {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        CPoly {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl fmt::Display for CPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "i*({})", self.im),
            (false, false) => write!(f, "({}) + i*({})", self.re, self.im),
        }
    }
}

/// Float evaluator for a [`Poly`], precompiled for inner loops.
#[derive(Debug, Clone, Default)]
pub struct CompiledPoly {
    terms: Vec<CompiledTerm>,
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coeff: f64,
    powers: Vec<(usize, i32)>,
    harmonics: Vec<(usize, f64)>,
    phase: Phase,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| CompiledTerm {
                coeff: to_f64(c),
                powers: m
                    .exponents
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(j, &e)| (j, e as i32))
                    .collect(),
                harmonics: m
                    .harmonics
                    .iter()
                    .enumerate()
                    .filter(|(_, &h)| h != 0)
                    .map(|(j, &h)| (j, h as f64))
                    .collect(),
                phase: m.phase,
            })
            .collect();
        CompiledPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            let mut v = t.coeff;
            for &(j, e) in &t.powers {
                v *= x[j].powi(e);
            }
            if !t.harmonics.is_empty() {
                let arg: f64 = t.harmonics.iter().map(|&(j, h)| h * x[j]).sum();
                v *= match t.phase {
                    Phase::Cos => arg.cos(),
                    Phase::Sin => arg.sin(),
                };
            }
            total += v;
        }
        total
    }
}
