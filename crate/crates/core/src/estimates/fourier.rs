use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{CPoly, Phase, Poly};
use crate::rational::to_f64;

/// Finite Fourier series `sum_k c_k e^{i k.x}`.
pub(crate) type Series = HashMap<Vec<i64>, Complex64>;

pub(crate) fn add_into(s: &mut Series, k: Vec<i64>, c: Complex64) {
    if c == Complex64::new(0.0, 0.0) {
        return;
    }
    *s.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
}

/// Exponential form of a trigonometric polynomial.
pub(crate) fn poly_series(p: &Poly) -> Result<Series> {
    let mut s = Series::new();
    for (m, c) in p.terms() {
        if m.has_powers() {
            return Err(Error::NonTrigCoefficient(p.to_string()));
        }
        let c = to_f64(c);
        let k: Vec<i64> = m.harmonics.iter().map(|&h| h as i64).collect();
        let neg: Vec<i64> = k.iter().map(|h| -h).collect();
        if !m.has_trig() {
            add_into(&mut s, k, Complex64::new(c, 0.0));
            continue;
        }
        match m.phase {
            Phase::Cos => {
                add_into(&mut s, k, Complex64::new(c / 2.0, 0.0));
                add_into(&mut s, neg, Complex64::new(c / 2.0, 0.0));
            }
            Phase::Sin => {
                add_into(&mut s, k, Complex64::new(0.0, -c / 2.0));
                add_into(&mut s, neg, Complex64::new(0.0, c / 2.0));
            }
        }
    }
    Ok(s)
}

pub(crate) fn cpoly_series(p: &CPoly) -> Result<Series> {
    let mut s = poly_series(&p.re)?;
    for (k, c) in poly_series(&p.im)? {
        add_into(&mut s, k, c * Complex64::new(0.0, 1.0));
    }
    Ok(s)
}

/// `a * f` for two series.
pub(crate) fn multiply(a: &Series, f: &Series) -> Series {
    let mut out = Series::new();
    for (ka, ca) in a {
        for (kf, cf) in f {
            let k = ka.iter().zip(kf).map(|(x, y)| x + y).collect();
            add_into(&mut out, k, ca * cf);
        }
    }
    out
}

/// `d f / d x_j`.
pub(crate) fn derivative(f: &Series, j: usize) -> Series {
    f.iter()
        .filter(|(k, _)| k[j] != 0)
        .map(|(k, c)| (k.clone(), c * Complex64::new(0.0, k[j] as f64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn sine_in_exponentials() {
        let p = Poly::trig(2, qi(1), vec![1, 0], Phase::Sin);
        let s = poly_series(&p).unwrap();
        assert_eq!(s[&vec![1, 0]], Complex64::new(0.0, -0.5));
        assert_eq!(s[&vec![-1, 0]], Complex64::new(0.0, 0.5));
    }

    #[test]
    fn powers_are_rejected() {
        assert!(poly_series(&Poly::var(2, 0)).is_err());
    }
}
