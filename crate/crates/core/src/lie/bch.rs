//! Group law of the free nilpotent group in exponential coordinates.
//!
//! `log(e^a e^b)` is expanded in the free associative algebra on two letters,
//! truncated at the step, and each homogeneous piece is converted to a Lie
//! element with the Dynkin–Specht–Wever projection `p = θ(p) / m`, where `θ`
//! is the left-normed bracketing of words.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{qi, Q};

use super::element::{bracket_raw, LieElement, LieScalar};
use super::hall::{AssocPoly, HallBasis, MAX_BCH_STEP};

fn truncated_mul(a: &AssocPoly, b: &AssocPoly, max_len: usize) -> AssocPoly {
    let mut out = AssocPoly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > max_len {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let e = out.entry(w).or_insert_with(Q::zero);
            *e += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn factorial(k: usize) -> Q {
    (1..=k as i64).fold(Q::one(), |acc, i| acc * qi(i))
}

/// Words over `{0 = a, 1 = b}` with their coefficient in the Lie form of
/// `log(e^a e^b)`, already divided by the word length. Sorted
/// lexicographically so that shared prefixes are adjacent.
pub(crate) fn dynkin_terms(step: usize) -> Vec<(Vec<u8>, Q)> {
    // z = e^a e^b - 1
    let mut z = AssocPoly::new();
    for r in 0..=step {
        for s in 0..=(step - r) {
            if r + s == 0 {
                continue;
            }
            let mut w = vec![0u8; r];
            w.extend(std::iter::repeat_n(1u8, s));
            z.insert(w, (factorial(r) * factorial(s)).recip());
        }
    }
    let mut log = AssocPoly::new();
    let mut power = z.clone();
    for k in 1..=step {
        let coeff = if k % 2 == 1 { qi(1) } else { qi(-1) } / qi(k as i64);
        for (w, c) in &power {
            let e = log.entry(w.clone()).or_insert_with(Q::zero);
            *e += &coeff * c;
        }
        power = truncated_mul(&power, &z, step);
    }
    let mut terms: Vec<(Vec<u8>, Q)> = log
        .into_iter()
        .filter(|(w, c)| !c.is_zero() && (w.len() == 1 || w[0] != w[1]))
        .map(|(w, c)| {
            let m = qi(w.len() as i64);
            (w, c / m)
        })
        .collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    terms
}

/// `log(exp(a) exp(b))` truncated at the step of the basis.
pub fn bch<S: LieScalar>(
    basis: &HallBasis,
    a: &LieElement<S>,
    b: &LieElement<S>,
) -> Result<LieElement<S>> {
    a.check_dim(basis)?;
    b.check_dim(basis)?;
    let terms = S::dynkin(basis).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "group law available up to step {MAX_BCH_STEP}, basis has step {}",
            basis.step()
        ))
    })?;
    Ok(LieElement::new(bch_raw(basis, terms, a.coords(), b.coords())))
}

pub(crate) fn bch_raw<S: LieScalar>(
    basis: &HallBasis,
    terms: &[(Vec<u8>, S)],
    a: &[S],
    b: &[S],
) -> Vec<S> {
    let dim = a.len();
    let mut out = vec![S::zero(); dim];
    // stack[i] holds the left-normed bracket of the first i+1 letters of the current word
    let mut stack: Vec<Vec<S>> = Vec::new();
    let mut prev: &[u8] = &[];
    for (word, coeff) in terms {
        let common = word
            .iter()
            .zip(prev)
            .take_while(|(x, y)| x == y)
            .count();
        stack.truncate(common);
        for (pos, &letter) in word.iter().enumerate().skip(common) {
            let elem = if letter == 0 { a } else { b };
            let next = if pos == 0 {
                elem.to_vec()
            } else {
                bracket_raw(basis, &stack[pos - 1], elem)
            };
            stack.push(next);
        }
        prev = word;
        let value = &stack[word.len() - 1];
        for (o, v) in out.iter_mut().zip(value) {
            if !v.is_zero() {
                *o = o.clone() + coeff.clone() * v.clone();
            }
        }
    }
    out
}

/// Group inverse in exponential coordinates.
pub fn inverse<S: LieScalar>(g: &LieElement<S>) -> LieElement<S> {
    -g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn dynkin_low_order_coefficients() {
        let terms = dynkin_terms(3);
        let get = |w: &[u8]| {
            terms
                .iter()
                .find(|(x, _)| x == w)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(Q::zero)
        };
        assert_eq!(get(&[0]), qi(1));
        assert_eq!(get(&[1]), qi(1));
        // a b - b a appears with 1/2, Dynkin divides by the length 2
        assert_eq!(get(&[0, 1]), q(1, 4));
        assert_eq!(get(&[1, 0]), q(-1, 4));
    }

    #[test]
    fn step_two_closed_form() {
        let basis = HallBasis::new(2, 2).unwrap();
        let a = LieElement::new(vec![q(1, 2), q(-3, 1), q(2, 7)]);
        let b = LieElement::new(vec![q(5, 3), q(1, 4), q(-1, 1)]);
        let got = bch(&basis, &a, &b).unwrap();
        let br = super::super::element::bracket(&basis, &a, &b).unwrap();
        let expected = &(&a + &b) + &br.scale(&q(1, 2));
        assert_eq!(got, expected);
    }
}
