//! Hall basis of the free nilpotent Lie algebra built from Lyndon words.
//!
//! Basis elements are the standard bracketings of Lyndon words of length at
//! most the step, ordered by degree and then lexicographically. Structure
//! constants are obtained by expanding brackets in the free associative
//! algebra and peeling off the lexicographically smallest word, which for a
//! Lie polynomial is always Lyndon and carries coefficient one in its own
//! standard bracketing.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{to_f64, Q};

/// Default cap on `dim g` accepted by [`HallBasis::new`].
pub const DEFAULT_DIMENSION_CAP: usize = 1000;

/// Largest step for which the group law is available.
pub const MAX_BCH_STEP: usize = 8;

/// One structure constant `c_{ij}^k` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry<S> {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallWord {
    /// Lyndon word over generator indices `0..n`.
    pub letters: Vec<u8>,
    pub degree: usize,
    /// Basis indices of the standard factorisation `[left, right]`;
    /// `None` for generators.
    pub factors: Option<(usize, usize)>,
}

impl HallWord {
    pub fn is_generator(&self) -> bool {
        self.factors.is_none()
    }
}

/// Associative polynomial over words.
pub(crate) type AssocPoly = BTreeMap<Vec<u8>, Q>;

#[derive(Debug, Clone)]
pub struct HallBasis {
    generators: usize,
    step: usize,
    words: Vec<HallWord>,
    index: HashMap<Vec<u8>, usize>,
    table: HashMap<(usize, usize), Vec<(usize, Q)>>,
    pub(crate) entries_q: Vec<Entry<Q>>,
    pub(crate) entries_f: Vec<Entry<f64>>,
    pub(crate) bch_q: Option<Vec<(Vec<u8>, Q)>>,
    pub(crate) bch_f: Option<Vec<(Vec<u8>, f64)>>,
}

/// Witt dimension of the degree-`d` piece of the free Lie algebra on `n`
/// generators, via necklace counting. Used to size the basis before building it.
fn graded_dimension(n: usize, d: usize) -> u128 {
    let mut total: i128 = 0;
    for e in 1..=d {
        if d.is_multiple_of(e) {
            total += mobius(e) as i128 * (n as i128).pow((d / e) as u32);
        }
    }
    (total / d as i128) as u128
}

fn mobius(mut k: usize) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= k {
        if k.is_multiple_of(p) {
            k /= p;
            if k.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if k > 1 {
        result = -result;
    }
    result
}

/// Lyndon words of length `1..=max_len` over `0..n` in lexicographic order (Duval).
fn lyndon_words(n: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if n == 0 || max_len == 0 {
        return out;
    }
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(w.iter().map(|&c| c as u8).collect());
        let len = w.len();
        while w.len() < max_len {
            let c = w[w.len() - len];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == n - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

fn assoc_mul(a: &AssocPoly, b: &AssocPoly) -> AssocPoly {
    let mut out = AssocPoly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            let entry = out.entry(w).or_insert_with(Q::zero);
            *entry += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn assoc_commutator(a: &AssocPoly, b: &AssocPoly) -> AssocPoly {
    let mut out = assoc_mul(a, b);
    for (w, c) in assoc_mul(b, a) {
        let entry = out.entry(w).or_insert_with(Q::zero);
        *entry -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

impl HallBasis {
    /// Builds the Hall basis of the free nilpotent Lie algebra on `generators`
    /// generators and the given `step`, capped at [`DEFAULT_DIMENSION_CAP`].
    pub fn new(generators: usize, step: usize) -> Result<Self> {
        Self::with_cap(generators, step, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(generators: usize, step: usize, cap: usize) -> Result<Self> {
        if generators == 0 || step == 0 {
            return Err(Error::InvalidArgument(
                "generator count and step must be at least 1".into(),
            ));
        }
        let dimension: u128 = (1..=step).map(|d| graded_dimension(generators, d)).sum();
        if dimension > cap as u128 {
            return Err(Error::DimensionCap {
                generators,
                step,
                dimension: dimension.min(usize::MAX as u128) as usize,
                cap,
            });
        }

        let mut lw = lyndon_words(generators, step);
        lw.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index: HashMap<Vec<u8>, usize> =
            lw.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

        let mut words = Vec::with_capacity(lw.len());
        let mut expansions: Vec<AssocPoly> = Vec::with_capacity(lw.len());
        for w in &lw {
            if w.len() == 1 {
                words.push(HallWord {
                    letters: w.clone(),
                    degree: 1,
                    factors: None,
                });
                expansions.push(AssocPoly::from([(w.clone(), Q::one())]));
                continue;
            }
            // standard factorisation: right factor is the longest proper Lyndon suffix
            let split = (1..w.len())
                .find(|&s| index.contains_key(&w[s..]))
                .expect("every Lyndon word of length > 1 has a proper Lyndon suffix");
            let left = index[&w[..split]];
            let right = index[&w[split..]];
            let expansion = assoc_commutator(&expansions[left], &expansions[right]);
            words.push(HallWord {
                letters: w.clone(),
                degree: w.len(),
                factors: Some((left, right)),
            });
            expansions.push(expansion);
        }

        let mut basis = HallBasis {
            generators,
            step,
            words,
            index,
            table: HashMap::new(),
            entries_q: Vec::new(),
            entries_f: Vec::new(),
            bch_q: None,
            bch_f: None,
        };

        let dim = basis.words.len();
        for i in 0..dim {
            for j in (i + 1)..dim {
                if basis.words[i].degree + basis.words[j].degree > step {
                    continue;
                }
                let p = assoc_commutator(&expansions[i], &expansions[j]);
                let coeffs = basis.decompose(p, &expansions);
                if !coeffs.is_empty() {
                    basis.table.insert((i, j), coeffs);
                }
            }
        }
        let mut keys: Vec<_> = basis.table.keys().copied().collect();
        keys.sort_unstable();
        for (i, j) in keys {
            for (k, c) in &basis.table[&(i, j)] {
                basis.entries_q.push(Entry {
                    i,
                    j,
                    k: *k,
                    c: c.clone(),
                });
                basis.entries_f.push(Entry {
                    i,
                    j,
                    k: *k,
                    c: to_f64(c),
                });
            }
        }

        if step <= MAX_BCH_STEP {
            let terms = super::bch::dynkin_terms(step);
            basis.bch_f = Some(terms.iter().map(|(w, c)| (w.clone(), to_f64(c))).collect());
            basis.bch_q = Some(terms);
        }
        Ok(basis)
    }

    /// Writes a homogeneous Lie polynomial in the basis.
    fn decompose(&self, mut p: AssocPoly, expansions: &[AssocPoly]) -> Vec<(usize, Q)> {
        let mut out = Vec::new();
        while let Some((w, c)) = p.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
            if w.len() > self.step {
                // truncated away: brackets longer than the step vanish
                break;
            }
            let k = *self
                .index
                .get(&w)
                .expect("leading word of a Lie polynomial is Lyndon");
            for (wk, ck) in &expansions[k] {
                let entry = p.entry(wk.clone()).or_insert_with(Q::zero);
                *entry -= &c * ck;
            }
            p.retain(|_, x| !x.is_zero());
            out.push((k, c));
        }
        out.sort_by_key(|(k, _)| *k);
        out
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[HallWord] {
        &self.words
    }

    pub fn degree(&self, k: usize) -> usize {
        self.words[k].degree
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.words.iter().map(|w| w.degree).collect()
    }

    /// Dimensions of the graded pieces, degree 1 through the step.
    pub fn graded_dims(&self) -> Vec<usize> {
        let mut dims = vec![0; self.step];
        for w in &self.words {
            dims[w.degree - 1] += 1;
        }
        dims
    }

    /// Basis index of the generator `j` (zero based).
    pub fn generator_index(&self, j: usize) -> usize {
        self.index[&vec![j as u8]]
    }

    /// Basis index of a Lyndon word, if it is one of length at most the step.
    pub fn index_of(&self, letters: &[u8]) -> Option<usize> {
        self.index.get(letters).copied()
    }

    /// `c_{ij}^k`, zero outside the stored table.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Q {
        let (a, b, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        if a == b {
            return Q::zero();
        }
        self.table
            .get(&(a, b))
            .and_then(|v| v.iter().find(|(kk, _)| *kk == k))
            .map(|(_, c)| if sign > 0 { c.clone() } else { -c.clone() })
            .unwrap_or_else(Q::zero)
    }

    /// Nonzero `[b_i, b_j]` for `i < j`, as `(k, c_{ij}^k)` lists.
    pub fn bracket_table(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, Q)>)> {
        let mut v: Vec<_> = self.table.iter().collect();
        v.sort_by_key(|(k, _)| **k);
        v.into_iter()
    }

    pub fn entries(&self) -> &[Entry<Q>] {
        &self.entries_q
    }

    /// Bracket notation for basis element `k`, generators printed one based.
    pub fn label(&self, k: usize) -> String {
        match self.words[k].factors {
            None => format!("X{}", self.words[k].letters[0] as usize + 1),
            Some((l, r)) => format!("[{},{}]", self.label(l), self.label(r)),
        }
    }
}

impl fmt::Display for HallBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g({}, {}) of dimension {}",
            self.generators,
            self.step,
            self.dim()
        )
    }
}
