//! Independent reference computations used by the integration tests.

use hypocone::rational::{qi, Q};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Moebius function by trial division.
pub fn moebius(mut n: u64) -> i64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

/// Dimension of the degree-`k` part of the free Lie algebra on `n` letters.
pub fn witt(n: u64, k: u64) -> u64 {
    let s: i64 = (1..=k)
        .filter(|d| k.is_multiple_of(*d))
        .map(|d| moebius(d) * (n as i64).pow((k / d) as u32))
        .sum();
    (s / k as i64) as u64
}

pub type M3 = [[Q; 3]; 3];

pub fn m_zero() -> M3 {
    std::array::from_fn(|_| std::array::from_fn(|_| Q::zero()))
}

pub fn m_id() -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { Q::one() } else { Q::zero() }))
}

pub fn m_mul(a: &M3, b: &M3) -> M3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).fold(Q::zero(), |acc, k| acc + &a[i][k] * &b[k][j]))
    })
}

pub fn m_add(a: &M3, b: &M3, s: &Q) -> M3 {
    std::array::from_fn(|i| std::array::from_fn(|j| &a[i][j] + s * &b[i][j]))
}

/// `[[0, v1, v3], [0, 0, v2], [0, 0, 0]]`.
pub fn heis_matrix(v: &[Q]) -> M3 {
    let mut m = m_zero();
    m[0][1] = v[0].clone();
    m[1][2] = v[1].clone();
    m[0][2] = v[2].clone();
    m
}

pub fn heis_coords(m: &M3) -> Vec<Q> {
    vec![m[0][1].clone(), m[1][2].clone(), m[0][2].clone()]
}

/// Exponential of a strictly upper triangular 3x3 matrix.
pub fn m_exp(a: &M3) -> M3 {
    let a2 = m_mul(a, a);
    m_add(&m_add(&m_id(), a, &qi(1)), &a2, &Q::new(1.into(), 2.into()))
}

/// Logarithm of a unipotent upper triangular 3x3 matrix.
pub fn m_log(g: &M3) -> M3 {
    let n = m_add(g, &m_id(), &qi(-1));
    let n2 = m_mul(&n, &n);
    m_add(&n, &n2, &Q::new((-1).into(), 2.into()))
}

/// Inverse of a unipotent upper triangular 3x3 matrix.
pub fn m_inv_unipotent(g: &M3) -> M3 {
    let n = m_add(g, &m_id(), &qi(-1));
    let n2 = m_mul(&n, &n);
    m_add(&m_add(&m_id(), &n, &qi(-1)), &n2, &qi(1))
}

/// `Tr(xi v)` with `xi` lower triangular holding `f1, f2, f3` as in the
/// transpose of [`heis_matrix`].
pub fn trace_pairing(f: &[Q], v: &M3) -> Q {
    &f[0] * &v[0][1] + &f[1] * &v[1][2] + &f[2] * &v[0][2]
}

/// `(g . xi)(e_j) = xi(g^-1 e_j g)` with the group element given by its
/// matrix entries `a1, a2, a3`.
pub fn coadjoint_by_matrices(a: &[Q], f: &[Q]) -> Vec<Q> {
    let mut g = m_id();
    g[0][1] = a[0].clone();
    g[1][2] = a[1].clone();
    g[0][2] = a[2].clone();
    let gi = m_inv_unipotent(&g);
    (0..3)
        .map(|j| {
            let mut e = vec![Q::zero(); 3];
            e[j] = Q::one();
            trace_pairing(f, &m_mul(&m_mul(&gi, &heis_matrix(&e)), &g))
        })
        .collect()
}

pub fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    Q::new(rng.gen_range(-20i64..=20).into(), rng.gen_range(1i64..=9).into())
}

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    (0..n).map(|_| rand_q(rng)).collect()
}
