use crate::error::Result;
use num_traits::{One, Zero};

use crate::rational::{qi, rank, Q};

use super::element::{exp_ad, Functional, LieElement, LieScalar};
use super::hall::HallBasis;

/// Coadjoint action `(g . xi)(v) = xi(Ad_{g^-1} v)`.
pub fn coadjoint<S: LieScalar>(
    basis: &HallBasis,
    g: &LieElement<S>,
    xi: &Functional<S>,
) -> Result<Functional<S>> {
    g.check_dim(basis)?;
    xi.check_dim(basis)?;
    let g_inv = -g;
    let dim = basis.dim();
    let coords = (0..dim)
        .map(|j| {
            let image = exp_ad(basis, &g_inv, &LieElement::basis(dim, j))?;
            Ok(xi.pair(&image))
        })
        .collect::<Result<Vec<S>>>()?;
    Ok(Functional::new(coords))
}

/// Matrix `omega_ij = xi([b_i, b_j])`; its rank is the dimension of the
/// coadjoint orbit through `xi` (the differential of `g -> g . xi` at the
/// identity is `v -> -xi([v, .])`).
pub fn orbit_form<S: LieScalar>(basis: &HallBasis, xi: &Functional<S>) -> Result<Vec<Vec<S>>> {
    xi.check_dim(basis)?;
    let dim = basis.dim();
    let mut m = vec![vec![S::zero(); dim]; dim];
    for e in S::structure(basis) {
        let v = e.c.clone() * xi[e.k].clone();
        m[e.i][e.j] = m[e.i][e.j].clone() + v.clone();
        m[e.j][e.i] = m[e.j][e.i].clone() - v;
    }
    Ok(m)
}

/// Dimension of the coadjoint orbit through `xi`, computed exactly.
pub fn orbit_dimension(basis: &HallBasis, xi: &Functional<Q>) -> Result<usize> {
    Ok(rank(&orbit_form(basis, xi)?))
}

/// Rank of the differential of the orbit map `g -> g . xi` at the sampled
/// point `g`. The map is polynomial of degree below the step in the
/// coordinates of `g`, so directional derivatives are recovered exactly by
/// differentiating the Lagrange interpolant through integer nodes.
pub fn orbit_map_rank_at(
    basis: &HallBasis,
    g: &LieElement<Q>,
    xi: &Functional<Q>,
) -> Result<usize> {
    g.check_dim(basis)?;
    let dim = basis.dim();
    let nodes = basis.step().max(2);
    let weights = derivative_weights(nodes);
    let mut jacobian = Vec::with_capacity(dim);
    for i in 0..dim {
        let dir = LieElement::<Q>::basis(dim, i);
        let mut col = vec![Q::zero(); dim];
        for (k, w) in weights.iter().enumerate() {
            let shifted = &g.clone() + &dir.scale(&qi(k as i64));
            let value = coadjoint(basis, &shifted, xi)?;
            for (c, v) in col.iter_mut().zip(value.coords()) {
                *c += w * v;
            }
        }
        jacobian.push(col);
    }
    Ok(rank(&jacobian))
}

/// Weights `w_k` with `p'(0) = sum_k w_k p(k)` for polynomials of degree `< nodes`.
fn derivative_weights(nodes: usize) -> Vec<Q> {
    let nodes = nodes as i64;
    (0..nodes)
        .map(|k| {
            if k == 0 {
                -(1..nodes).fold(Q::zero(), |acc, j| acc + qi(j).recip())
            } else {
                let num = (1..nodes)
                    .filter(|&j| j != k)
                    .fold(Q::one(), |acc, j| acc * qi(-j));
                let den = (0..nodes)
                    .filter(|&j| j != k)
                    .fold(Q::one(), |acc, j| acc * qi(k - j));
                num / den
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn derivative_weights_are_exact() {
        let w = derivative_weights(4);
        // p(s) = s^3 - 2 s^2 + 5 s + 1 has p'(0) = 5
        let p = |s: i64| qi(s * s * s - 2 * s * s + 5 * s + 1);
        let d = w.iter().enumerate().fold(Q::zero(), |acc, (k, wk)| acc + wk * p(k as i64));
        assert_eq!(d, qi(5));
    }

    #[test]
    fn heisenberg_formula() {
        let b = HallBasis::new(2, 2).unwrap();
        let g = LieElement::new(vec![q(2, 3), q(-5, 2), q(7, 1)]);
        let xi = Functional::new(vec![q(1, 5), q(3, 1), q(-4, 3)]);
        let out = coadjoint(&b, &g, &xi).unwrap();
        let (a1, a2) = (g[0].clone(), g[1].clone());
        let (f1, f2, f3) = (xi[0].clone(), xi[1].clone(), xi[2].clone());
        assert_eq!(
            out.coords(),
            &[&f1 + &a2 * &f3, &f2 - &a1 * &f3, f3.clone()]
        );
    }
}
