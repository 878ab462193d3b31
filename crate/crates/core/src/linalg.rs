//! Small dense floating-point helpers shared by the numerical modules.

use nalgebra::DMatrix;

/// Relative singular-value threshold for rank decisions at float points.
pub const REL_RANK_TOL: f64 = 1e-10;

pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis (as rows) of `{v : M v = 0}`.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to at least square so the SVD returns the full right factor
    let rows = m.nrows().max(n);
    let mut a = DMatrix::zeros(rows, n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n)
        .filter(|&i| top == 0.0 || svd.singular_values[i] <= rel_tol * top)
        .collect();
    DMatrix::from_fn(keep.len(), n, |r, c| v_t[(keep[r], c)])
}

/// Orthonormal rows spanning the row space of `rows`. Complete-pivot
/// elimination first brings the rows to a reduced form with unit pivots, so
/// rows of wildly different scale keep their directions before the final
/// Gram–Schmidt pass.
pub fn orthonormal_span(rows: &DMatrix<f64>, abs_tol: f64) -> DMatrix<f64> {
    let mut a = rows.clone();
    let (nr, nc) = a.shape();
    let mut used_rows = vec![false; nr];
    let mut used_cols = vec![false; nc];
    let mut order = Vec::new();
    loop {
        let mut best = (0.0, 0, 0);
        for i in (0..nr).filter(|&i| !used_rows[i]) {
            for j in (0..nc).filter(|&j| !used_cols[j]) {
                let v = a[(i, j)].abs();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        let (v, pi, pj) = best;
        if v <= abs_tol {
            break;
        }
        let p = a[(pi, pj)];
        for c in 0..nc {
            a[(pi, c)] /= p;
        }
        for i in 0..nr {
            if i != pi {
                let f = a[(i, pj)];
                if f != 0.0 {
                    for c in 0..nc {
                        let d = f * a[(pi, c)];
                        a[(i, c)] -= d;
                    }
                }
            }
        }
        used_rows[pi] = true;
        used_cols[pj] = true;
        order.push(pi);
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &i in &order {
        let mut v: Vec<f64> = (0..nc).map(|c| a[(i, c)]).collect();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= d * y;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    from_rows(&basis, nc)
}

/// Orthogonal projector `B^T B` for orthonormal rows `B`.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis.transpose() * basis
}

/// Eigenvectors (as rows) of a symmetric matrix for its `k` largest eigenvalues.
pub fn top_eigenvectors(sym: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = sym.nrows();
    let eig = sym.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    DMatrix::from_fn(k, n, |r, c| eig.eigenvectors[(c, idx[r])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 1.0]);
        let k = nullspace(&m, REL_RANK_TOL);
        assert_eq!(k.nrows(), 1);
        let v = k.row(0);
        assert!((m * v.transpose()).norm() < 1e-14);
    }

    #[test]
    fn span_survives_disparate_scales() {
        let rows = DMatrix::from_row_slice(2, 3, &[1e-12, 1.0, 0.0, 0.0, 1e-14, 1e-13]);
        let b = orthonormal_span(&rows, 0.0);
        assert_eq!(b.nrows(), 2);
        let g = &b * b.transpose();
        assert!((g - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
