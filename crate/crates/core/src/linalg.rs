//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of a symmetric matrix (`+∞` for the empty matrix).
pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    sym_eigen(m).0[0]
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Trace pairing `tr(AB)` of two symmetric matrices.
pub fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Eigenvalues by cyclic Jacobi rotations, sorted ascending.
///
/// Kept separate from [`sym_eigen`] so that certificate validation does not
/// reuse the eigensolver that produced the certificate.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = symmetrize(m);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Gram–Schmidt on the columns of `vectors` with respect to the positive
/// (or at least nondegenerate on the span) bilinear form `gram`.
///
/// Columns whose residual norm falls below `drop_tol` (relative to their
/// original norm) are discarded. Returns the orthonormal columns.
pub fn gram_schmidt(vectors: &DMatrix<f64>, gram: &DMatrix<f64>, drop_tol: f64) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for j in 0..vectors.ncols() {
        let v0 = vectors.column(j).into_owned();
        let n0 = (v0.transpose() * gram * &v0)[0].abs().sqrt();
        if n0 == 0.0 {
            continue;
        }
        let mut v = v0;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for u in &out {
                let c = (u.transpose() * gram * &v)[0];
                v -= u * c;
            }
        }
        let nn = (v.transpose() * gram * &v)[0];
        if nn.abs().sqrt() <= drop_tol * n0 {
            continue;
        }
        out.push(v / nn.abs().sqrt());
    }
    let rows = vectors.nrows();
    DMatrix::from_fn(rows, out.len(), |r, c| out[c][r])
}

/// Metric-orthogonal projector onto the column span of `basis`:
/// `P = B (Bᵀ G B)⁻¹ Bᵀ G`.  Works for indefinite `gram` as long as the
/// restriction to the span is nondegenerate.
pub fn metric_projector(basis: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let small = basis.transpose() * gram * basis;
    let inv = small
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("degenerate metric on subspace".into()))?;
    Ok(basis * inv * basis.transpose() * gram)
}

/// Require a symmetric matrix to be positive-definite.
pub fn check_positive_definite(gram: &DMatrix<f64>) -> Result<()> {
    let lmin = lambda_min(gram);
    if lmin <= 1e-14 * gram.norm().max(1.0) {
        return Err(Error::NotPositiveDefinite(lmin));
    }
    Ok(())
}

/// Numerical rank with an absolute singular-value threshold.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > tol)
        .count()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_nalgebra() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let j = jacobi_eigenvalues(&m);
        let (v, _) = sym_eigen(&m);
        for i in 0..3 {
            assert!((j[i] - v[i]).abs() < 1e-12);
        }
        assert!((j[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let v = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let q = gram_schmidt(&v, &DMatrix::identity(2, 2), 1e-10);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn projector_is_idempotent_for_indefinite_metric() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 1.0]));
        let b = DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 0.0]);
        let p = metric_projector(&b, &g).unwrap();
        assert!((&p * &p - &p).norm() < 1e-14);
    }
}
