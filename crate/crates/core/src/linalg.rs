//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Frobenius norm of `A − Aᴴ`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

/// `(A + Aᴴ)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted in decreasing order.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `V diag(λ) Vᴴ`.
pub fn from_eigen(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let n = vectors.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        if lam == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (&v * v.adjoint()).scale(lam);
    }
    hermitian_part(&out)
}

/// Euclidean projection onto the probability simplex `{x ≥ 0, Σx = total}`.
pub fn project_simplex(values: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - total) / (i + 1) as f64;
        if u - t > 0.0 {
            shift = t;
        }
    }
    values.iter().map(|&v| (v - shift).max(0.0)).collect()
}

/// Real part of `hᴴ W h`.
pub fn quad_form(w: &CMatrix, h: &CVector) -> f64 {
    h.dotc(&(w * h)).re
}

pub fn outer(h: &CVector) -> CMatrix {
    h * h.adjoint()
}

pub fn real_trace(a: &CMatrix) -> f64 {
    a.trace().re
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(a: &CMatrix) -> f64 {
    let eig = SymmetricEigen::new(hermitian_part(a));
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn cvector(entries: &[Complex64]) -> CVector {
    DVector::from_column_slice(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5], 1.0);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = project_simplex(&[2.0, -1.0, 0.0], 1.0);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.6, 0.3, 0.1], 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn eigen_round_trip() {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            let re = (i + j) as f64;
            let im = i as f64 - j as f64;
            Complex64::new(re, im)
        });
        let (vals, vecs) = hermitian_eigen(&a);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let back = from_eigen(&vals, &vecs);
        assert!((back - a).norm() < 1e-12);
    }
}
