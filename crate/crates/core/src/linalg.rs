//! Small dense helpers shared by the analysis modules.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two points of equal dimension.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let sym = symmetrize(h);
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(h)
        .into_iter()
        .fold(0.0, |acc, l| acc.max(l.abs()))
}

/// Smallest absolute eigenvalue of a symmetric matrix.
pub fn min_abs_eigenvalue(h: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(h)
        .into_iter()
        .fold(f64::INFINITY, |acc, l| acc.min(l.abs()))
}

/// Spectral norm of the inverse, `None` when the matrix is singular.
pub fn inverse_norm(h: &DMatrix<f64>) -> Option<f64> {
    let m = min_abs_eigenvalue(h);
    (m > 0.0).then(|| 1.0 / m)
}

pub fn symmetrize(h: &DMatrix<f64>) -> DMatrix<f64> {
    (h + h.transpose()) * 0.5
}

/// Quadratic form `u' H u`.
pub fn quad_form(h: &DMatrix<f64>, u: &[f64]) -> f64 {
    let v = DVector::from_column_slice(u);
    v.dot(&(h * &v))
}

/// Lexicographic comparison on coordinates using total ordering.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_diagonal() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]);
        assert_eq!(spectral_norm(&h), 3.0);
        assert_eq!(min_abs_eigenvalue(&h), 2.0);
        assert_eq!(inverse_norm(&h), Some(0.5));
        assert_eq!(sym_eigenvalues(&h), [-3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_has_no_inverse_norm() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(inverse_norm(&h), None);
    }

    #[test]
    fn quadratic_form_matches_manual_sum() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        assert_eq!(quad_form(&h, &[1.0, 2.0]), 1.0 + 8.0 - 4.0);
    }
}
