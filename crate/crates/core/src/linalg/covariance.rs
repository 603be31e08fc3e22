use alloc::vec::Vec;

use super::decomp::{cholesky, cholesky_inverse, symmetric_eigen};
use super::Matrix;
use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`CovarianceModel::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Eigenvalues at or below this fraction of the largest are treated as zero.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// A symmetric positive definite covariance `Σ` with its Cholesky factor,
/// inverse and descending eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    sigma: Matrix,
    chol: Matrix,
    sigma_inv: Matrix,
    eigvals: Vec<f64>,
    eigvecs: Matrix,
}

impl CovarianceModel {
    pub fn new(sigma: Matrix) -> Result<Self> {
        Self::with_min_ratio(sigma, DEGENERACY_RATIO)
    }

    /// Like [`CovarianceModel::new`], but rejects any `Σ` whose smallest
    /// eigenvalue is at or below `min_ratio * λ_max`.
    pub fn with_min_ratio(sigma: Matrix, min_ratio: f64) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::Dimension("covariance must be square"));
        }
        if !sigma.is_finite() {
            return Err(Error::NonFinite);
        }
        let scale = sigma.frobenius_norm();
        let asym = (&sigma - &sigma.transpose()).frobenius_norm();
        let asymmetry = if scale > 0.0 { asym / scale } else { asym };
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let n = sigma.rows();
        let sigma = Matrix::from_fn(n, n, |i, j| 0.5 * (sigma[(i, j)] + sigma[(j, i)]));

        let (eigvals, eigvecs) = symmetric_eigen(&sigma)?;
        let max_eigenvalue = eigvals[0];
        let min_eigenvalue = eigvals[n - 1];
        if !(max_eigenvalue > 0.0) || min_eigenvalue <= min_ratio * max_eigenvalue {
            return Err(Error::Degenerate {
                min_eigenvalue,
                max_eigenvalue,
            });
        }
        let chol = cholesky(&sigma).ok_or(Error::Degenerate {
            min_eigenvalue,
            max_eigenvalue,
        })?;
        let sigma_inv = cholesky_inverse(&chol);
        Ok(Self {
            sigma,
            chol,
            sigma_inv,
            eigvals,
            eigvecs,
        })
    }

    /// `Q diag(eigenvalues) Qᵀ` for an orthogonal `Q`.
    pub fn from_spectrum(q: &Matrix, eigenvalues: &[f64]) -> Result<Self> {
        if q.rows() != eigenvalues.len() || !q.is_square() {
            return Err(Error::Dimension("spectrum length must match the basis"));
        }
        let sigma = &(q * &Matrix::from_diagonal(eigenvalues)) * &q.transpose();
        Self::new(sigma)
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    pub fn chol(&self) -> &Matrix {
        &self.chol
    }

    pub fn sigma_inv(&self) -> &Matrix {
        &self.sigma_inv
    }

    /// Eigenvalues, largest first.
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    /// Orthonormal eigenvectors as columns, ordered like [`Self::eigvals`].
    pub fn eigvecs(&self) -> &Matrix {
        &self.eigvecs
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigvals[0]
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigvals[self.eigvals.len() - 1]
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    /// Top-`k` eigenvectors as the rows of a `k x n` matrix.
    pub fn principal_rows(&self, k: usize) -> Matrix {
        Matrix::from_fn(k, self.dim(), |i, j| self.eigvecs[(j, i)])
    }

    /// Whether the spectrum separates the top `k` eigenvalues from the rest,
    /// which is what makes the principal `k`-subspace unique.
    pub fn has_gap_at(&self, k: usize) -> bool {
        if k == 0 || k >= self.dim() {
            return true;
        }
        self.eigvals[k - 1] - self.eigvals[k] > 1e-10 * self.lambda_max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let c = CovarianceModel::new(Matrix::identity(3)).unwrap();
        assert_eq!(c.eigvals(), &[1.0, 1.0, 1.0]);
        assert_eq!(c.chol(), &Matrix::identity(3));

        let c = CovarianceModel::new(Matrix::from_diagonal(&[4.0, 1.0])).unwrap();
        assert_eq!(c.eigvals(), &[4.0, 1.0]);
        assert_eq!(c.chol(), &Matrix::from_diagonal(&[2.0, 1.0]));
        assert_eq!(c.sigma_inv(), &Matrix::from_diagonal(&[0.25, 1.0]));
    }

    #[test]
    fn rejects_indefinite() {
        let err = CovarianceModel::new(Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap()).unwrap_err();
        match err {
            Error::Degenerate { min_eigenvalue, .. } => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let a = Matrix::from_rows(&[[1.0, 0.1], [0.0, 1.0]]).unwrap();
        assert!(matches!(CovarianceModel::new(a), Err(Error::NotSymmetric { .. })));
        assert!(matches!(CovarianceModel::new(Matrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn ratio_threshold() {
        let s = Matrix::from_diagonal(&[1.0, 1e-10]);
        assert!(CovarianceModel::new(s.clone()).is_ok());
        assert!(matches!(
            CovarianceModel::with_min_ratio(s, 1e-8),
            Err(Error::Degenerate { .. })
        ));
    }
}
