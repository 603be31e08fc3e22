use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_inverse, CovarianceModel, Matrix};

use super::WeightMatrix;

/// Orthogonal projector onto the row space of `W`, `Wᵀ (WWᵀ)⁻¹ W`.
pub fn row_space_projector(w: &WeightMatrix) -> Result<Matrix> {
    let m = w.matrix();
    let gram = m * &m.transpose();
    let scale = gram.trace();
    let chol = cholesky(&gram).ok_or(Error::RankDeficient { nu: w.nu() })?;
    let min_pivot = (0..w.nu()).map(|i| chol[(i, i)] * chol[(i, i)]).fold(f64::INFINITY, f64::min);
    if !(scale > 0.0) || min_pivot <= 1e-12 * scale {
        return Err(Error::RankDeficient { nu: w.nu() });
    }
    let gram_inv = cholesky_inverse(&chol);
    Ok(&(&m.transpose() * &gram_inv) * m)
}

/// `‖P_W - P_k‖_F` between the row space of `W` and the span of the top
/// `nu` eigenvectors of `Σ`.
///
/// When `Σ` has no spectral gap at `nu` the principal subspace is not unique
/// and the value depends on the eigensolver's choice of basis; see
/// [`CovarianceModel::has_gap_at`].
pub fn subspace_error(w: &WeightMatrix, cov: &CovarianceModel) -> Result<f64> {
    if cov.dim() != w.nx() {
        return Err(Error::Dimension("covariance dimension differs from W columns"));
    }
    let pw = row_space_projector(w)?;
    let top = cov.principal_rows(w.nu());
    let pk = &top.transpose() * &top;
    Ok((&pw - &pk).frobenius_norm())
}

/// `‖WWᵀ - I‖_F`.
pub fn orthonormality_residual(w: &WeightMatrix) -> f64 {
    let m = w.matrix();
    (&(m * &m.transpose()) - &Matrix::identity(w.nu())).frobenius_norm()
}
