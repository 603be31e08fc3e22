//! Frame machinery on vectorized symmetric matrices.
//!
//! The frame vector of a sample is `ξ = vec(xxᵀ) - vec(Σ)`. For Gaussian `x`
//! its second-moment operator is `S = (Σ ⊗ Σ)(I + T)`, which vanishes on
//! `vec(Skew)` and acts as `2(Σ ⊗ Σ)` on `vec(Sym)`. Expanding the
//! preconditioned Oja target `vec(Σ(I - WᵀW)Σ)` in this frame produces
//! coefficients equal to the EGHR global factor.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaussian::SampleBatch;
use crate::learning::{eghr_update_empirical, oja_update_closed, GlobalMean, WeightMatrix};
use crate::linalg::{commutation_matrix, dot, kron, norm, unvec, vec as vectorize, CovarianceModel, Matrix};
use crate::stats::{relative_error, CompensatedSum, VecAccumulator};

/// Relative size of the skew component tolerated in a `vec(Sym)` argument.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// `ξ = vec(xxᵀ) - vec(Σ)` for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameVector {
    pub xi: Vec<f64>,
    pub source_x: Vec<f64>,
}

impl FrameVector {
    /// `unvec(ξ) + Σ`, which is `xxᵀ`.
    pub fn outer(&self, cov: &CovarianceModel) -> Matrix {
        let n = self.source_x.len();
        let xi = unvec(&self.xi, n).expect("frame vector has length n^2");
        &xi + cov.sigma()
    }
}

pub fn frame_vector(x: &[f64], cov: &CovarianceModel) -> Result<FrameVector> {
    let n = cov.dim();
    if x.len() != n {
        return Err(Error::Dimension("sample length does not match covariance"));
    }
    let mut xi = vec![0.0; n * n];
    write_frame_vector(x, cov.sigma(), &mut xi);
    Ok(FrameVector {
        xi,
        source_x: x.to_vec(),
    })
}

fn write_frame_vector(x: &[f64], sigma: &Matrix, out: &mut [f64]) {
    let n = x.len();
    for j in 0..n {
        for i in 0..n {
            out[j * n + i] = x[i] * x[j] - sigma[(i, j)];
        }
    }
}

/// A materialized frame operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOperator {
    pub s: Matrix,
    /// `Σ ⊗ Σ`, present for the analytic operator.
    pub sigma_kron: Option<Matrix>,
    /// The commutation matrix `T`, present for the analytic operator.
    pub commutation: Option<Matrix>,
}

impl FrameOperator {
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.s.mul_vec(v)
    }

    /// `(v, S v)`.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        Ok(dot(v, &self.apply(v)?))
    }
}

/// `S = (Σ ⊗ Σ)(I + T)`.
pub fn frame_operator_analytic(cov: &CovarianceModel) -> FrameOperator {
    let n = cov.dim();
    let sk = kron(cov.sigma(), cov.sigma());
    let t = commutation_matrix(n);
    let s = &sk * &(&Matrix::identity(n * n) + &t);
    FrameOperator {
        s,
        sigma_kron: Some(sk),
        commutation: Some(t),
    }
}

/// `(1/n) Σ_k ξ_k ξ_kᵀ` over a batch, with `ξ_k` centred on the batch's
/// covariance model.
pub fn frame_operator_empirical(batch: &SampleBatch) -> Result<FrameOperator> {
    if batch.len() < 2 {
        return Err(Error::InvalidConfig("the empirical frame operator needs at least 2 samples"));
    }
    let n = batch.dim();
    let m = n * n;
    let sigma = batch.covariance().sigma();
    let mut acc = VecAccumulator::new(m * m);
    let mut xi = vec![0.0; m];
    for x in batch.iter() {
        write_frame_vector(x, sigma, &mut xi);
        for p in 0..m {
            if xi[p] == 0.0 {
                continue;
            }
            for q in p..m {
                acc.add_at(p * m + q, xi[p] * xi[q]);
            }
        }
    }
    let upper = acc.mean(batch.len());
    let s = Matrix::from_fn(m, m, |p, q| if p <= q { upper[p * m + q] } else { upper[q * m + p] });
    Ok(FrameOperator {
        s,
        sigma_kron: None,
        commutation: None,
    })
}

/// Frame bounds of `ξ` on `vec(Sym)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    /// `2 λ_min(Σ)²`, the smallest eigenvalue of `S` on `vec(Sym)`.
    pub lower: f64,
    /// `2 λ_max(Σ)²`, the largest eigenvalue of `S`.
    pub upper_tight: f64,
    /// `E|ξ|² = tr S = (tr Σ)² + tr(Σ²)`, the Cauchy-Schwarz bound.
    pub upper_moment: f64,
}

pub fn frame_bounds(cov: &CovarianceModel) -> FrameBounds {
    let tr = cov.sigma().trace();
    let tr_sq = (cov.sigma() * cov.sigma()).trace();
    FrameBounds {
        lower: 2.0 * cov.lambda_min() * cov.lambda_min(),
        upper_tight: 2.0 * cov.lambda_max() * cov.lambda_max(),
        upper_moment: tr * tr + tr_sq,
    }
}

/// Checks that `unvec(v)` is symmetric to within tolerance and returns its
/// symmetric part.
pub fn symmetric_matrix_of(v: &[f64], n: usize) -> Result<Matrix> {
    let m = unvec(v, n)?;
    let mut skew_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = 0.5 * (m[(i, j)] - m[(j, i)]);
            skew_sq += d * d;
        }
    }
    let skew_norm = libm::sqrt(skew_sq);
    let tolerance = SYMMETRY_TOLERANCE * (1.0 + norm(v));
    if skew_norm > tolerance {
        return Err(Error::NotInSymmetricSubspace { skew_norm, tolerance });
    }
    Ok(Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
}

/// `S⁻¹ v` for `v ∈ vec(Sym)`, via `vec(½ Σ⁻¹ unvec(v) Σ⁻¹)`.
pub fn restricted_inverse_apply(cov: &CovarianceModel, v: &[f64]) -> Result<Vec<f64>> {
    let n = cov.dim();
    let m = symmetric_matrix_of(v, n)?;
    let inv = cov.sigma_inv();
    let r = &(inv * &m) * inv;
    vectorize(&r.scale(0.5))
}

/// `(v, S⁻¹ ξ(x))`.
pub fn frame_coefficient(v: &[f64], x: &[f64], cov: &CovarianceModel) -> Result<f64> {
    let n = cov.dim();
    if v.len() != n * n {
        return Err(Error::Dimension("v must have length nx^2"));
    }
    let xi = frame_vector(x, cov)?;
    let target = symmetric_matrix_of(v, n)?;
    Ok(dot(&vectorize(&target)?, &restricted_inverse_apply(cov, &xi.xi)?))
}

/// `vec(Σ(I - WᵀW)Σ)`, the preconditioned Oja target.
pub fn preconditioned_oja_target(w: &WeightMatrix, cov: &CovarianceModel) -> Result<Vec<f64>> {
    if cov.dim() != w.nx() {
        return Err(Error::Dimension("covariance dimension differs from W columns"));
    }
    let s = cov.sigma();
    vectorize(&(&(s * &w.residual_projector()) * s))
}

/// `(vec(½(I - WᵀW)), ξ(x))`: the frame coefficient of the preconditioned
/// target with the frame operator cancelled.
pub fn cancellation_coefficient(w: &WeightMatrix, x: &[f64], cov: &CovarianceModel) -> Result<f64> {
    if cov.dim() != w.nx() {
        return Err(Error::Dimension("covariance dimension differs from W columns"));
    }
    let xi = frame_vector(x, cov)?;
    let half = vectorize(&w.residual_projector().scale(0.5))?;
    Ok(dot(&half, &xi.xi))
}

/// Per-sample frame coefficients `(v, S⁻¹ ξ_k)`.
pub fn frame_coefficients(v: &[f64], batch: &SampleBatch) -> Result<Vec<f64>> {
    let cov = batch.covariance();
    let n = cov.dim();
    if v.len() != n * n {
        return Err(Error::Dimension("v must have length nx^2"));
    }
    let target = symmetric_matrix_of(v, n)?;
    // (v, S⁻¹ξ) = (S⁻¹v, ξ) because S⁻¹ is self-adjoint on vec(Sym).
    let dual = restricted_inverse_apply(cov, &vectorize(&target)?)?;
    let mut xi = vec![0.0; n * n];
    Ok(batch
        .iter()
        .map(|x| {
            write_frame_vector(x, cov.sigma(), &mut xi);
            dot(&dual, &xi)
        })
        .collect())
}

/// `(1/n) Σ_k (v, S⁻¹ ξ_k) ξ_k`, which converges to `v`.
pub fn frame_expansion_reconstruct(v: &[f64], batch: &SampleBatch) -> Result<Vec<f64>> {
    let coeffs = frame_coefficients(v, batch)?;
    let sigma = batch.covariance().sigma();
    let n = batch.dim();
    let mut acc = VecAccumulator::new(n * n);
    let mut xi = vec![0.0; n * n];
    for (x, c) in batch.iter().zip(&coeffs) {
        write_frame_vector(x, sigma, &mut xi);
        acc.add_scaled(*c, &xi);
    }
    Ok(acc.mean(batch.len()))
}

/// Frame expansion with each frame vector centred on the batch mean of
/// `vec(xxᵀ)` instead of `vec(Σ)`.
pub fn frame_expansion_reconstruct_centered(v: &[f64], batch: &SampleBatch) -> Result<Vec<f64>> {
    let coeffs = frame_coefficients(v, batch)?;
    let n = batch.dim();
    let mut outer = VecAccumulator::new(n * n);
    let mut weighted = VecAccumulator::new(n * n);
    let mut csum = CompensatedSum::default();
    let mut xx = vec![0.0; n * n];
    for (x, c) in batch.iter().zip(&coeffs) {
        for j in 0..n {
            for i in 0..n {
                xx[j * n + i] = x[i] * x[j];
            }
        }
        outer.add_scaled(1.0, &xx);
        weighted.add_scaled(*c, &xx);
        csum.add(*c);
    }
    let len = batch.len();
    let mean_outer = outer.mean(len);
    let mean_c = csum.value() / len as f64;
    Ok(weighted
        .mean(len)
        .iter()
        .zip(&mean_outer)
        .map(|(w, m)| w - mean_c * m)
        .collect())
}

/// Every intermediate of the numerical derivation of EGHR from Oja's rule
/// on one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationReport {
    /// `Ẇ_Oja Σ = W Σ(I - WᵀW)Σ`.
    pub target: Matrix,
    /// `W unvec((1/n) Σ_k c_k ξ_k)` with `c_k = (v, S⁻¹ ξ_k)`.
    pub expansion: Matrix,
    /// `(1/n) Σ_k g_k u_k x_kᵀ` with the closed-form mean in `g`.
    pub direct_closed_mean: Matrix,
    /// `W unvec((1/n) Σ_k c_k ξ̂_k)` with batch-centred frame vectors.
    pub expansion_centered: Matrix,
    /// `(1/n) Σ_k g_k u_k x_kᵀ` with batch means in `g`.
    pub direct_batch_mean: Matrix,
    /// Batch mean of the frame coefficients.
    pub mean_coefficient: f64,
    /// `‖expansion_centered - direct_batch_mean‖ / ‖direct_batch_mean‖`.
    pub path_error: f64,
    /// Relative mismatch in `expansion = direct_closed_mean - c̄ W Σ`.
    pub offset_identity_error: f64,
    /// `‖expansion - target‖ / ‖target‖`.
    pub monte_carlo_error: f64,
}

/// Frame-expands the preconditioned Oja target over `batch` and compares it
/// with the EGHR batch update computed directly.
pub fn derive_eghr_from_oja(w: &WeightMatrix, batch: &SampleBatch) -> Result<DerivationReport> {
    let cov = batch.covariance();
    let n = cov.dim();
    let target = oja_update_closed(w, cov)?.try_mul(cov.sigma())?;
    let v = preconditioned_oja_target(w, cov)?;

    let expansion = w.matrix().try_mul(&unvec(&frame_expansion_reconstruct(&v, batch)?, n)?)?;
    let expansion_centered = w.matrix().try_mul(&unvec(&frame_expansion_reconstruct_centered(&v, batch)?, n)?)?;
    let direct_closed_mean = eghr_update_empirical(w, batch, GlobalMean::ClosedForm)?;
    let direct_batch_mean = eghr_update_empirical(w, batch, GlobalMean::Batch)?;

    let coeffs = frame_coefficients(&v, batch)?;
    let mut csum = CompensatedSum::default();
    coeffs.iter().for_each(|c| csum.add(*c));
    let mean_coefficient = csum.value() / coeffs.len() as f64;

    let path_error = relative_error(
        (&expansion_centered - &direct_batch_mean).frobenius_norm(),
        direct_batch_mean.frobenius_norm(),
    );
    let ws = w.matrix() * cov.sigma();
    let predicted = &direct_closed_mean - &ws.scale(mean_coefficient);
    let offset_identity_error = relative_error(
        (&expansion - &predicted).frobenius_norm(),
        direct_closed_mean.frobenius_norm().max(predicted.frobenius_norm()),
    );
    let monte_carlo_error = relative_error((&expansion - &target).frobenius_norm(), target.frobenius_norm());

    Ok(DerivationReport {
        target,
        expansion,
        direct_closed_mean,
        expansion_centered,
        direct_batch_mean,
        mean_coefficient,
        path_error,
        offset_identity_error,
        monte_carlo_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::eghr_g;

    fn cov(diag: &[f64]) -> CovarianceModel {
        CovarianceModel::new(Matrix::from_diagonal(diag)).unwrap()
    }

    #[test]
    fn frame_vector_examples() {
        let xi = frame_vector(&[0.0, 0.0], &cov(&[1.0, 1.0])).unwrap();
        assert_eq!(xi.xi, vec![-1.0, 0.0, 0.0, -1.0]);
        assert_eq!(frame_vector(&[1.0], &cov(&[1.0])).unwrap().xi, vec![0.0]);
        assert!(frame_vector(&[1.0], &cov(&[1.0, 1.0])).is_err());

        let c = cov(&[2.0, 1.0]);
        let fv = frame_vector(&[0.5, -1.5], &c).unwrap();
        assert_eq!(fv.outer(&c), Matrix::outer(&[0.5, -1.5], &[0.5, -1.5]));
    }

    #[test]
    fn analytic_operator_examples() {
        let s1 = frame_operator_analytic(&cov(&[1.0]));
        assert_eq!(s1.s, Matrix::from_rows(&[[2.0]]).unwrap());

        let s = frame_operator_analytic(&cov(&[1.0, 1.0]));
        let expected = &Matrix::identity(4) + &commutation_matrix(2);
        assert_eq!(s.s, expected);

        let s = frame_operator_analytic(&cov(&[2.0, 1.0]));
        let (vals, _) = crate::linalg::symmetric_eigen(&s.s).unwrap();
        for (v, e) in vals.iter().zip([8.0, 4.0, 2.0, 0.0]) {
            assert!((v - e).abs() < 1e-13, "{vals:?}");
        }
    }

    #[test]
    fn bounds_examples() {
        let b = frame_bounds(&cov(&[1.0, 1.0]));
        assert_eq!((b.lower, b.upper_tight, b.upper_moment), (2.0, 2.0, 6.0));
        let b = frame_bounds(&cov(&[2.0, 1.0]));
        assert_eq!((b.lower, b.upper_tight, b.upper_moment), (2.0, 8.0, 14.0));
        let b = frame_bounds(&cov(&[3.0, 3.0, 3.0]));
        assert_eq!(b.lower, 18.0);
        assert_eq!(b.upper_tight, 18.0);
    }

    #[test]
    fn restricted_inverse_examples() {
        let v = [1.0, 2.0, 2.0, -4.0];
        assert_eq!(restricted_inverse_apply(&cov(&[1.0, 1.0]), &v).unwrap(), vec![0.5, 1.0, 1.0, -2.0]);
        let r = restricted_inverse_apply(&cov(&[2.0, 1.0]), &[8.0, 0.0, 0.0, 1.0]).unwrap();
        for (a, b) in r.iter().zip([1.0, 0.0, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let skew = [0.0, 1.0, -1.0, 0.0];
        assert!(matches!(
            restricted_inverse_apply(&cov(&[2.0, 1.0]), &skew),
            Err(Error::NotInSymmetricSubspace { .. })
        ));
    }

    #[test]
    fn coefficient_examples() {
        let c = cov(&[1.0, 1.0]);
        assert_eq!(frame_coefficient(&[0.0; 4], &[1.0, 2.0], &c).unwrap(), 0.0);
        assert_eq!(frame_coefficient(&[1.0, 0.0, 0.0, 1.0], &[2.0, 0.0], &c).unwrap(), 1.0);

        let c = cov(&[2.0, 0.5]);
        let w = WeightMatrix::new(Matrix::from_rows(&[[0.3, -0.8]]).unwrap()).unwrap();
        let v = preconditioned_oja_target(&w, &c).unwrap();
        let x = [1.1, -0.4];
        let a = frame_coefficient(&v, &x, &c).unwrap();
        let b = eghr_g(&x, &w, &c).unwrap();
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }

    #[test]
    fn cancellation_examples() {
        let c = cov(&[1.0, 1.0]);
        let full = WeightMatrix::new(Matrix::identity(2)).unwrap();
        assert_eq!(cancellation_coefficient(&full, &[3.0, -1.0], &c).unwrap(), 0.0);
        let zero = WeightMatrix::zeros(1, 2).unwrap();
        assert_eq!(cancellation_coefficient(&zero, &[2.0, 0.0], &c).unwrap(), 1.0);
    }

    #[test]
    fn empirical_operator_edge_cases() {
        let c = cov(&[1.0, 1.0]);
        // xxᵀ = I is impossible for a single vector, so use Σ = xxᵀ in 1-D.
        let c1 = cov(&[4.0]);
        let b = SampleBatch::from_samples(&c1, &[vec![2.0], vec![-2.0]]).unwrap();
        assert_eq!(frame_operator_empirical(&b).unwrap().s, Matrix::zeros(1, 1));
        let one = SampleBatch::from_samples(&c, &[vec![1.0, 0.0]]).unwrap();
        assert!(frame_operator_empirical(&one).is_err());
    }

    #[test]
    fn zero_weights_derive_to_zero() {
        let c = cov(&[2.0, 1.0]);
        let batch = crate::gaussian::sample(&c, 1000, 1).unwrap();
        let w = WeightMatrix::zeros(1, 2).unwrap();
        let rep = derive_eghr_from_oja(&w, &batch).unwrap();
        assert_eq!(rep.target, Matrix::zeros(1, 2));
        assert_eq!(rep.expansion, Matrix::zeros(1, 2));
        assert_eq!(rep.direct_batch_mean, Matrix::zeros(1, 2));
        assert_eq!((rep.path_error, rep.monte_carlo_error), (0.0, 0.0));
    }

    #[test]
    fn reconstruct_zero_is_zero() {
        let c = cov(&[2.0, 1.0]);
        let batch = crate::gaussian::sample(&c, 100, 1).unwrap();
        assert_eq!(frame_expansion_reconstruct(&[0.0; 4], &batch).unwrap(), vec![0.0; 4]);
    }
}
