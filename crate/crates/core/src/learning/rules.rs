use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaussian::SampleBatch;
use crate::linalg::{dot, CovarianceModel, Matrix};
use crate::stats::{CompensatedSum, VecAccumulator};

/// The synaptic matrix `W` (`nu x nx`, `1 <= nu <= nx`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(Matrix);

impl WeightMatrix {
    pub fn new(w: Matrix) -> Result<Self> {
        if w.rows() > w.cols() {
            return Err(Error::Dimension("weight matrix needs nu <= nx"));
        }
        if !w.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self(w))
    }

    pub fn zeros(nu: usize, nx: usize) -> Result<Self> {
        Self::new(Matrix::zeros(nu, nx))
    }

    pub fn nu(&self) -> usize {
        self.0.rows()
    }

    pub fn nx(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    /// `u = W x`.
    pub fn output(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.mul_vec(x)
    }

    /// `I - WᵀW`.
    pub fn residual_projector(&self) -> Matrix {
        let wtw = &self.0.transpose() * &self.0;
        &Matrix::identity(self.nx()) - &wtw
    }
}

fn check_cov(w: &WeightMatrix, cov: &CovarianceModel) -> Result<()> {
    if cov.dim() != w.nx() {
        return Err(Error::Dimension("covariance dimension differs from W columns"));
    }
    Ok(())
}

fn check_batch(w: &WeightMatrix, batch: &SampleBatch) -> Result<()> {
    if batch.dim() != w.nx() {
        return Err(Error::Dimension("sample dimension differs from W columns"));
    }
    Ok(())
}

/// Expected Oja update `W Σ (I - WᵀW)`.
pub fn oja_update_closed(w: &WeightMatrix, cov: &CovarianceModel) -> Result<Matrix> {
    check_cov(w, cov)?;
    let ws = w.matrix().try_mul(cov.sigma())?;
    ws.try_mul(&w.residual_projector())
}

/// Batch Oja update `(1/n) Σ_k u_k (x_k - Wᵀ u_k)ᵀ`.
pub fn oja_update_empirical(w: &WeightMatrix, batch: &SampleBatch) -> Result<Matrix> {
    check_batch(w, batch)?;
    let (nu, nx) = (w.nu(), w.nx());
    let wt = w.matrix().transpose();
    let mut acc = VecAccumulator::new(nu * nx);
    let mut err = vec![0.0; nx];
    for x in batch.iter() {
        let u = w.output(x)?;
        let back = wt.mul_vec(&u)?;
        for j in 0..nx {
            err[j] = x[j] - back[j];
        }
        for i in 0..nu {
            for j in 0..nx {
                acc.add_at(i * nx + j, u[i] * err[j]);
            }
        }
    }
    Matrix::new(nu, nx, acc.mean(batch.len()))
}

/// Global factor `g = ½(|x|² - |u|² - trΣ + tr(WΣWᵀ))` with the expectation
/// taken in closed form.
pub fn eghr_g(x: &[f64], w: &WeightMatrix, cov: &CovarianceModel) -> Result<f64> {
    check_cov(w, cov)?;
    if x.len() != w.nx() {
        return Err(Error::Dimension("x length differs from W columns"));
    }
    let u = w.output(x)?;
    Ok(0.5 * (dot(x, x) - dot(&u, &u) - expected_norm_gap(w, cov)))
}

/// `E|x|² - E|u|² = trΣ - tr(WΣWᵀ)`.
pub fn expected_norm_gap(w: &WeightMatrix, cov: &CovarianceModel) -> f64 {
    let wsw = &(w.matrix() * cov.sigma()) * &w.matrix().transpose();
    cov.sigma().trace() - wsw.trace()
}

/// Magnitude of the terms that cancel inside `g`:
/// `½(|x|² + |u|² + trΣ + tr(WΣWᵀ))`. Relative comparisons of `g` use this
/// as their scale, since `g` itself may be arbitrarily close to zero.
pub fn global_factor_scale(x: &[f64], w: &WeightMatrix, cov: &CovarianceModel) -> Result<f64> {
    check_cov(w, cov)?;
    let u = w.output(x)?;
    let wsw = &(w.matrix() * cov.sigma()) * &w.matrix().transpose();
    Ok(0.5 * (dot(x, x) + dot(&u, &u) + cov.sigma().trace() + wsw.trace()))
}

/// Batch means `(mean |x|², mean |u|²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormMeans {
    pub x_sq: f64,
    pub u_sq: f64,
}

impl NormMeans {
    pub fn of_batch(w: &WeightMatrix, batch: &SampleBatch) -> Result<Self> {
        check_batch(w, batch)?;
        let mut xs = CompensatedSum::default();
        let mut us = CompensatedSum::default();
        for x in batch.iter() {
            let u = w.output(x)?;
            xs.add(dot(x, x));
            us.add(dot(&u, &u));
        }
        let n = batch.len() as f64;
        Ok(Self {
            x_sq: xs.value() / n,
            u_sq: us.value() / n,
        })
    }
}

/// Global factor with the expectation replaced by batch means:
/// `½(|x|² - |u|² - m_x + m_u)`.
pub fn eghr_g_empirical(x: &[f64], w: &WeightMatrix, means: NormMeans) -> Result<f64> {
    if x.len() != w.nx() {
        return Err(Error::Dimension("x length differs from W columns"));
    }
    let u = w.output(x)?;
    Ok(0.5 * ((dot(x, x) - means.x_sq) - (dot(&u, &u) - means.u_sq)))
}

/// Expected EGHR update `W Σ (I - WᵀW) Σ`.
pub fn eghr_update_closed(w: &WeightMatrix, cov: &CovarianceModel) -> Result<Matrix> {
    check_cov(w, cov)?;
    let ws = w.matrix().try_mul(cov.sigma())?;
    let middle = w.residual_projector().try_mul(cov.sigma())?;
    ws.try_mul(&middle)
}

/// How the mean in the global factor is evaluated for batch updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlobalMean {
    /// Batch means of `|x|²` and `|u|²`.
    #[default]
    Batch,
    /// `trΣ` and `tr(WΣWᵀ)` from the batch's covariance.
    ClosedForm,
}

/// The per-sample global factors `g_k` used by [`eghr_update_empirical`].
pub fn eghr_factors(w: &WeightMatrix, batch: &SampleBatch, mean: GlobalMean) -> Result<Vec<f64>> {
    check_batch(w, batch)?;
    match mean {
        GlobalMean::Batch => {
            let means = NormMeans::of_batch(w, batch)?;
            batch.iter().map(|x| eghr_g_empirical(x, w, means)).collect()
        }
        GlobalMean::ClosedForm => {
            let cov = batch.covariance();
            batch.iter().map(|x| eghr_g(x, w, cov)).collect()
        }
    }
}

/// `(1/n) Σ_k g_k u_k x_kᵀ` for explicit factors `g`.
pub fn gated_hebbian_mean(w: &WeightMatrix, batch: &SampleBatch, g: &[f64]) -> Result<Matrix> {
    check_batch(w, batch)?;
    if g.len() != batch.len() {
        return Err(Error::Dimension("one global factor per sample is required"));
    }
    let (nu, nx) = (w.nu(), w.nx());
    let mut acc = VecAccumulator::new(nu * nx);
    for (x, gk) in batch.iter().zip(g) {
        let u = w.output(x)?;
        for i in 0..nu {
            let gu = gk * u[i];
            for j in 0..nx {
                acc.add_at(i * nx + j, gu * x[j]);
            }
        }
    }
    Matrix::new(nu, nx, acc.mean(batch.len()))
}

/// Batch EGHR update `(1/n) Σ_k g_k u_k x_kᵀ`.
pub fn eghr_update_empirical(w: &WeightMatrix, batch: &SampleBatch, mean: GlobalMean) -> Result<Matrix> {
    let g = eghr_factors(w, batch, mean)?;
    gated_hebbian_mean(w, batch, &g)
}
