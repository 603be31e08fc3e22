//! Seeded verification experiments. Each check reduces to one number, its
//! reference, and a pinned tolerance; callers attach names, timing and
//! provenance.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::frame::{
    cancellation_coefficient, derive_eghr_from_oja, frame_bounds, frame_coefficient, frame_expansion_reconstruct,
    frame_operator_analytic, frame_operator_empirical, preconditioned_oja_target, restricted_inverse_apply,
};
use crate::gaussian::{builtin_test_functions, derive_seed, isserlis_fourth_moment, sample, stein_check_batch, STD_ERROR_BAND};
use crate::learning::{
    eghr_g, eghr_update_closed, eghr_update_empirical, global_factor_scale, oja_update_closed, oja_update_empirical,
    GlobalMean, WeightMatrix,
};
use crate::linalg::{norm, vec as vectorize, CovarianceModel, Matrix};
use crate::random;
use crate::stats::{loglog_slope, relative_error};

/// Machine-precision identities.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Frame-bound slack and restricted-inverse residual.
pub const FRAME_TOLERANCE: f64 = 1e-10;
/// Relative Monte-Carlo error accepted at the largest sample size.
pub const MONTE_CARLO_TOLERANCE: f64 = 0.05;
/// CLT rate: slope -1/2, accepted within this distance.
pub const SLOPE_REFERENCE: f64 = -0.5;
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// Replicates averaged (root-mean-square) at each sample size of a rate ladder.
pub const RATE_REPLICATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Absolute,
    Relative,
}

/// Outcome of one check. `passed` is exactly `error <= tolerance` for the
/// error named by `kind`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub value: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub kind: ErrorKind,
    pub passed: bool,
}

impl CheckOutcome {
    /// A worst-case error that has already been reduced to a single
    /// magnitude (reference zero).
    pub fn worst_error(error: f64, kind: ErrorKind, tolerance: f64) -> Self {
        Self::compare(error, 0.0, error, kind, tolerance)
    }

    fn compare(value: f64, reference: f64, error: f64, kind: ErrorKind, tolerance: f64) -> Self {
        let abs_error = match kind {
            ErrorKind::Absolute => error,
            ErrorKind::Relative => (value - reference).abs(),
        };
        let rel_error = match kind {
            ErrorKind::Relative => error,
            ErrorKind::Absolute => relative_error(abs_error, reference.abs()),
        };
        let applicable = match kind {
            ErrorKind::Absolute => abs_error,
            ErrorKind::Relative => rel_error,
        };
        Self {
            value,
            reference,
            abs_error,
            rel_error,
            tolerance,
            kind,
            passed: applicable.is_finite() && applicable <= tolerance,
        }
    }

    /// Error compared against the tolerance.
    pub fn error(&self) -> f64 {
        match self.kind {
            ErrorKind::Absolute => self.abs_error,
            ErrorKind::Relative => self.rel_error,
        }
    }
}

/// A random `(W, Σ)` instance with `W` entries uniform in `[-1, 1]`.
pub fn random_instance<R: Rng>(rng: &mut R, nx: usize, nu: usize, eig_lo: f64, eig_hi: f64) -> Result<(WeightMatrix, CovarianceModel)> {
    let cov = random::spd(rng, nx, eig_lo, eig_hi)?;
    let w = WeightMatrix::new(random::uniform_matrix(rng, nu, nx, 1.0))?;
    Ok((w, cov))
}

/// `max ‖W Σ(I-WᵀW)Σ - (W Σ(I-WᵀW)) Σ‖ / ‖(W Σ(I-WᵀW)) Σ‖` over instances.
pub fn closed_form_identity<'a>(instances: impl IntoIterator<Item = (&'a WeightMatrix, &'a CovarianceModel)>) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for (w, cov) in instances {
        let reference = oja_update_closed(w, cov)?.try_mul(cov.sigma())?;
        let eghr = eghr_update_closed(w, cov)?;
        let err = relative_error((&eghr - &reference).frobenius_norm(), reference.frobenius_norm());
        worst = worst.max(err);
    }
    Ok(CheckOutcome::worst_error(worst, ErrorKind::Relative, EXACT_TOLERANCE))
}

/// Both updates vanish on constructed fixed points (rotated orthonormal
/// bases of invariant subspaces), and near them each update bounds the other
/// through the spectrum of `Σ`.
pub fn fixed_point_sharing<R: Rng>(rng: &mut R, cov: &CovarianceModel, nu: usize, count: usize) -> Result<CheckOutcome> {
    let nx = cov.dim();
    let scale = cov.lambda_max() * cov.lambda_max();
    let mut worst = 0.0f64;
    for _ in 0..count {
        let rot = random::orthogonal(rng, nu);
        // Random choice of nu eigenvectors.
        let mut idx: Vec<usize> = (0..nx).collect();
        for i in (1..nx).rev() {
            idx.swap(i, rng.random_range(0..=i));
        }
        let basis = Matrix::from_fn(nu, nx, |i, j| cov.eigvecs()[(j, idx[i])]);
        let w = WeightMatrix::new(&rot * &basis)?;
        let oja = oja_update_closed(&w, cov)?.frobenius_norm();
        let eghr = eghr_update_closed(&w, cov)?.frobenius_norm();
        worst = worst.max(oja / scale).max(eghr / scale);

        let near = WeightMatrix::new(w.matrix() + &random::uniform_matrix(rng, nu, nx, 1e-6))?;
        let oja = oja_update_closed(&near, cov)?.frobenius_norm();
        let eghr = eghr_update_closed(&near, cov)?.frobenius_norm();
        // ‖Ẇ_Oja‖ λ_min ≤ ‖Ẇ_EGHR‖ ≤ ‖Ẇ_Oja‖ λ_max.
        let low = relative_error((oja * cov.lambda_min() - eghr).max(0.0), eghr);
        let high = relative_error((eghr - oja * cov.lambda_max()).max(0.0), eghr);
        worst = worst.max(low).max(high);
    }
    Ok(CheckOutcome::worst_error(worst, ErrorKind::Relative, EXACT_TOLERANCE))
}

/// Stein's identity for every built-in test function on one batch. The
/// value is the largest discrepancy measured in standard errors.
pub fn stein_identity(cov: &CovarianceModel, n: usize, seed: u64) -> Result<CheckOutcome> {
    let batch = sample(cov, n, seed)?;
    let mut worst_z = 0.0f64;
    let mut all_passed = true;
    for f in builtin_test_functions(cov.dim()) {
        let out = stein_check_batch(&batch, f.as_ref());
        worst_z = worst_z.max(out.max_z);
        all_passed &= out.passed;
    }
    let mut outcome = CheckOutcome::worst_error(worst_z, ErrorKind::Absolute, STD_ERROR_BAND);
    outcome.passed &= all_passed;
    Ok(outcome)
}

/// A random `(W, x)` pair for the given covariance.
fn random_w_x<R: Rng>(rng: &mut R, cov: &CovarianceModel, nu: usize) -> Result<(WeightMatrix, Vec<f64>)> {
    let nx = cov.dim();
    let w = WeightMatrix::new(random::uniform_matrix(rng, nu, nx, 1.0))?;
    let z = random::gaussian_matrix(rng, nx, 1);
    let x = cov.chol().mul_vec(z.as_slice())?;
    Ok((w, x))
}

/// `max |(v, S⁻¹ξ) - g| / max(|g|, scale)` with `v = vec(Σ(I-WᵀW)Σ)`.
pub fn coefficient_identity<R: Rng>(rng: &mut R, cov: &CovarianceModel, nu: usize, count: usize) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let (w, x) = random_w_x(rng, cov, nu)?;
        worst = worst.max(coefficient_error(&w, &x, cov)?);
    }
    Ok(CheckOutcome::worst_error(worst, ErrorKind::Relative, EXACT_TOLERANCE))
}

pub fn coefficient_error(w: &WeightMatrix, x: &[f64], cov: &CovarianceModel) -> Result<f64> {
    let v = preconditioned_oja_target(w, cov)?;
    let coeff = frame_coefficient(&v, x, cov)?;
    let g = eghr_g(x, w, cov)?;
    let scale = global_factor_scale(x, w, cov)?.max(g.abs());
    Ok(relative_error((coeff - g).abs(), scale))
}

/// `max |(vec(½(I-WᵀW)), ξ) - (v, S⁻¹ξ)| / scale`.
pub fn cancellation_identity<R: Rng>(rng: &mut R, cov: &CovarianceModel, nu: usize, count: usize) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let (w, x) = random_w_x(rng, cov, nu)?;
        worst = worst.max(cancellation_error(&w, &x, cov)?);
    }
    Ok(CheckOutcome::worst_error(worst, ErrorKind::Relative, EXACT_TOLERANCE))
}

pub fn cancellation_error(w: &WeightMatrix, x: &[f64], cov: &CovarianceModel) -> Result<f64> {
    let v = preconditioned_oja_target(w, cov)?;
    let coeff = frame_coefficient(&v, x, cov)?;
    let cancel = cancellation_coefficient(w, x, cov)?;
    let scale = global_factor_scale(x, w, cov)?.max(coeff.abs());
    Ok(relative_error((cancel - coeff).abs(), scale))
}

/// Largest violation of `A|v|² ≤ (v, Sv) ≤ B|v|²` over random unit
/// `v ∈ vec(Sym)`, together with `B_tight ≤ E|ξ|²`.
pub fn frame_bounds_check<R: Rng>(rng: &mut R, cov: &CovarianceModel, count: usize) -> Result<CheckOutcome> {
    let op = frame_operator_analytic(cov);
    let b = frame_bounds(cov);
    let mut worst = (b.upper_tight - b.upper_moment).max(0.0);
    for _ in 0..count {
        let v = random::unit_symmetric_vec(rng, cov.dim());
        let q = op.quadratic_form(&v)?;
        worst = worst.max(b.lower - q).max(q - b.upper_tight);
    }
    Ok(CheckOutcome::worst_error(worst.max(0.0), ErrorKind::Absolute, FRAME_TOLERANCE))
}

/// `max ‖S vec(K)‖ / (‖S‖_F ‖K‖)` over random skew `K`.
pub fn kernel_annihilation<R: Rng>(rng: &mut R, cov: &CovarianceModel, count: usize) -> Result<CheckOutcome> {
    let op = frame_operator_analytic(cov);
    let s_norm = op.s.frobenius_norm();
    let mut worst = 0.0f64;
    if cov.dim() > 1 {
        for _ in 0..count {
            let k = random::unit_skew_vec(rng, cov.dim());
            worst = worst.max(norm(&op.apply(&k)?) / s_norm);
        }
    }
    Ok(CheckOutcome::worst_error(worst, ErrorKind::Relative, EXACT_TOLERANCE))
}

/// `max ‖S S⁻¹v - v‖ / ‖v‖` over random `v ∈ vec(Sym)`.
pub fn restricted_inverse_check<R: Rng>(rng: &mut R, cov: &CovarianceModel, count: usize) -> Result<CheckOutcome> {
    let op = frame_operator_analytic(cov);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let v = random::unit_symmetric_vec(rng, cov.dim());
        let back = op.apply(&restricted_inverse_apply(cov, &v)?)?;
        let diff: Vec<f64> = back.iter().zip(&v).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / norm(&v));
    }
    Ok(CheckOutcome::worst_error(worst, ErrorKind::Relative, FRAME_TOLERANCE))
}

/// `‖(E[(x⊗x)(x⊗x)ᵀ] - vec(Σ)vec(Σ)ᵀ) - (Σ⊗Σ)(I+T)‖ / ‖(Σ⊗Σ)(I+T)‖`, both
/// sides analytic and computed by independent routes.
pub fn isserlis_consistency(cov: &CovarianceModel) -> Result<CheckOutcome> {
    let vs = vectorize(cov.sigma())?;
    let centered = &isserlis_fourth_moment(cov) - &Matrix::outer(&vs, &vs);
    let s = frame_operator_analytic(cov).s;
    let err = relative_error((&centered - &s).frobenius_norm(), s.frobenius_norm());
    Ok(CheckOutcome::worst_error(err, ErrorKind::Relative, EXACT_TOLERANCE))
}

/// Relative Frobenius error of the empirical frame operator at `n` samples.
pub fn frame_operator_agreement(cov: &CovarianceModel, n: usize, seed: u64) -> Result<CheckOutcome> {
    let s = frame_operator_analytic(cov).s;
    let emp = frame_operator_empirical(&sample(cov, n, seed)?)?.s;
    let err = relative_error((&emp - &s).frobenius_norm(), s.frobenius_norm());
    Ok(CheckOutcome::worst_error(err, ErrorKind::Relative, MONTE_CARLO_TOLERANCE))
}

/// Which Monte-Carlo estimator a rate ladder measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    OjaUpdate,
    EghrUpdate,
    FrameOperator,
    Reconstruction,
}

/// Relative error of one estimator on one batch against its closed form.
pub fn estimator_error(estimator: Estimator, w: &WeightMatrix, cov: &CovarianceModel, n: usize, seed: u64) -> Result<f64> {
    let batch = sample(cov, n, seed)?;
    let (est, exact): (Matrix, Matrix) = match estimator {
        Estimator::OjaUpdate => (oja_update_empirical(w, &batch)?, oja_update_closed(w, cov)?),
        Estimator::EghrUpdate => (eghr_update_empirical(w, &batch, GlobalMean::Batch)?, eghr_update_closed(w, cov)?),
        Estimator::FrameOperator => (frame_operator_empirical(&batch)?.s, frame_operator_analytic(cov).s),
        Estimator::Reconstruction => {
            let v = preconditioned_oja_target(w, cov)?;
            let rec = frame_expansion_reconstruct(&v, &batch)?;
            let len = v.len();
            (Matrix::new(1, len, rec)?, Matrix::new(1, len, v)?)
        }
    };
    Ok(relative_error((&est - &exact).frobenius_norm(), exact.frobenius_norm()))
}

/// Root-mean-square error over [`RATE_REPLICATES`] batches at each size.
pub fn error_ladder(estimator: Estimator, w: &WeightMatrix, cov: &CovarianceModel, sizes: &[usize], seed: u64) -> Result<Vec<f64>> {
    sizes
        .iter()
        .enumerate()
        .map(|(level, &n)| {
            let mut sq = 0.0;
            for rep in 0..RATE_REPLICATES {
                let s = derive_seed(seed, (level * RATE_REPLICATES + rep) as u64);
                let e = estimator_error(estimator, w, cov, n, s)?;
                sq += e * e;
            }
            Ok(libm::sqrt(sq / RATE_REPLICATES as f64))
        })
        .collect()
}

/// Fitted log-log slope of the error ladder, compared with `-1/2`.
pub fn convergence_rate(estimator: Estimator, w: &WeightMatrix, cov: &CovarianceModel, sizes: &[usize], seed: u64) -> Result<CheckOutcome> {
    let errs = error_ladder(estimator, w, cov, sizes, seed)?;
    let ns: Vec<f64> = sizes.iter().map(|n| *n as f64).collect();
    let slope = loglog_slope(&ns, &errs).unwrap_or(f64::NAN);
    Ok(slope_outcome(slope))
}

pub fn slope_outcome(slope: f64) -> CheckOutcome {
    let abs_error = (slope - SLOPE_REFERENCE).abs();
    CheckOutcome {
        value: slope,
        reference: SLOPE_REFERENCE,
        abs_error,
        rel_error: abs_error / SLOPE_REFERENCE.abs(),
        tolerance: SLOPE_TOLERANCE,
        kind: ErrorKind::Absolute,
        passed: abs_error <= SLOPE_TOLERANCE,
    }
}

/// Decades `10³, 10⁴, …` up to and including `max_n` (at least two sizes).
pub fn decade_sizes(max_n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = 1000;
    while n <= max_n {
        out.push(n);
        n *= 10;
    }
    if out.len() < 2 {
        out = alloc::vec![100, 1000];
    }
    out
}

/// The exact half of the derivation check: the frame-expansion path and the
/// direct EGHR batch update agree term by term.
pub fn derivation_exact(w: &WeightMatrix, cov: &CovarianceModel, n: usize, seed: u64) -> Result<CheckOutcome> {
    let report = derive_eghr_from_oja(w, &sample(cov, n, seed)?)?;
    let err = report.path_error.max(report.offset_identity_error);
    Ok(CheckOutcome::worst_error(err, ErrorKind::Relative, EXACT_TOLERANCE))
}

/// The Monte-Carlo half: the expansion path against `Ẇ_Oja Σ`.
pub fn derivation_monte_carlo(w: &WeightMatrix, cov: &CovarianceModel, n: usize, seed: u64) -> Result<CheckOutcome> {
    let report = derive_eghr_from_oja(w, &sample(cov, n, seed)?)?;
    Ok(CheckOutcome::worst_error(report.monte_carlo_error, ErrorKind::Relative, MONTE_CARLO_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_pass_rule() {
        let o = CheckOutcome::worst_error(1e-13, ErrorKind::Relative, 1e-12);
        assert!(o.passed && o.error() == 1e-13);
        let o = CheckOutcome::worst_error(f64::NAN, ErrorKind::Absolute, 1.0);
        assert!(!o.passed);
        assert!(slope_outcome(-0.6).passed);
        assert!(!slope_outcome(-0.3).passed);
        assert!(!slope_outcome(f64::NAN).passed);
    }

    #[test]
    fn decades() {
        assert_eq!(decade_sizes(1_000_000), [1000, 10_000, 100_000, 1_000_000]);
        assert_eq!(decade_sizes(50_000), [1000, 10_000]);
        assert_eq!(decade_sizes(10), [100, 1000]);
    }
}
