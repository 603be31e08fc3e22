//! Sampling-based checks. Bands are four standard errors estimated from the
//! per-sample terms, computed here independently of the library estimators.

use frame_hebb_core::checks::{self, Estimator};
use frame_hebb_core::frame::{
    derive_eghr_from_oja, frame_expansion_reconstruct, frame_operator_analytic, frame_operator_empirical, frame_vector,
    preconditioned_oja_target,
};
use frame_hebb_core::gaussian::{
    builtin_test_functions, empirical_fourth_moment, empirical_mean_outer, isserlis_fourth_moment, sample, stein_check,
    FiniteDifference, Monomial, SampleBatch,
};
use frame_hebb_core::learning::{
    eghr_g, eghr_update_closed, eghr_update_empirical, oja_update_closed, oja_update_empirical, GlobalMean,
    WeightMatrix,
};
use frame_hebb_core::linalg::{norm, CovarianceModel, Matrix};
use frame_hebb_core::random;

fn diag(d: &[f64]) -> CovarianceModel {
    CovarianceModel::new(Matrix::from_diagonal(d)).unwrap()
}

/// Per-entry mean and standard error of a per-sample matrix-valued term.
fn mean_and_se(batch: &SampleBatch, len: usize, term: impl Fn(&[f64]) -> Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len() as f64;
    let mut s1 = vec![0.0; len];
    let mut s2 = vec![0.0; len];
    for x in batch.iter() {
        for (i, t) in term(x).into_iter().enumerate() {
            s1[i] += t;
            s2[i] += t * t;
        }
    }
    let mean: Vec<f64> = s1.iter().map(|s| s / n).collect();
    let se = s2
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q / n - m * m) * n / (n - 1.0)).max(0.0).sqrt() / n.sqrt())
        .collect();
    (mean, se)
}

fn assert_within_band(estimate: &[f64], exact: &[f64], se: &[f64]) {
    for ((e, x), s) in estimate.iter().zip(exact).zip(se) {
        assert!((e - x).abs() <= 4.0 * s + 1e-12, "{e} vs {x} (se {s})");
    }
}

#[test]
fn sample_moments() {
    let batch = sample(&diag(&[1.0, 1.0]), 100_000, 1).unwrap();
    let mean: Vec<f64> = (0..2).map(|i| batch.iter().map(|x| x[i]).sum::<f64>() / 1e5).collect();
    assert!(mean.iter().all(|m| m.abs() < 4.0 / 1e5f64.sqrt()), "{mean:?}");

    let cov = diag(&[4.0, 1.0]);
    let emp = empirical_mean_outer(&sample(&cov, 100_000, 2).unwrap());
    assert!((&emp - cov.sigma()).frobenius_norm() <= 0.05 * cov.sigma().frobenius_norm());

    let id3 = diag(&[1.0, 1.0, 1.0]);
    let emp = empirical_mean_outer(&sample(&id3, 100_000, 3).unwrap());
    assert!((&emp - id3.sigma()).frobenius_norm() <= 0.05 * 3f64.sqrt());
}

#[test]
fn stein_examples() {
    let cov = diag(&[2.0, 1.0]);
    let x1sq = Monomial::new(vec![2, 0]);
    let out = stein_check(&cov, &x1sq, 100_000, 4).unwrap();
    assert!(out.passed, "{out:?}");
    // Both sides estimate zero: E[x1³] = 0 and Σ11 E[2 x1] = 0.
    assert!(out.lhs[0].abs() < 4.0 * 0.05 && out.rhs[0].abs() < 4.0 * 0.05);

    let constant = Monomial::new(vec![0, 0]);
    let out = stein_check(&cov, &constant, 100_000, 5).unwrap();
    assert!(out.passed && out.rhs == vec![0.0, 0.0]);

    let linear = Monomial::new(vec![0, 1]);
    let out = stein_check(&cov, &linear, 100_000, 6).unwrap();
    assert!(out.passed);
    assert_eq!(out.rhs, vec![0.0, 1.0]);
}

#[test]
fn stein_builtins_on_random_covariances() {
    for (k, nx) in [1usize, 2, 4].into_iter().enumerate() {
        let cov = random::spd(&mut random::rng(40 + k as u64), nx, 0.3, 3.0).unwrap();
        let batch = sample(&cov, 100_000, 41 + k as u64).unwrap();
        for f in builtin_test_functions(nx) {
            let out = frame_hebb_core::gaussian::stein_check_batch(&batch, f.as_ref());
            assert!(out.passed, "nx={nx} f={} z={}", f.name(), out.max_z);
        }
    }
}

#[test]
fn stein_with_finite_difference_gradient() {
    let cov = random::spd(&mut random::rng(50), 2, 0.5, 2.0).unwrap();
    let f = FiniteDifference::new(|x: &[f64]| (0.5 * x[0]).sin() + x[1] * x[1] * x[0]);
    let out = stein_check(&cov, &f, 100_000, 51).unwrap();
    assert!(out.passed, "{out:?}");
}

#[test]
fn isserlis_against_monte_carlo() {
    let cov = diag(&[2.0, 1.0]);
    let analytic = isserlis_fourth_moment(&cov);
    let emp = empirical_fourth_moment(&sample(&cov, 1_000_000, 7).unwrap());
    let top = analytic.max_abs();
    for i in 0..4 {
        for j in 0..4 {
            let a = analytic[(i, j)];
            let tol = if a != 0.0 { 0.05 * a.abs() } else { 0.05 * top };
            assert!((emp[(i, j)] - a).abs() <= tol, "({i},{j}) {} vs {a}", emp[(i, j)]);
        }
    }
    let id = diag(&[1.0, 1.0]);
    let t = frame_hebb_core::linalg::commutation_matrix(2);
    let vi = [1.0, 0.0, 0.0, 1.0];
    let expected = &(&Matrix::identity(4) + &t) + &Matrix::outer(&vi, &vi);
    assert_eq!(isserlis_fourth_moment(&id), expected);
}

#[test]
fn oja_empirical_within_band() {
    let cov = diag(&[2.0, 1.0]);
    let w = WeightMatrix::new(random::uniform_matrix(&mut random::rng(8), 1, 2, 1.0)).unwrap();
    let batch = sample(&cov, 100_000, 9).unwrap();
    let m = w.matrix().clone();
    let (_, se) = mean_and_se(&batch, 2, |x| {
        let u = m.row(0)[0] * x[0] + m.row(0)[1] * x[1];
        vec![u * (x[0] - m.row(0)[0] * u), u * (x[1] - m.row(0)[1] * u)]
    });
    let est = oja_update_empirical(&w, &batch).unwrap();
    let exact = oja_update_closed(&w, &cov).unwrap();
    assert_within_band(est.as_slice(), exact.as_slice(), &se);
}

#[test]
fn eghr_empirical_within_band() {
    let cov = diag(&[2.0, 1.0]);
    let w = WeightMatrix::new(random::uniform_matrix(&mut random::rng(10), 1, 2, 1.0)).unwrap();
    let batch = sample(&cov, 1_000_000, 11).unwrap();
    let m = w.matrix().clone();
    let (_, se) = mean_and_se(&batch, 2, |x| {
        let u = m.row(0)[0] * x[0] + m.row(0)[1] * x[1];
        let g = eghr_g(x, &w, &cov).unwrap();
        vec![g * u * x[0], g * u * x[1]]
    });
    let exact = eghr_update_closed(&w, &cov).unwrap();
    let closed_mean = eghr_update_empirical(&w, &batch, GlobalMean::ClosedForm).unwrap();
    assert_within_band(closed_mean.as_slice(), exact.as_slice(), &se);
    let batch_mean = eghr_update_empirical(&w, &batch, GlobalMean::Batch).unwrap();
    assert_within_band(batch_mean.as_slice(), exact.as_slice(), &se);
}

#[test]
fn frame_vectors_have_zero_mean() {
    let cov = diag(&[2.0, 1.0]);
    let batch = sample(&cov, 1_000_000, 12).unwrap();
    let (mean, se) = mean_and_se(&batch, 4, |x| frame_vector(x, &cov).unwrap().xi);
    assert_within_band(&mean, &[0.0; 4], &se);
}

#[test]
fn empirical_frame_operator() {
    let cov = diag(&[2.0, 1.0]);
    let batch = sample(&cov, 1_000_000, 13).unwrap();
    let emp = frame_operator_empirical(&batch).unwrap();
    let exact = frame_operator_analytic(&cov).s;
    assert!((&emp.s - &exact).frobenius_norm() <= 0.05 * exact.frobenius_norm());
    // Pointwise (vec K, ξ) = 0, so skew directions are annihilated exactly.
    let k = [0.0, 1.0, -1.0, 0.0];
    assert!(norm(&emp.apply(&k).unwrap()) == 0.0);
}

#[test]
fn reconstruction_and_derivation() {
    let cov = diag(&[2.0, 1.0]);
    let w = WeightMatrix::new(random::uniform_matrix(&mut random::rng(14), 1, 2, 1.0)).unwrap();
    let batch = sample(&cov, 1_000_000, 15).unwrap();
    let v = preconditioned_oja_target(&w, &cov).unwrap();
    let rec = frame_expansion_reconstruct(&v, &batch).unwrap();
    let diff: Vec<f64> = rec.iter().zip(&v).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) <= 0.05 * norm(&v));

    let rep = derive_eghr_from_oja(&w, &batch).unwrap();
    assert!(rep.path_error <= 1e-12, "{}", rep.path_error);
    assert!(rep.offset_identity_error <= 1e-12, "{}", rep.offset_identity_error);
    assert!(rep.monte_carlo_error <= 0.05, "{}", rep.monte_carlo_error);
}

#[test]
fn rates_on_a_short_ladder() {
    let cov = diag(&[2.0, 1.0]);
    let w = WeightMatrix::new(random::uniform_matrix(&mut random::rng(16), 1, 2, 1.0)).unwrap();
    let sizes = [1000, 10_000, 100_000];
    for est in [Estimator::OjaUpdate, Estimator::EghrUpdate, Estimator::FrameOperator, Estimator::Reconstruction] {
        let o = checks::convergence_rate(est, &w, &cov, &sizes, 17).unwrap();
        assert!(o.passed, "{est:?}: slope {}", o.value);
    }
}
