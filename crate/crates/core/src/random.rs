//! Seeded random instances: orthogonal bases, SPD covariances, weight
//! matrices and unit vectors in `vec(Sym)` or `vec(Skew)`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, skew_part, sym_part, vec as vectorize, CovarianceModel, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-ish orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn orthogonal<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    loop {
        let g = gaussian_matrix(rng, n, n);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut c: Vec<f64> = (0..n).map(|i| g[(i, j)]).collect();
            // Two passes keep the basis orthogonal to machine precision.
            for _ in 0..2 {
                for q in &cols {
                    let p = dot(&c, q);
                    c.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
                }
            }
            let nc = norm(&c);
            if nc < 1e-8 {
                ok = false;
                break;
            }
            c.iter_mut().for_each(|a| *a /= nc);
            cols.push(c);
        }
        if ok {
            return Matrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// `Q diag(λ) Qᵀ` with `λ` uniform in `[lo, hi]`.
pub fn spd<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Result<CovarianceModel> {
    if !(lo > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidConfig("eigenvalue range must satisfy 0 < lo <= hi"));
    }
    let q = orthogonal(rng, n);
    let eig: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    CovarianceModel::from_spectrum(&q, &eig)
}

/// Entries uniform in `[-scale, scale]`.
pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..=scale))
}

/// Unit vector in `vec(Sym)` for `n x n` matrices.
pub fn unit_symmetric_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let s = sym_part(&gaussian_matrix(rng, n, n)).expect("square");
    normalized(vectorize(&s).expect("square"))
}

/// Unit vector in `vec(Skew)`; `n` must be at least 2.
pub fn unit_skew_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let k = skew_part(&gaussian_matrix(rng, n, n)).expect("square");
    normalized(vectorize(&k).expect("square"))
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let nv = norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    v
}
