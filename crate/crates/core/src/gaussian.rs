//! Seeded zero-mean Gaussian sampling and numerical checks of the two
//! Gaussian identities the learning-rule algebra relies on: Stein's
//! integration by parts and Isserlis' fourth-moment formula.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{CovarianceModel, Matrix};
use crate::stats::{VecAccumulator, Welford};

/// Samples per generator stream. Chunk `c` of a batch always comes from
/// stream `c` of the seeded generator, so a batch can be produced in any
/// order or split across workers without changing a single bit.
pub const CHUNK: usize = 4096;

/// Width of the acceptance band, in standard errors.
pub const STD_ERROR_BAND: f64 = 4.0;

/// `n` i.i.d. draws of `x ~ N(0, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    data: Vec<f64>,
    seed: u64,
    covariance: CovarianceModel,
}

impl SampleBatch {
    /// Wraps explicit samples. Mainly useful for tests and hand-built cases.
    pub fn from_samples(covariance: &CovarianceModel, samples: &[Vec<f64>]) -> Result<Self> {
        let dim = covariance.dim();
        if samples.is_empty() {
            return Err(Error::Dimension("a batch needs at least one sample"));
        }
        if samples.iter().any(|s| s.len() != dim) {
            return Err(Error::Dimension("sample length does not match covariance"));
        }
        let data: Vec<f64> = samples.iter().flatten().copied().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            dim,
            data,
            seed: 0,
            covariance: covariance.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn covariance(&self) -> &CovarianceModel {
        &self.covariance
    }

    pub fn sample(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Mixes a base seed with an index (splitmix64 finalizer), for deriving
/// independent per-step or per-replicate seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` samples `x = L z` with `z` standard normal.
pub fn sample(cov: &CovarianceModel, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be at least 1"));
    }
    let dim = cov.dim();
    let l = cov.chol();
    let mut data = vec![0.0; n * dim];
    let mut z = vec![0.0; dim];
    for (c, chunk) in data.chunks_mut(CHUNK * dim).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        for x in chunk.chunks_exact_mut(dim) {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(&mut rng);
            }
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = (0..=i).map(|k| l[(i, k)] * z[k]).sum();
            }
        }
    }
    Ok(SampleBatch {
        dim,
        data,
        seed,
        covariance: cov.clone(),
    })
}

/// `(1/n) Σ_k x_k x_kᵀ`.
pub fn empirical_mean_outer(batch: &SampleBatch) -> Matrix {
    let d = batch.dim();
    let mut acc = VecAccumulator::new(d * d);
    for x in batch.iter() {
        for i in 0..d {
            for j in 0..d {
                acc.add_at(i * d + j, x[i] * x[j]);
            }
        }
    }
    let mean = acc.mean(batch.len());
    Matrix::from_fn(d, d, |i, j| if i <= j { mean[i * d + j] } else { mean[j * d + i] })
}

/// Analytic `E[(x ⊗ x)(x ⊗ x)ᵀ]` from Isserlis' pairing formula
/// `E[x_i x_j x_k x_l] = Σ_ij Σ_kl + Σ_ik Σ_jl + Σ_il Σ_jk`.
pub fn isserlis_fourth_moment(cov: &CovarianceModel) -> Matrix {
    let n = cov.dim();
    let s = cov.sigma();
    Matrix::from_fn(n * n, n * n, |p, q| {
        let (i, j) = (p / n, p % n);
        let (k, l) = (q / n, q % n);
        s[(i, j)] * s[(k, l)] + s[(i, k)] * s[(j, l)] + s[(i, l)] * s[(j, k)]
    })
}

/// Monte-Carlo estimate of `E[(x ⊗ x)(x ⊗ x)ᵀ]`.
pub fn empirical_fourth_moment(batch: &SampleBatch) -> Matrix {
    let n = batch.dim();
    let m = n * n;
    let mut acc = VecAccumulator::new(m * m);
    let mut xx = vec![0.0; m];
    for x in batch.iter() {
        for i in 0..n {
            for j in 0..n {
                xx[i * n + j] = x[i] * x[j];
            }
        }
        for p in 0..m {
            for q in 0..m {
                acc.add_at(p * m + q, xx[p] * xx[q]);
            }
        }
    }
    let mean = acc.mean(batch.len());
    Matrix::from_fn(m, m, |p, q| mean[p * m + q])
}

/// A smooth scalar function with a gradient.
pub trait TestFunction {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    fn name(&self) -> &str {
        "f"
    }
}

/// `Π_a x_a^{p_a}` with its analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    powers: Vec<u32>,
    name: alloc::string::String,
}

impl Monomial {
    pub fn new(powers: Vec<u32>) -> Self {
        use core::fmt::Write;
        let mut name = alloc::string::String::new();
        for (a, p) in powers.iter().enumerate() {
            match p {
                0 => {}
                1 => {
                    let _ = write!(name, "x{}", a + 1);
                }
                _ => {
                    let _ = write!(name, "x{}^{}", a + 1, p);
                }
            }
        }
        if name.is_empty() {
            name.push('1');
        }
        Self { powers, name }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }
}

fn powi(x: f64, p: u32) -> f64 {
    (0..p).fold(1.0, |acc, _| acc * x)
}

impl TestFunction for Monomial {
    fn value(&self, x: &[f64]) -> f64 {
        self.powers.iter().zip(x).map(|(p, xi)| powi(*xi, *p)).product()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (a, g) in out.iter_mut().enumerate() {
            let pa = self.powers[a];
            *g = if pa == 0 {
                0.0
            } else {
                self.powers
                    .iter()
                    .zip(x)
                    .enumerate()
                    .map(|(b, (p, xb))| if b == a { pa as f64 * powi(*xb, pa - 1) } else { powi(*xb, *p) })
                    .product()
            };
        }
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Wraps a plain function and differentiates it by central differences
/// with step `cbrt(ε) * max(1, |x_a|)`.
pub struct FiniteDifference<F> {
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FiniteDifference<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Fn(&[f64]) -> f64> TestFunction for FiniteDifference<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let base = libm::cbrt(f64::EPSILON);
        let mut probe = x.to_vec();
        for (a, g) in out.iter_mut().enumerate() {
            let h = base * x[a].abs().max(1.0);
            probe[a] = x[a] + h;
            let up = (self.f)(&probe);
            probe[a] = x[a] - h;
            let down = (self.f)(&probe);
            probe[a] = x[a];
            *g = (up - down) / (2.0 * h);
        }
    }

    fn name(&self) -> &str {
        "finite-difference"
    }
}

/// The built-in polynomial test functions for dimension `nx`: the constant,
/// every linear monomial, and a spread of quadratic and cubic ones.
pub fn builtin_test_functions(nx: usize) -> Vec<Box<dyn TestFunction>> {
    let mono = |entries: &[(usize, u32)]| {
        let mut p = vec![0; nx];
        for (a, e) in entries {
            p[*a] += e;
        }
        Box::new(Monomial::new(p)) as Box<dyn TestFunction>
    };
    let last = nx - 1;
    let mut out = vec![mono(&[])];
    for a in 0..nx {
        out.push(mono(&[(a, 1)]));
    }
    out.push(mono(&[(0, 2)]));
    out.push(mono(&[(0, 3)]));
    if nx > 1 {
        out.push(mono(&[(0, 1), (last, 1)]));
        out.push(mono(&[(last, 2)]));
        out.push(mono(&[(0, 2), (last, 1)]));
    }
    if nx > 2 {
        out.push(mono(&[(0, 1), (1, 1), (2, 1)]));
    }
    out
}

/// Result of comparing `E[f(x) x_i]` with `Σ_a Σ_ia E[∂_a f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinOutcome {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Standard error of `lhs_i - rhs_i`, from the paired per-sample differences.
    pub std_error: Vec<f64>,
    pub max_abs_discrepancy: f64,
    /// Largest `|lhs_i - rhs_i| / std_error_i`.
    pub max_z: f64,
    pub passed: bool,
}

/// Stein's identity checked on a given batch.
pub fn stein_check_batch(batch: &SampleBatch, f: &dyn TestFunction) -> SteinOutcome {
    let d = batch.dim();
    let sigma = batch.covariance().sigma();
    let mut grad = vec![0.0; d];
    let mut lhs = vec![Welford::default(); d];
    let mut rhs = vec![Welford::default(); d];
    let mut diff = vec![Welford::default(); d];
    for x in batch.iter() {
        let fx = f.value(x);
        f.gradient(x, &mut grad);
        for i in 0..d {
            let l = fx * x[i];
            let r: f64 = (0..d).map(|a| sigma[(i, a)] * grad[a]).sum();
            lhs[i].push(l);
            rhs[i].push(r);
            diff[i].push(l - r);
        }
    }
    let mut max_abs = 0.0f64;
    let mut max_z = 0.0f64;
    let mut passed = true;
    let std_error: Vec<f64> = diff.iter().map(Welford::std_error).collect();
    for i in 0..d {
        let disc = diff[i].mean().abs();
        max_abs = max_abs.max(disc);
        let se = std_error[i];
        if se > 0.0 {
            let z = disc / se;
            max_z = max_z.max(z);
            passed &= z <= STD_ERROR_BAND;
        } else {
            passed &= disc <= 1e-12;
        }
    }
    SteinOutcome {
        lhs: lhs.iter().map(Welford::mean).collect(),
        rhs: rhs.iter().map(Welford::mean).collect(),
        std_error,
        max_abs_discrepancy: max_abs,
        max_z,
        passed,
    }
}

/// Draws a fresh batch and runs [`stein_check_batch`].
pub fn stein_check(cov: &CovarianceModel, f: &dyn TestFunction, n: usize, seed: u64) -> Result<SteinOutcome> {
    let batch = sample(cov, n, seed)?;
    Ok(stein_check_batch(&batch, f))
}
