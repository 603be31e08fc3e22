//! Summation and regression helpers shared by the Monte-Carlo checks.

use alloc::vec;
use alloc::vec::Vec;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Entrywise compensated accumulator for fixed-length vectors.
#[derive(Debug, Clone)]
pub struct VecAccumulator {
    parts: Vec<CompensatedSum>,
}

impl VecAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            parts: vec![CompensatedSum::default(); len],
        }
    }

    /// Adds `weight * v`.
    pub fn add_scaled(&mut self, weight: f64, v: &[f64]) {
        debug_assert_eq!(v.len(), self.parts.len());
        for (p, x) in self.parts.iter_mut().zip(v) {
            p.add(weight * x);
        }
    }

    pub fn add_at(&mut self, idx: usize, v: f64) {
        self.parts[idx].add(v);
    }

    pub fn mean(&self, n: usize) -> Vec<f64> {
        let inv = 1.0 / n as f64;
        self.parts.iter().map(|p| p.value() * inv).collect()
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two points.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.n as f64)
        }
    }
}

/// Least-squares slope of `ln(err)` against `ln(n)`.
///
/// Returns `None` with fewer than two points or any non-positive value.
pub fn loglog_slope(ns: &[f64], errs: &[f64]) -> Option<f64> {
    if ns.len() != errs.len() || ns.len() < 2 {
        return None;
    }
    if ns.iter().chain(errs).any(|v| !(*v > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = ns.iter().map(|v| libm::log(*v)).collect();
    let ys: Vec<f64> = errs.iter().map(|v| libm::log(*v)).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// `|computed - reference| / |reference|`, falling back to the absolute
/// error when the reference is exactly zero.
pub fn relative_error(err_norm: f64, ref_norm: f64) -> f64 {
    if ref_norm > 0.0 {
        err_norm / ref_norm
    } else {
        err_norm
    }
}
