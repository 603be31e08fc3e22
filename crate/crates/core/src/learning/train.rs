use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gaussian::{derive_seed, sample};
use crate::linalg::{CovarianceModel, Matrix};

use super::metrics::{orthonormality_residual, subspace_error};
use super::rules::{eghr_update_closed, eghr_update_empirical, oja_update_closed, oja_update_empirical, GlobalMean};
use super::WeightMatrix;

/// Abort threshold on `‖W‖_F`.
pub const DIVERGENCE_NORM: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Oja,
    Eghr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Expected updates evaluated in closed form.
    Closed,
    /// Updates averaged over a fresh seeded batch each step.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub steps: usize,
    /// Samples per step in empirical mode; ignored in closed mode.
    pub batch_size: usize,
    pub record_every: usize,
    pub seed: u64,
}

impl TrainerConfig {
    /// Defaults for closed-form flows: `η = 0.02`.
    pub fn closed(steps: usize) -> Self {
        Self {
            learning_rate: 0.02,
            steps,
            batch_size: 0,
            record_every: 1,
            seed: 0,
        }
    }

    /// Defaults for batch flows: `η = 0.002`, 100 samples per step.
    pub fn empirical(steps: usize, seed: u64) -> Self {
        Self {
            learning_rate: 0.002,
            steps,
            batch_size: 100,
            record_every: 1,
            seed,
        }
    }

    pub fn validate(&self, mode: Mode) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning rate must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1"));
        }
        if mode == Mode::Empirical && self.batch_size == 0 {
            return Err(Error::InvalidConfig("empirical mode needs batch_size >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub w: WeightMatrix,
    /// `None` while `W` is rank deficient.
    pub subspace_error: Option<f64>,
    pub orthonormality_residual: f64,
    /// `‖ΔW‖_F / η` of the update taken from this point.
    pub update_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    pub fn final_weights(&self) -> Option<&WeightMatrix> {
        self.points.last().map(|p| &p.w)
    }
}

fn update(rule: Rule, mode: Mode, w: &WeightMatrix, cov: &CovarianceModel, cfg: &TrainerConfig, step: usize) -> Result<Matrix> {
    match mode {
        Mode::Closed => match rule {
            Rule::Oja => oja_update_closed(w, cov),
            Rule::Eghr => eghr_update_closed(w, cov),
        },
        Mode::Empirical => {
            let batch = sample(cov, cfg.batch_size, derive_seed(cfg.seed, step as u64))?;
            match rule {
                Rule::Oja => oja_update_empirical(w, &batch),
                Rule::Eghr => eghr_update_empirical(w, &batch, GlobalMean::Batch),
            }
        }
    }
}

/// Explicit Euler integration `W ← W + η ΔW` of the chosen flow.
///
/// Records step 0, every `record_every` steps, and the final step.
pub fn train(rule: Rule, mode: Mode, w0: &WeightMatrix, cov: &CovarianceModel, cfg: &TrainerConfig) -> Result<Trajectory> {
    cfg.validate(mode)?;
    if cov.dim() != w0.nx() {
        return Err(Error::Dimension("covariance dimension differs from W columns"));
    }
    let mut traj = Trajectory::default();
    let mut w = w0.clone();
    for step in 0..=cfg.steps {
        let delta = update(rule, mode, &w, cov, cfg, step)?;
        if step % cfg.record_every == 0 || step == cfg.steps {
            traj.points.push(TrajectoryPoint {
                step,
                w: w.clone(),
                subspace_error: subspace_error(&w, cov).ok(),
                orthonormality_residual: orthonormality_residual(&w),
                update_norm: delta.frobenius_norm(),
            });
        }
        if step == cfg.steps {
            break;
        }
        let next = w.matrix() + &delta.scale(cfg.learning_rate);
        let norm = next.frobenius_norm();
        if !next.is_finite() || norm > DIVERGENCE_NORM {
            return Err(Error::Diverged { step: step + 1, norm });
        }
        w = WeightMatrix::new(next)?;
    }
    Ok(traj)
}
