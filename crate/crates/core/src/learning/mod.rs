//! Oja's subspace rule and EGHR-PCA: closed-form and batch updates, the
//! global factor, an Euler trainer, and subspace-quality metrics.

mod metrics;
mod rules;
mod train;

pub use metrics::{orthonormality_residual, row_space_projector, subspace_error};
pub use rules::{
    eghr_factors, eghr_g, eghr_g_empirical, eghr_update_closed, eghr_update_empirical, expected_norm_gap,
    gated_hebbian_mean, global_factor_scale, oja_update_closed, oja_update_empirical, GlobalMean, NormMeans, WeightMatrix,
};
pub use train::{train, Mode, Rule, Trajectory, TrajectoryPoint, TrainerConfig, DIVERGENCE_NORM};
