use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("covariance is degenerate: eigenvalue {min_eigenvalue:e} against largest {max_eigenvalue:e}")]
    Degenerate {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("vector is outside vec(Sym): skew component {skew_norm:e} exceeds {tolerance:e}")]
    NotInSymmetricSubspace { skew_norm: f64, tolerance: f64 },

    #[error("weight matrix is rank deficient; its row space has dimension below {nu}")]
    RankDeficient { nu: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("training diverged at step {step} (|W|_F = {norm:e})")]
    Diverged { step: usize, norm: f64 },
}
