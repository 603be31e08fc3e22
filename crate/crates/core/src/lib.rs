//! Oja's subspace rule and the error-gated Hebbian rule for PCA (EGHR-PCA),
//! together with the frame machinery on vectorized symmetric matrices that
//! turns the first rule into the second.
//!
//! The crate is `no_std` and only needs `alloc`. Enable the `std` feature to
//! get `std::error::Error` on [`Error`].

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod checks;
mod error;
pub mod frame;
pub mod gaussian;
pub mod learning;
pub mod linalg;
pub mod random;
pub mod stats;

pub use error::{Error, Result};
pub use frame::{DerivationReport, FrameBounds, FrameOperator, FrameVector};
pub use gaussian::SampleBatch;
pub use learning::{Mode, Rule, Trajectory, TrainerConfig, WeightMatrix};
pub use linalg::{CovarianceModel, Matrix};
