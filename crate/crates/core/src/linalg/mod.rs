//! Small dense linear algebra: the matrix type, vectorization and Kronecker
//! machinery, and the SPD covariance model built on Cholesky and Jacobi.

mod covariance;
mod decomp;
mod matrix;
mod ops;

pub use covariance::{CovarianceModel, DEGENERACY_RATIO, SYMMETRY_TOLERANCE};
pub use decomp::{cholesky, cholesky_inverse, symmetric_eigen};
pub use matrix::Matrix;
pub use ops::{commutation_matrix, commute_vec, dot, frobenius_inner, kron, norm, skew_part, sym_part, unvec, vec};
