//! Vectorization, Kronecker products, the commutation matrix and the
//! symmetric/skew split.
//!
//! `vec` stacks columns: `vec(X)[j * n + i] = X[i, j]` (0-based), which makes
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)` hold with the standard Kronecker product.

use alloc::vec::Vec;

use super::Matrix;
use crate::error::{Error, Result};

pub fn vec(x: &Matrix) -> Result<Vec<f64>> {
    if !x.is_square() {
        return Err(Error::Dimension("vec expects a square matrix"));
    }
    let n = x.rows();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push(x[(i, j)]);
        }
    }
    Ok(out)
}

pub fn unvec(v: &[f64], n: usize) -> Result<Matrix> {
    if n == 0 || v.len() != n * n {
        return Err(Error::Dimension("unvec expects a vector of length n^2"));
    }
    Ok(Matrix::from_fn(n, n, |i, j| v[j * n + i]))
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Matrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Permutation `T` with `T vec(X) = vec(Xᵀ)` for every `n x n` matrix `X`.
pub fn commutation_matrix(n: usize) -> Matrix {
    let mut t = Matrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            // X[i,j] sits at j*n+i in vec(X) and at i*n+j in vec(Xᵀ).
            t[(i * n + j, j * n + i)] = 1.0;
        }
    }
    t
}

/// Applies the commutation permutation without materializing it.
pub fn commute_vec(v: &[f64], n: usize) -> Result<Vec<f64>> {
    if v.len() != n * n {
        return Err(Error::Dimension("commute_vec expects a vector of length n^2"));
    }
    let mut out = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = v[j * n + i];
        }
    }
    Ok(out)
}

pub fn sym_part(x: &Matrix) -> Result<Matrix> {
    if !x.is_square() {
        return Err(Error::Dimension("sym_part expects a square matrix"));
    }
    Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| 0.5 * (x[(i, j)] + x[(j, i)])))
}

pub fn skew_part(x: &Matrix) -> Result<Matrix> {
    if !x.is_square() {
        return Err(Error::Dimension("skew_part expects a square matrix"));
    }
    Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| 0.5 * (x[(i, j)] - x[(j, i)])))
}

pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension("frobenius_inner expects equal shapes"));
    }
    Ok(dot(a.as_slice(), b.as_slice()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m22() -> Matrix {
        Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()
    }

    #[test]
    fn vec_stacks_columns() {
        assert_eq!(vec(&m22()).unwrap(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(vec(&Matrix::identity(2)).unwrap(), vec![1.0, 0.0, 0.0, 1.0]);
        assert!(vec(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn unvec_inverts_vec() {
        assert_eq!(unvec(&[1.0, 3.0, 2.0, 4.0], 2).unwrap(), m22());
        assert_eq!(unvec(&[0.0; 9], 3).unwrap(), Matrix::zeros(3, 3));
        assert!(unvec(&[1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn kron_small_cases() {
        assert_eq!(kron(&Matrix::identity(2), &Matrix::identity(2)), Matrix::identity(4));
        let six = kron(&Matrix::from_rows(&[[2.0]]).unwrap(), &Matrix::from_rows(&[[3.0]]).unwrap());
        assert_eq!(six, Matrix::from_rows(&[[6.0]]).unwrap());
        let d = Matrix::from_diagonal(&[2.0, 1.0]);
        assert_eq!(kron(&d, &d), Matrix::from_diagonal(&[4.0, 2.0, 2.0, 1.0]));
    }

    #[test]
    fn commutation_small_cases() {
        assert_eq!(commutation_matrix(1), Matrix::identity(1));
        let t = commutation_matrix(2);
        assert_eq!(t.mul_vec(&[1.0, 3.0, 2.0, 4.0]).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let t4 = commutation_matrix(4);
        assert_eq!(&t4 * &t4, Matrix::identity(16));
        assert_eq!(t4.transpose(), t4);
    }

    #[test]
    fn sym_and_skew_parts() {
        let skew = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert_eq!(sym_part(&skew).unwrap(), Matrix::zeros(2, 2));
        let sym = Matrix::from_rows(&[[1.0, 5.0], [5.0, -2.0]]).unwrap();
        assert_eq!(skew_part(&sym).unwrap(), Matrix::zeros(2, 2));
        let x = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert_eq!(sym_part(&x).unwrap(), Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap());
        assert!(sym_part(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn frobenius_inner_basics() {
        let i3 = Matrix::identity(3);
        assert_eq!(frobenius_inner(&i3, &i3).unwrap(), 3.0);
        assert!(frobenius_inner(&i3, &Matrix::identity(2)).is_err());
    }
}
