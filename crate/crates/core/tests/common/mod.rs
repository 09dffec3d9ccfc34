#![allow(dead_code)]

use nalgebra::DMatrix;
use omx_core::{DenseMatrix, RngStream};

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Product of two Gaussian factors: rank `k` almost surely.
pub fn low_rank(rows: usize, cols: usize, k: usize, rng: &mut RngStream) -> DenseMatrix {
    gaussian(rows, k, rng).matmul(&gaussian(k, cols, rng)).unwrap()
}

pub fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn bitwise_eq(a: &DenseMatrix, b: &DenseMatrix) -> bool {
    a.shape() == b.shape() && a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits())
}
