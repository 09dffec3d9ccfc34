//! Randomized truncated SVD.
//!
//! Range finding with a Gaussian sketch of `k + oversample` columns, a few
//! rounds of orthonormalized subspace iteration, then an exact SVD of the
//! small projected matrix.

use super::decomp::{householder_qr, jacobi_svd};
use super::dense::DenseMatrix;
use super::sparse::LinearOperator;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const DEFAULT_OVERSAMPLE: usize = 10;
pub const DEFAULT_POWER_ITERS: usize = 2;

/// Leading-k singular triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// n×k left singular vectors.
    pub u: DenseMatrix,
    /// k singular values, nonincreasing.
    pub s: Vec<f64>,
    /// d×k right singular vectors.
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `u · diag(s) · vᵀ`
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (x, s) in us.row_mut(i).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("factor shapes agree")
    }
}

pub fn svd_truncated<A: LinearOperator + ?Sized>(
    a: &A,
    k: usize,
    oversample: usize,
    power_iters: usize,
    rng: &mut RngStream,
) -> Result<SvdFactors> {
    let (n, d) = (a.nrows(), a.ncols());
    let full = n.min(d);
    if k == 0 || k > full {
        return Err(Error::Parameter(format!(
            "truncated SVD rank {k} outside 1..={full} for a {n}x{d} matrix"
        )));
    }
    let l = (k + oversample).min(full);

    let omega = DenseMatrix::from_fn(d, l, |_, _| rng.normal());
    let mut q = householder_qr(&a.apply(&omega)?).0;
    for _ in 0..power_iters {
        let z = householder_qr(&a.apply_transpose(&q)?).0;
        q = householder_qr(&a.apply(&z)?).0;
    }

    // B = Qᵀ A, computed as (Aᵀ Q)ᵀ so sparse operators never densify
    let bt = a.apply_transpose(&q)?;
    let small = jacobi_svd(&bt.transpose());
    let u = q.matmul(&small.u.leading_cols(k))?;
    Ok(SvdFactors {
        u,
        s: small.s[..k].to_vec(),
        v: small.v.leading_cols(k),
    })
}

/// Truncated SVD with the default oversampling and power iterations.
pub fn svd_truncated_default<A: LinearOperator + ?Sized>(
    a: &A,
    k: usize,
    rng: &mut RngStream,
) -> Result<SvdFactors> {
    svd_truncated(a, k, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, rng)
}
