use super::decomp::{cholesky, cholesky_solve, jacobi_svd};
use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Moore-Penrose pseudoinverse. Singular values at or below
/// `rcond · σ_max` are treated as zero; `None` uses `1e-12 · max(m, n)`.
pub fn pinv(a: &DenseMatrix, rcond: Option<f64>) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::EmptyInput("pinv"));
    }
    let rcond = rcond.unwrap_or(1e-12 * m.max(n) as f64);
    if rcond < 0.0 {
        return Err(Error::Parameter(format!("rcond must be nonnegative, got {rcond}")));
    }
    let svd = jacobi_svd(a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = rcond * smax;
    // V · diag(1/s) · Uᵀ over the retained triplets
    let mut vs = svd.v.clone();
    for i in 0..vs.rows() {
        for (x, &s) in vs.row_mut(i).iter_mut().zip(&svd.s) {
            *x = if s > cutoff && s > 0.0 { *x / s } else { 0.0 };
        }
    }
    vs.matmul(&svd.u.transpose())
}

/// `argmin_B ‖X·B − Y‖²_F + λ‖B‖²_F` via Cholesky of `XᵀX + λI`.
/// A factorization failure falls back to the pseudoinverse route.
pub fn ridge_solve(x: &DenseMatrix, y: &DenseMatrix, lambda: f64) -> Result<DenseMatrix> {
    if x.rows() != y.rows() {
        return Err(Error::shape("ridge_solve", x.shape(), y.shape()));
    }
    if x.rows() == 0 {
        return Err(Error::EmptyInput("ridge_solve"));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Parameter(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let xt = x.transpose();
    let mut gram = xt.matmul(x)?;
    for i in 0..gram.rows() {
        gram.set(i, i, gram.get(i, i) + lambda);
    }
    let xty = xt.matmul(y)?;
    match cholesky(&gram) {
        Some(l) => Ok(cholesky_solve(&l, &xty)),
        None if lambda == 0.0 => pinv(x, None)?.matmul(y),
        None => pinv(&gram, None)?.matmul(&xty),
    }
}
