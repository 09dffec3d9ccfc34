//! Dense and sparse linear algebra.

mod data;
mod decomp;
mod dense;
mod solve;
mod sparse;
mod spectral;
mod svd;

pub use data::MatrixData;
pub use decomp::{cholesky, cholesky_solve, householder_qr, jacobi_svd, Svd};
pub use dense::{matmul, DenseMatrix};
pub use solve::{pinv, ridge_solve};
pub use sparse::{CsrMatrix, LinearOperator, SparseMatrixCoo};
pub use spectral::{spectral_radius_estimate, DEFAULT_MAX_ITERS, DEFAULT_TOL};
pub(crate) use dense::dot;
pub(crate) use spectral::power_estimate;
pub use svd::{svd_truncated, svd_truncated_default, SvdFactors, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS};

