use super::dense::{norm2, DenseMatrix};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const DEFAULT_MAX_ITERS: usize = 2000;
pub const DEFAULT_TOL: f64 = 1e-4;

/// Power-iteration estimate of the spectral radius, `‖Wᵏv‖^(1/k)`.
///
/// The growth factor is averaged in log space over the iterations after a
/// burn-in quarter, which cancels the start-vector constant and damps the
/// oscillation from complex or equal-magnitude leading eigenvalues.
pub fn spectral_radius_estimate(w: &DenseMatrix, max_iters: usize, tol: f64) -> Result<f64> {
    if w.rows() != w.cols() {
        return Err(Error::shape("spectral_radius_estimate", w.shape(), w.shape()));
    }
    let csr = CsrMatrix::from_dense(w);
    Ok(power_estimate(&csr, max_iters, tol))
}

pub(crate) fn power_estimate(w: &CsrMatrix, max_iters: usize, tol: f64) -> f64 {
    let n = w.rows();
    if n == 0 || w.nnz() == 0 {
        return 0.0;
    }
    let max_iters = max_iters.max(8);
    // fixed start vector keeps the estimate a pure function of W
    let mut rng = RngStream::new(0x5eed_0f_5a1d);
    let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut next = vec![0.0; n];

    let burn = max_iters / 4;
    let min_window = 64;
    let mut log_sum = 0.0;
    let mut count = 0usize;
    let mut checkpoint: Option<f64> = None;
    let mut next_check = min_window;

    for it in 0..max_iters {
        w.matvec_into(&v, &mut next);
        let g = norm2(&next);
        if !(g > 1e-300) {
            return 0.0;
        }
        for (a, b) in v.iter_mut().zip(&next) {
            *a = b / g;
        }
        if it < burn {
            continue;
        }
        log_sum += g.ln();
        count += 1;
        if count == next_check {
            let est = (log_sum / count as f64).exp();
            if let Some(prev) = checkpoint {
                if (est - prev).abs() <= tol * est {
                    return est;
                }
            }
            checkpoint = Some(est);
            next_check *= 2;
        }
    }
    (log_sum / count.max(1) as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(w: &DenseMatrix) -> f64 {
        spectral_radius_estimate(w, DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn diagonal() {
        let r = est(&DenseMatrix::diag(&[0.5, -0.2]));
        assert!((r - 0.5).abs() <= 0.02 * 0.5, "{r}");
    }

    #[test]
    fn zero_and_nilpotent() {
        assert_eq!(est(&DenseMatrix::zeros(3, 3)), 0.0);
        let nil = DenseMatrix::from_rows(&[[0.0, 1.0, 2.0], [0.0, 0.0, 3.0], [0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(est(&nil), 0.0);
    }

    #[test]
    fn rotation_with_imaginary_eigenvalues() {
        // eigenvalues ±0.4i
        let w = DenseMatrix::from_rows(&[[0.0, 1.0], [-0.16, 0.0]]).unwrap();
        let r = est(&w);
        assert!((r - 0.4).abs() <= 0.02 * 0.4, "{r}");
    }

    #[test]
    fn non_square_rejected() {
        assert!(spectral_radius_estimate(&DenseMatrix::zeros(2, 3), 10, 1e-3).is_err());
    }

    #[test]
    fn homogeneous_in_scale() {
        let w = DenseMatrix::from_rows(&[[0.3, 0.8], [-0.5, 0.1]]).unwrap();
        let a = est(&w);
        let b = est(&w.scale(2.5));
        assert!((b - 2.5 * a).abs() < 1e-9 * b);
    }
}
