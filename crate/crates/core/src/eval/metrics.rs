//! Correlation score and MSE.
//!
//! The correlation score is the mean over rows (cells) of the Pearson
//! correlation between the true and predicted output vectors. Per-column and
//! flattened variants are provided for comparison.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Counters collected while scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Vectors with zero variance on either side, scored as 0.
    pub zero_variance: usize,
}

/// Sample Pearson correlation; 0 when either side has zero variance.
pub fn pearson_row(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    pearson_counted(y_true, y_pred, &mut Diagnostics::default())
}

pub fn pearson_counted(a: &[f64], b: &[f64], diag: &mut Diagnostics) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape("pearson", (1, a.len()), (1, b.len())));
    }
    if a.len() < 2 {
        return Err(Error::Parameter(format!(
            "pearson needs at least 2 values, got {}",
            a.len()
        )));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        diag.zero_variance += 1;
        return Ok(0.0);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

fn check_same_shape(op: &'static str, a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, a.shape(), b.shape()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput(op));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationStats {
    pub score: f64,
    pub diagnostics: Diagnostics,
}

/// Mean per-row Pearson correlation.
pub fn correlation_score(y_true: &DenseMatrix, y_pred: &DenseMatrix) -> Result<f64> {
    Ok(correlation_score_detailed(y_true, y_pred)?.score)
}

pub fn correlation_score_detailed(y_true: &DenseMatrix, y_pred: &DenseMatrix) -> Result<CorrelationStats> {
    check_same_shape("correlation_score", y_true, y_pred)?;
    let mut diagnostics = Diagnostics::default();
    let mut total = 0.0;
    for i in 0..y_true.rows() {
        total += pearson_counted(y_true.row(i), y_pred.row(i), &mut diagnostics)?;
    }
    Ok(CorrelationStats {
        score: total / y_true.rows() as f64,
        diagnostics,
    })
}

/// Mean per-column Pearson correlation (across samples).
pub fn correlation_score_columns(y_true: &DenseMatrix, y_pred: &DenseMatrix) -> Result<f64> {
    check_same_shape("correlation_score_columns", y_true, y_pred)?;
    let mut d = Diagnostics::default();
    let mut total = 0.0;
    for j in 0..y_true.cols() {
        total += pearson_counted(&y_true.column(j), &y_pred.column(j), &mut d)?;
    }
    Ok(total / y_true.cols() as f64)
}

/// Pearson correlation of the flattened matrices.
pub fn correlation_flat(y_true: &DenseMatrix, y_pred: &DenseMatrix) -> Result<f64> {
    check_same_shape("correlation_flat", y_true, y_pred)?;
    pearson_row(y_true.data(), y_pred.data())
}

/// Mean squared error over all entries.
pub fn mse(y_true: &DenseMatrix, y_pred: &DenseMatrix) -> Result<f64> {
    check_same_shape("mse", y_true, y_pred)?;
    let sum: f64 = y_true
        .data()
        .iter()
        .zip(y_pred.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / y_true.data().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn perfect_and_inverted() {
        let a = [1.0, 3.0, 2.0, 5.0];
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson_row(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_row(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_pair() {
        // cov 3, var 2 and 42/9: r = 3 / sqrt(84/9)
        let want = 3.0 / (84.0f64 / 9.0).sqrt();
        let r = pearson_row(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - want).abs() < 1e-15);
        assert!((r - 0.98198).abs() < 1e-5);
    }

    #[test]
    fn constant_vector_scores_zero_and_is_counted() {
        let mut d = Diagnostics::default();
        assert_eq!(pearson_counted(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], &mut d).unwrap(), 0.0);
        assert_eq!(d.zero_variance, 1);
    }

    #[test]
    fn short_vectors_rejected() {
        assert!(matches!(pearson_row(&[1.0], &[1.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn two_row_composition() {
        let t = m(&[&[1.0, 2.0, 3.0], &[0.0, 1.0, 2.0]]);
        let p = m(&[&[1.0, 2.0, 4.0], &[0.0, 1.0, 2.0]]);
        let s = correlation_score(&t, &p).unwrap();
        assert!((s - 0.99099).abs() < 1e-5, "{s}");
    }

    #[test]
    fn identical_matrices() {
        let t = m(&[&[1.0, 2.0, 0.5], &[4.0, -1.0, 2.0]]);
        assert!((correlation_score(&t, &t).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(mse(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn mse_hand_value_and_shape_error() {
        assert_eq!(mse(&m(&[&[1.0, 2.0]]), &m(&[&[0.0, 2.0]])).unwrap(), 0.5);
        assert!(matches!(mse(&m(&[&[1.0, 2.0]]), &m(&[&[1.0]])), Err(Error::Shape { .. })));
        assert!(correlation_score(&m(&[&[1.0, 2.0]]), &m(&[&[1.0], &[2.0]])).is_err());
    }

    #[test]
    fn variants_agree_on_perfect_predictions() {
        let t = m(&[&[1.0, 2.0, 0.5], &[4.0, -1.0, 2.0], &[0.0, 3.0, 1.0]]);
        assert!((correlation_score_columns(&t, &t).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlation_flat(&t, &t).unwrap() - 1.0).abs() < 1e-12);
    }
}
