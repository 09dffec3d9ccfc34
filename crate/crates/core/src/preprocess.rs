//! Feature preprocessing: constant-column removal, log1p, and the fitted
//! [`Projector`] (mask, truncated SVD, z-score).
//!
//! The projector is fitted on training rows only and then applied unchanged
//! to any other split.

use crate::error::{Error, Result};
use crate::matrix::{
    svd_truncated, CsrMatrix, DenseMatrix, LinearOperator, MatrixData, SparseMatrixCoo,
    DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS,
};
use crate::rng::RngStream;

/// Lower bound applied to fitted standard deviations.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-column max − min, implicit sparse zeros included.
fn column_ranges(x: &MatrixData) -> Vec<f64> {
    match x {
        MatrixData::Dense(d) => (0..d.cols())
            .map(|j| {
                let (lo, hi) = (0..d.rows()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    let v = d.get(i, j);
                    (lo.min(v), hi.max(v))
                });
                hi - lo
            })
            .collect(),
        MatrixData::Sparse(s) => {
            let csr = CsrMatrix::from_coo(s);
            let mut lo = vec![f64::INFINITY; s.cols()];
            let mut hi = vec![f64::NEG_INFINITY; s.cols()];
            let mut count = vec![0usize; s.cols()];
            for i in 0..csr.rows() {
                for (j, v) in csr.row_entries(i) {
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                    count[j] += 1;
                }
            }
            (0..s.cols())
                .map(|j| {
                    if count[j] < s.rows() {
                        lo[j] = lo[j].min(0.0);
                        hi[j] = hi[j].max(0.0);
                    }
                    hi[j] - lo[j]
                })
                .collect()
        }
    }
}

fn apply_mask(x: &MatrixData, kept: &[usize], width: usize) -> MatrixData {
    match x {
        MatrixData::Dense(d) => MatrixData::Dense(d.select_cols(kept)),
        MatrixData::Sparse(s) => {
            let mut remap = vec![usize::MAX; width];
            for (new, &old) in kept.iter().enumerate() {
                remap[old] = new;
            }
            let mut out = SparseMatrixCoo::new(s.rows(), kept.len());
            for &(r, c, v) in s.triplets() {
                if remap[c] != usize::MAX {
                    out.push(r, remap[c], v).expect("remapped index in range");
                }
            }
            MatrixData::Sparse(out)
        }
    }
}

fn mask_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(j, &k)| k.then_some(j))
        .collect()
}

/// Removes every column whose range is at most `tol`. Returns the reduced
/// matrix and the keep-mask over the original columns.
pub fn drop_constant_columns(x: &MatrixData, tol: f64) -> Result<(MatrixData, Vec<bool>)> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::EmptyInput("drop_constant_columns"));
    }
    let mask: Vec<bool> = column_ranges(x).into_iter().map(|r| r > tol).collect();
    let kept = mask_indices(&mask);
    if kept.is_empty() {
        return Err(Error::NoInformativeFeatures);
    }
    Ok((apply_mask(x, &kept, x.cols()), mask))
}

/// Elementwise `ln(1 + x)` on nonnegative data.
pub fn log1p_transform(x: &MatrixData) -> Result<MatrixData> {
    let check = |r: usize, c: usize, v: f64| {
        if v < 0.0 || v.is_nan() {
            Err(Error::Domain { row: r, col: c, value: v })
        } else {
            Ok(v.ln_1p())
        }
    };
    match x {
        MatrixData::Dense(d) => {
            let mut out = d.clone();
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    out.set(i, j, check(i, j, d.get(i, j))?);
                }
            }
            Ok(MatrixData::Dense(out))
        }
        MatrixData::Sparse(s) => {
            let mut out = SparseMatrixCoo::new(s.rows(), s.cols());
            for &(r, c, v) in s.triplets() {
                out.push(r, c, check(r, c, v)?)?;
            }
            Ok(MatrixData::Sparse(out))
        }
    }
}

/// Fitted preprocessing state.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    kept_columns: Vec<bool>,
    kept_index: Vec<usize>,
    /// kept × k right singular vectors
    v: DenseMatrix,
    s: Vec<f64>,
    /// (mean, std) per projected column
    scaler: Vec<(f64, f64)>,
}

impl Projector {
    /// Fits and returns the projector together with the transformed
    /// training matrix (computed through [`Projector::apply`]).
    pub fn fit_transform(x: &MatrixData, k: usize, rng: &mut RngStream) -> Result<(Projector, DenseMatrix)> {
        let (masked, mask) = drop_constant_columns(x, 0.0)?;
        let survivors = masked.cols();
        let bound = x.rows().min(survivors);
        if k == 0 || k > bound {
            return Err(Error::Parameter(format!(
                "projection size {k} outside 1..={bound} ({} rows, {survivors} informative columns)",
                x.rows()
            )));
        }
        let factors = match &masked {
            MatrixData::Dense(d) => svd_truncated(d, k, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, rng)?,
            MatrixData::Sparse(s) => svd_truncated(&s.to_csr(), k, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, rng)?,
        };
        let mut p = Projector {
            kept_index: mask_indices(&mask),
            kept_columns: mask,
            v: factors.v,
            s: factors.s,
            scaler: Vec::new(),
        };
        let projected = p.project(x)?;
        let n = projected.rows() as f64;
        p.scaler = (0..k)
            .map(|j| {
                let col = projected.column(j);
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt().max(STD_FLOOR))
            })
            .collect();
        let out = p.apply(x)?;
        Ok((p, out))
    }

    pub fn fit(x: &MatrixData, k: usize, rng: &mut RngStream) -> Result<Projector> {
        Ok(Self::fit_transform(x, k, rng)?.0)
    }

    /// Reassembles a projector from stored parts.
    pub fn from_parts(
        kept_columns: Vec<bool>,
        v: DenseMatrix,
        s: Vec<f64>,
        scaler: Vec<(f64, f64)>,
    ) -> Result<Projector> {
        let kept_index = mask_indices(&kept_columns);
        let k = s.len();
        if kept_index.is_empty() {
            return Err(Error::NoInformativeFeatures);
        }
        if v.rows() != kept_index.len() || v.cols() != k || scaler.len() != k {
            return Err(Error::Integrity(format!(
                "projector parts disagree: {} kept columns, V {}x{}, {} singular values, {} scaler entries",
                kept_index.len(),
                v.rows(),
                v.cols(),
                k,
                scaler.len()
            )));
        }
        if scaler.iter().any(|&(_, sd)| !(sd >= STD_FLOOR)) {
            return Err(Error::Integrity("projector scaler below stddev floor".into()));
        }
        Ok(Projector {
            kept_columns,
            kept_index,
            v,
            s,
            scaler,
        })
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    pub fn input_width(&self) -> usize {
        self.kept_columns.len()
    }

    pub fn kept_columns(&self) -> &[bool] {
        &self.kept_columns
    }

    pub fn components(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn scaler(&self) -> &[(f64, f64)] {
        &self.scaler
    }

    /// Mask and rotate onto the fitted components, without z-scoring.
    pub fn project(&self, x: &MatrixData) -> Result<DenseMatrix> {
        if x.cols() != self.input_width() {
            return Err(Error::shape(
                "projector input",
                (x.rows(), x.cols()),
                (x.rows(), self.input_width()),
            ));
        }
        match apply_mask(x, &self.kept_index, self.input_width()) {
            MatrixData::Dense(d) => d.matmul(&self.v),
            MatrixData::Sparse(s) => s.to_csr().apply(&self.v),
        }
    }

    pub fn apply(&self, x: &MatrixData) -> Result<DenseMatrix> {
        let mut out = self.project(x)?;
        for i in 0..out.rows() {
            for (v, &(mean, sd)) in out.row_mut(i).iter_mut().zip(&self.scaler) {
                *v = (*v - mean) / sd;
            }
        }
        Ok(out)
    }
}

/// Free-function form of [`Projector::fit`].
pub fn projector_fit(x: &MatrixData, k: usize, rng: &mut RngStream) -> Result<Projector> {
    Projector::fit(x, k, rng)
}

/// Free-function form of [`Projector::apply`].
pub fn projector_apply(p: &Projector, x: &MatrixData) -> Result<DenseMatrix> {
    p.apply(x)
}
