//! Coordinate and compressed-row sparse matrices.

use rayon::prelude::*;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Triplet-form sparse matrix. Explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrixCoo {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseMatrixCoo {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrixCoo {
            rows,
            cols,
            triplets: Vec::new(),
        }
    }

    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut m = Self::new(rows, cols);
        for (r, c, v) in triplets {
            m.push(r, c, v)?;
        }
        Ok(m)
    }

    /// Adds an entry; zero values are skipped.
    pub fn push(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::Parameter(format!(
                "index ({row}, {col}) outside {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if value != 0.0 {
            self.triplets.push((row, col, value));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_coo(self)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.triplets {
            d.set(r, c, d.get(r, c) + v);
        }
        d
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut m = Self::new(d.rows(), d.cols());
        for i in 0..d.rows() {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v != 0.0 {
                    m.triplets.push((i, j, v));
                }
            }
        }
        m
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate coordinates and drops entries that cancel to zero.
    pub fn from_coo(coo: &SparseMatrixCoo) -> Self {
        let mut t = coo.triplets.clone();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; coo.rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            let mut j = i + 1;
            while j < t.len() && t[j].0 == r && t[j].1 == c {
                v += t[j].2;
                j += 1;
            }
            if v != 0.0 {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
            }
            i = j;
        }
        for r in 0..coo.rows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            rows: coo.rows,
            cols: coo.cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        Self::from_coo(&SparseMatrixCoo::from_dense(d))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row_entries(i).map(|(j, a)| a * v[j]).sum();
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                d.set(i, j, v);
            }
        }
        d
    }
}

/// A matrix that can multiply dense blocks from the left, plain and transposed.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A · b`
    fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix>;
    /// `Aᵀ · b`
    fn apply_transpose(&self, b: &DenseMatrix) -> Result<DenseMatrix>;
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.matmul(b)
    }
    fn apply_transpose(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        self.t_matmul(b)
    }
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != b.rows() {
            return Err(Error::shape("csr apply", (self.rows, self.cols), b.shape()));
        }
        let m = b.cols();
        let mut out = DenseMatrix::zeros(self.rows, m);
        if m == 0 {
            return Ok(out);
        }
        out.data_mut()
            .par_chunks_mut(m)
            .enumerate()
            .for_each(|(i, row)| {
                for (j, a) in self.row_entries(i) {
                    for (o, &x) in row.iter_mut().zip(b.row(j)) {
                        *o += a * x;
                    }
                }
            });
        Ok(out)
    }
    fn apply_transpose(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != b.rows() {
            return Err(Error::shape(
                "csr apply_transpose",
                (self.rows, self.cols),
                b.shape(),
            ));
        }
        // scatter in row order: deterministic, single-threaded
        let m = b.cols();
        let mut out = DenseMatrix::zeros(self.cols, m);
        for i in 0..self.rows {
            let brow = b.row(i);
            for (j, a) in self.row_entries(i) {
                for (o, &x) in out.row_mut(j).iter_mut().zip(brow) {
                    *o += a * x;
                }
            }
        }
        Ok(out)
    }
}

impl LinearOperator for SparseMatrixCoo {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != b.rows() {
            return Err(Error::shape("coo apply", self.shape(), b.shape()));
        }
        let mut out = DenseMatrix::zeros(self.rows, b.cols());
        for &(r, c, v) in &self.triplets {
            for (o, &x) in out.row_mut(r).iter_mut().zip(b.row(c)) {
                *o += v * x;
            }
        }
        Ok(out)
    }
    fn apply_transpose(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != b.rows() {
            return Err(Error::shape("coo apply_transpose", self.shape(), b.shape()));
        }
        let mut out = DenseMatrix::zeros(self.cols, b.cols());
        for &(r, c, v) in &self.triplets {
            for (o, &x) in out.row_mut(c).iter_mut().zip(b.row(r)) {
                *o += v * x;
            }
        }
        Ok(out)
    }
}
