use super::dense::DenseMatrix;
use super::sparse::{CsrMatrix, SparseMatrixCoo};

/// A feature or target matrix in either storage form.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    Dense(DenseMatrix),
    Sparse(SparseMatrixCoo),
}

impl MatrixData {
    pub fn rows(&self) -> usize {
        match self {
            MatrixData::Dense(d) => d.rows(),
            MatrixData::Sparse(s) => s.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            MatrixData::Dense(d) => d.cols(),
            MatrixData::Sparse(s) => s.cols(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            MatrixData::Dense(d) => d.clone(),
            MatrixData::Sparse(s) => s.to_dense(),
        }
    }

    pub fn into_dense(self) -> DenseMatrix {
        match self {
            MatrixData::Dense(d) => d,
            MatrixData::Sparse(s) => s.to_dense(),
        }
    }

    /// Keeps the listed rows, in the listed order.
    pub fn select_rows(&self, idx: &[usize]) -> MatrixData {
        match self {
            MatrixData::Dense(d) => MatrixData::Dense(d.select_rows(idx)),
            MatrixData::Sparse(s) => {
                let csr = CsrMatrix::from_coo(s);
                let mut out = SparseMatrixCoo::new(idx.len(), s.cols());
                for (new_row, &r) in idx.iter().enumerate() {
                    for (c, v) in csr.row_entries(r) {
                        out.push(new_row, c, v).expect("index in range");
                    }
                }
                MatrixData::Sparse(out)
            }
        }
    }
}

impl From<DenseMatrix> for MatrixData {
    fn from(d: DenseMatrix) -> Self {
        MatrixData::Dense(d)
    }
}

impl From<SparseMatrixCoo> for MatrixData {
    fn from(s: SparseMatrixCoo) -> Self {
        MatrixData::Sparse(s)
    }
}
