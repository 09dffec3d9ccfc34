use std::fmt::Write as _;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::eval::format_f64;
use crate::matrix::{DenseMatrix, MatrixData, SparseMatrixCoo};

const SPARSE_TAG: &str = "%sparse";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("`{}` is not a number", tok.trim())))
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("`{tok}` is not a non-negative integer")))
}

/// Parses dense CSV, or the sparse triplet format when the first line is
/// `%sparse`. `header` skips the first CSV line.
pub fn parse_matrix(text: &str, header: bool) -> Result<MatrixData> {
    let first = text.lines().next().map(str::trim);
    if first == Some(SPARSE_TAG) {
        parse_sparse(text).map(MatrixData::Sparse)
    } else {
        parse_dense(text, header).map(MatrixData::Dense)
    }
}

fn parse_dense(text: &str, header: bool) -> Result<DenseMatrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if header && i == 0 {
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            data.push(parse_value(tok, i + 1)?);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => return Err(parse_err(i + 1, format!("expected {c} fields, found {width}"))),
            _ => {}
        }
        rows += 1;
    }
    DenseMatrix::new(rows, cols.unwrap_or(0), data)
}

fn parse_sparse(text: &str) -> Result<SparseMatrixCoo> {
    let mut lines = text.lines().enumerate().skip(1).filter(|(_, l)| !l.trim().is_empty());
    let (hi, header) = lines.next().ok_or_else(|| parse_err(2, "missing `rows cols nnz` line"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(parse_err(hi + 1, "expected `rows cols nnz`"));
    }
    let rows = parse_index(dims[0], hi + 1)?;
    let cols = parse_index(dims[1], hi + 1)?;
    let nnz = parse_index(dims[2], hi + 1)?;
    let mut coo = SparseMatrixCoo::new(rows, cols);
    let mut count = 0usize;
    for (i, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(i + 1, format!("expected `row col value`, found {} fields", f.len())));
        }
        let r = parse_index(f[0], i + 1)?;
        let c = parse_index(f[1], i + 1)?;
        let v = parse_value(f[2], i + 1)?;
        if r >= rows || c >= cols {
            return Err(parse_err(i + 1, format!("index ({r}, {c}) outside {rows}x{cols}")));
        }
        coo.push(r, c, v).map_err(|e| e.context(format!("line {}", i + 1)))?;
        count += 1;
    }
    if count != nnz {
        return Err(Error::Integrity(format!("header declares {nnz} entries, file has {count}")));
    }
    Ok(coo)
}

pub fn read_matrix(path: &Path, header: bool) -> Result<MatrixData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    parse_matrix(&text, header).map_err(|e| e.context(path.display().to_string()))
}

pub fn render_dense(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 24);
    for row in m.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn render_matrix(m: &MatrixData) -> String {
    match m {
        MatrixData::Dense(d) => render_dense(d),
        MatrixData::Sparse(s) => {
            let mut out = format!("{SPARSE_TAG}\n{} {} {}\n", s.rows(), s.cols(), s.nnz());
            for &(r, c, v) in s.triplets() {
                let _ = writeln!(out, "{r} {c} {}", format_f64(v));
            }
            out
        }
    }
}

pub fn write_matrix(path: &Path, m: &MatrixData) -> Result<()> {
    write_atomic(path, render_matrix(m).as_bytes())
}

/// One label per non-empty line.
pub fn parse_labels(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    Ok(parse_labels(&text))
}

pub fn write_labels(path: &Path, labels: &[String]) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        out.push_str(l);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_csv() {
        let m = parse_matrix("1,2\n3,4", false).unwrap().into_dense();
        assert_eq!(m, DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
    }

    #[test]
    fn header_skipped_when_flagged() {
        let m = parse_matrix("a,b\n1,2\n", true).unwrap().into_dense();
        assert_eq!(m.shape(), (1, 2));
        assert!(matches!(parse_matrix("a,b\n1,2\n", false), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn ragged_row_reports_line() {
        assert!(matches!(parse_matrix("1,2\n3\n", false), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn sparse_single_entry() {
        let MatrixData::Sparse(s) = parse_matrix("%sparse\n2 2 1\n0 1 5.0\n", false).unwrap() else {
            panic!("expected sparse")
        };
        assert_eq!((s.rows(), s.cols()), (2, 2));
        assert_eq!(s.triplets(), &[(0, 1, 5.0)]);
    }

    #[test]
    fn sparse_count_mismatch() {
        assert!(matches!(parse_matrix("%sparse\n2 2 2\n0 1 5.0\n", false), Err(Error::Integrity(_))));
    }

    #[test]
    fn sparse_malformed_line() {
        let e = parse_matrix("%sparse\n2 2 2\n0 1 5.0\n1 x 2\n", false).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
        let e = parse_matrix("%sparse\n2 2 1\n2 0 1\n", false).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn round_trip_bitwise() {
        let d = DenseMatrix::from_rows(&[vec![0.1, -1e-300, 1.0 / 3.0], vec![f64::MAX, 2.5e17, -0.0]]).unwrap();
        let back = parse_matrix(&render_dense(&d), false).unwrap().into_dense();
        for (a, b) in d.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let s = SparseMatrixCoo::from_dense(&d);
        let MatrixData::Sparse(back) = parse_matrix(&render_matrix(&MatrixData::Sparse(s.clone())), false).unwrap() else {
            panic!()
        };
        assert_eq!(back.triplets(), s.triplets());
    }
}
