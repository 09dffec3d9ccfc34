mod common;

use common::*;
use omx_core::matrix::{MatrixData, SparseMatrixCoo};
use omx_core::preprocess::{drop_constant_columns, log1p_transform, projector_apply, projector_fit, Projector};
use omx_core::{DenseMatrix, Error, RngStream};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn projection_preserves_distances_on_rank_k_data() {
    let mut rng = RngStream::new(1);
    let x = low_rank(60, 30, 5, &mut rng);
    let data = MatrixData::Dense(x.clone());
    let p = projector_fit(&data, 5, &mut RngStream::new(2)).unwrap();
    let z = p.project(&data).unwrap();
    for i in 0..60 {
        for j in (i + 1..60).step_by(7) {
            let (d0, d1) = (dist(x.row(i), x.row(j)), dist(z.row(i), z.row(j)));
            assert!((d0 - d1).abs() < 1e-8 * d0.max(1.0), "{i},{j}: {d0} vs {d1}");
        }
    }
}

#[test]
fn full_rank_projection_is_a_rotation() {
    let mut rng = RngStream::new(3);
    let x = gaussian(40, 8, &mut rng);
    let data = MatrixData::Dense(x.clone());
    let p = projector_fit(&data, 8, &mut RngStream::new(4)).unwrap();
    let v = p.components();
    assert!(max_diff(&v.t_matmul(v).unwrap(), &DenseMatrix::identity(8)) < 1e-10);
    let z = p.project(&data).unwrap();
    for i in 0..40 {
        let (a, b) = (dist(x.row(i), &[0.0; 8]), dist(z.row(i), &[0.0; 8]));
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn apply_standardizes_training_columns() {
    let mut rng = RngStream::new(5);
    let x = MatrixData::Dense(gaussian(100, 12, &mut rng).scale(3.0));
    let (p, z) = Projector::fit_transform(&x, 4, &mut RngStream::new(0)).unwrap();
    for j in 0..4 {
        let col = z.column(j);
        let mean = col.iter().sum::<f64>() / 100.0;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 100.0;
        assert!(mean.abs() < 1e-10 && (var - 1.0).abs() < 1e-10);
    }
    assert!(bitwise_eq(&projector_apply(&p, &x).unwrap(), &z));
}

#[test]
fn sparse_and_dense_inputs_agree() {
    let mut rng = RngStream::new(6);
    let d = DenseMatrix::from_fn(50, 20, |_, _| if rng.uniform() < 0.4 { rng.uniform() * 5.0 } else { 0.0 });
    let s = MatrixData::Sparse(SparseMatrixCoo::from_dense(&d));
    let (_, zd) = Projector::fit_transform(&MatrixData::Dense(d), 6, &mut RngStream::new(1)).unwrap();
    let (_, zs) = Projector::fit_transform(&s, 6, &mut RngStream::new(1)).unwrap();
    assert!(max_diff(&zd, &zs) < 1e-8);
}

#[test]
fn constant_columns_masked_before_projection() {
    let mut coo = SparseMatrixCoo::new(4, 3);
    coo.push(0, 0, 1.0).unwrap();
    coo.push(1, 0, 2.0).unwrap();
    for i in 0..4 {
        coo.push(i, 2, 3.0).unwrap();
    }
    let (kept, mask) = drop_constant_columns(&MatrixData::Sparse(coo), 0.0).unwrap();
    assert_eq!(mask, vec![true, false, false]);
    assert_eq!(kept.cols(), 1);
    let all_const = MatrixData::Dense(DenseMatrix::from_fn(3, 2, |_, j| j as f64));
    assert!(matches!(drop_constant_columns(&all_const, 0.0), Err(Error::NoInformativeFeatures)));
}

#[test]
fn invalid_k_rejected() {
    let mut rng = RngStream::new(7);
    let x = MatrixData::Dense(gaussian(10, 5, &mut rng));
    for k in [0, 6] {
        assert!(matches!(Projector::fit(&x, k, &mut RngStream::new(0)), Err(Error::Parameter(_))));
    }
}

#[test]
fn log1p_domain() {
    let x = MatrixData::Dense(DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.5, 2.0]]).unwrap());
    assert!(matches!(log1p_transform(&x), Err(Error::Domain { row: 1, col: 0, .. })));
    let ok = log1p_transform(&MatrixData::Dense(DenseMatrix::from_rows(&[vec![0.0, (1f64).exp() - 1.0]]).unwrap()))
        .unwrap()
        .into_dense();
    assert_eq!(ok.get(0, 0), 0.0);
    assert!((ok.get(0, 1) - 1.0).abs() < 1e-15);
}

#[test]
fn wrong_width_at_apply_is_shape_error() {
    let mut rng = RngStream::new(8);
    let p = Projector::fit(&MatrixData::Dense(gaussian(20, 6, &mut rng)), 3, &mut RngStream::new(0)).unwrap();
    assert!(matches!(p.apply(&MatrixData::Dense(gaussian(2, 5, &mut rng))), Err(Error::Shape { .. })));
}
