mod common;

use common::*;
use omx_core::io::{
    decode_model, encode_model, load_model, read_labels, read_matrix, save_model, write_atomic, write_labels,
    write_matrix, ModelFile, RunConfig,
};
use omx_core::matrix::{MatrixData, SparseMatrixCoo};
use omx_core::model::{ModelConfig, ModelKind, Regressor};
use omx_core::preprocess::Projector;
use omx_core::{DenseMatrix, Error, RngStream};

#[test]
fn matrix_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(1);
    let d = gaussian(7, 4, &mut rng).map(|v| v * 1e-7 + 1.0 / 3.0);
    let path = dir.path().join("d.csv");
    write_matrix(&path, &MatrixData::Dense(d.clone())).unwrap();
    assert!(bitwise_eq(&read_matrix(&path, false).unwrap().into_dense(), &d));

    let s = SparseMatrixCoo::from_dense(&d.map(|v| if v > 1.0 / 3.0 { v } else { 0.0 }));
    let path = dir.path().join("s.txt");
    write_matrix(&path, &MatrixData::Sparse(s.clone())).unwrap();
    match read_matrix(&path, false).unwrap() {
        MatrixData::Sparse(back) => assert_eq!(back.triplets(), s.triplets()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn parse_errors_carry_path_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1,2\n3,x\n").unwrap();
    let e = read_matrix(&path, false).unwrap_err();
    assert!(matches!(e.root(), Error::Parse { line: 2, .. }));
    assert!(e.to_string().contains("bad.csv"));
}

#[test]
fn labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let labels: Vec<String> = ["d1", "d2", "d1"].iter().map(|s| s.to_string()).collect();
    write_labels(&path, &labels).unwrap();
    assert_eq!(read_labels(&path).unwrap(), labels);
}

#[test]
fn atomic_write_replaces_without_leftovers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.txt");
    write_atomic(&path, b"first").unwrap();
    write_atomic(&path, b"second").unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), b"second");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

fn small(kind: ModelKind) -> ModelConfig {
    match ModelConfig::default_for(kind) {
        ModelConfig::Esn(c) => ModelConfig::Esn(omx_core::esn::EsnConfig { reservoir_size: 30, ..c }),
        ModelConfig::Elm(c) => ModelConfig::Elm(omx_core::elm::ElmConfig { hidden_size: 40, ..c }),
        ModelConfig::Forest(c) => {
            ModelConfig::Forest(omx_core::forest::ForestConfig { n_trees: 5, max_leaf_nodes: 12, ..c })
        }
    }
}

#[test]
fn saved_models_with_projector_predict_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::new(2);
    let raw = DenseMatrix::from_fn(80, 15, |_, _| if rng.uniform() < 0.5 { rng.uniform() * 3.0 } else { 0.0 });
    let x = MatrixData::Sparse(SparseMatrixCoo::from_dense(&raw));
    let y = gaussian(80, 3, &mut rng);
    let (proj, z) = Projector::fit_transform(&x, 5, &mut RngStream::new(0)).unwrap();
    for kind in [ModelKind::Esn, ModelKind::Elm, ModelKind::Forest] {
        let model = small(kind).with_seed(9).train(&z, &y).unwrap();
        let before = model.predict(&z).unwrap();
        let path = dir.path().join(format!("{kind}.omx"));
        save_model(&ModelFile { projector: Some(proj.clone()), log1p: true, model }, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert!(back.log1p);
        let p = back.projector.as_ref().unwrap();
        assert_eq!(p, &proj);
        let after = back.model.predict(&p.apply(&x).unwrap()).unwrap();
        assert!(bitwise_eq(&before, &after), "{kind}");
        assert_eq!(back.model.kind(), kind);
    }
}

#[test]
fn corrupted_files_rejected() {
    let mut rng = RngStream::new(3);
    let x = gaussian(20, 3, &mut rng);
    let y = gaussian(20, 2, &mut rng);
    let file = ModelFile { projector: None, log1p: false, model: small(ModelKind::Esn).train(&x, &y).unwrap() };
    let bytes = encode_model(&file).unwrap();
    assert!(matches!(decode_model(b"OMX"), Err(Error::Format(_))));
    assert!(matches!(decode_model(&bytes[..bytes.len() - 1]), Err(Error::Integrity(_))));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(decode_model(&extra), Err(Error::Integrity(_))));
    let mut kind = bytes.clone();
    kind[8] = 42;
    assert!(matches!(decode_model(&kind), Err(Error::Format(_))));
}

#[test]
fn config_file_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "tasks = t\nt.features = x.txt\nt.targets = y.csv\nt.groups = g.txt\nseed = 3\n").unwrap();
    let c = RunConfig::load(&path).unwrap();
    assert_eq!(c.seed, Some(3));
    match &c.tasks[0].source {
        omx_core::io::TaskSource::Files { features, .. } => assert_eq!(features, &dir.path().join("x.txt")),
        other => panic!("{other:?}"),
    }
}
