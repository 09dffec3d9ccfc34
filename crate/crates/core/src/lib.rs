//! Multi-output regression for single-cell modality translation.
//!
//! Predicts one omics modality from another (chromatin accessibility to RNA,
//! RNA to surface protein) with three regressors that share one fit/predict
//! contract:
//!
//! * [`esn::EsnModel`]: echo state network with a fixed random reservoir and
//!   a ridge-trained linear readout,
//! * [`elm::ElmModel`]: extreme learning machine with a random hidden layer
//!   and pseudoinverse output weights,
//! * [`forest::ForestModel`]: bootstrapped multi-output regression trees
//!   grown best-first to a leaf budget.
//!
//! Inputs go through [`preprocess::Projector`] (constant-column removal,
//! randomized truncated SVD, z-scoring). [`eval`] implements grouped K-fold
//! benchmarking with the per-cell correlation score and MSE.

pub mod datagen;
pub mod elm;
pub mod error;
pub mod esn;
pub mod eval;
pub mod forest;
pub mod io;
pub mod matrix;
pub mod model;
pub mod preprocess;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SparseMatrixCoo};
pub use rng::RngStream;
