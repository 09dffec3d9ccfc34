//! Multi-output random forest regression.
//!
//! Each tree is grown best-first on a bootstrap draw, splitting the frontier
//! leaf with the largest decrease in summed squared deviation until the leaf
//! budget is spent. Forest predictions are the mean of the tree predictions.

mod tree;

pub use tree::{
    best_split, gain_improves, mean_target, midpoint, node_impurity, tree_fit, Node, RegressionTree, SplitChoice,
    MIN_RELATIVE_GAIN, SPLIT_TIE_TOL,
};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_leaf_nodes: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features considered at each split, in (0, 1].
    pub feature_fraction: f64,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_leaf_nodes: 200,
            min_samples_leaf: 1,
            feature_fraction: 1.0,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Parameter("n_trees must be >= 1".into()));
        }
        if self.max_leaf_nodes == 0 {
            return Err(Error::Parameter("max_leaf_nodes must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Parameter("min_samples_leaf must be >= 1".into()));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(Error::Parameter(format!(
                "feature_fraction must lie in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<RegressionTree>,
}

impl ForestModel {
    /// Trains `n_trees` trees in parallel. Tree `t` draws from its own stream
    /// derived from `(seed, t)`, so the result does not depend on scheduling.
    pub fn fit(x: &DenseMatrix, y: &DenseMatrix, config: &ForestConfig) -> Result<Self> {
        config.validate()?;
        if x.rows() != y.rows() {
            return Err(Error::shape("forest fit", x.shape(), y.shape()));
        }
        if x.rows() == 0 {
            return Err(Error::EmptyInput("forest fit"));
        }
        let n = x.rows();
        let base = RngStream::new(config.seed);
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = base.derive(t as u64);
                let samples = if config.bootstrap {
                    (0..n).map(|_| rng.index(n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit_on(x, y, samples, config, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ForestModel { trees })
    }

    pub fn from_trees(trees: Vec<RegressionTree>) -> Result<Self> {
        let first = trees.first().ok_or(Error::EmptyInput("forest with no trees"))?;
        let shape = (first.n_features(), first.n_outputs());
        if trees.iter().any(|t| (t.n_features(), t.n_outputs()) != shape) {
            return Err(Error::Integrity("trees disagree on feature/output width".into()));
        }
        Ok(ForestModel { trees })
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    pub fn n_outputs(&self) -> usize {
        self.trees[0].n_outputs()
    }

    /// Mean of the per-tree leaf values.
    pub fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.n_features() {
            return Err(Error::shape("forest predict", x.shape(), (x.rows(), self.n_features())));
        }
        let q = self.n_outputs();
        let scale = 1.0 / self.trees.len() as f64;
        let mut out = DenseMatrix::zeros(x.rows(), q);
        if q == 0 {
            return Ok(out);
        }
        out.data_mut().par_chunks_mut(q).enumerate().for_each(|(i, row)| {
            for t in &self.trees {
                row.iter_mut().zip(t.predict_row(x.row(i))).for_each(|(o, v)| *o += v);
            }
            row.iter_mut().for_each(|o| *o *= scale);
        });
        Ok(out)
    }
}

pub fn forest_fit(x: &DenseMatrix, y: &DenseMatrix, config: &ForestConfig) -> Result<ForestModel> {
    ForestModel::fit(x, y, config)
}

pub fn forest_predict(model: &ForestModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    model.predict(x)
}
