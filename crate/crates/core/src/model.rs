//! The shared fit/predict contract over the three regressors.

use std::fmt;
use std::str::FromStr;

use crate::elm::{ElmConfig, ElmModel};
use crate::error::{Error, Result};
use crate::esn::{EsnConfig, EsnModel};
use crate::forest::{ForestConfig, ForestModel};
use crate::matrix::DenseMatrix;

pub trait Regressor: Send + Sync {
    fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix>;
}

/// Something that can be trained into a [`Regressor`].
pub trait Learner: Sync {
    fn name(&self) -> String;
    /// Fits on `(x, y)`; `seed` drives every random draw of this fit.
    fn fit(&self, x: &DenseMatrix, y: &DenseMatrix, seed: u64) -> Result<Box<dyn Regressor>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Esn,
    Elm,
    Forest,
}

impl ModelKind {
    pub fn tag(self) -> u8 {
        match self {
            ModelKind::Esn => 1,
            ModelKind::Elm => 2,
            ModelKind::Forest => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(ModelKind::Esn),
            2 => Some(ModelKind::Elm),
            3 => Some(ModelKind::Forest),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Esn => "esn",
            ModelKind::Elm => "elm",
            ModelKind::Forest => "forest",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "esn" => Ok(ModelKind::Esn),
            "elm" => Ok(ModelKind::Elm),
            "forest" | "rf" => Ok(ModelKind::Forest),
            other => Err(Error::Parameter(format!(
                "unknown model `{other}` (expected esn, elm or forest)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Esn(EsnConfig),
    Elm(ElmConfig),
    Forest(ForestConfig),
}

impl ModelConfig {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Esn => ModelConfig::Esn(EsnConfig::default()),
            ModelKind::Elm => ModelConfig::Elm(ElmConfig::default()),
            ModelKind::Forest => ModelConfig::Forest(ForestConfig::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Esn(_) => ModelKind::Esn,
            ModelConfig::Elm(_) => ModelKind::Elm,
            ModelConfig::Forest(_) => ModelKind::Forest,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        match &mut c {
            ModelConfig::Esn(e) => e.seed = seed,
            ModelConfig::Elm(e) => e.seed = seed,
            ModelConfig::Forest(f) => f.seed = seed,
        }
        c
    }

    /// Trains with the seed stored in the config.
    pub fn train(&self, x: &DenseMatrix, y: &DenseMatrix) -> Result<FittedModel> {
        match self {
            ModelConfig::Esn(c) => {
                let mut m = EsnModel::init(c.clone(), x.cols())?;
                m.fit(x, y)?;
                Ok(FittedModel::Esn(m))
            }
            ModelConfig::Elm(c) => {
                let mut m = ElmModel::init(c, x.cols())?;
                m.fit(x, y)?;
                Ok(FittedModel::Elm(m))
            }
            ModelConfig::Forest(c) => Ok(FittedModel::Forest(ForestModel::fit(x, y, c)?)),
        }
    }
}

impl Learner for ModelConfig {
    fn name(&self) -> String {
        self.kind().to_string()
    }

    fn fit(&self, x: &DenseMatrix, y: &DenseMatrix, seed: u64) -> Result<Box<dyn Regressor>> {
        Ok(Box::new(self.with_seed(seed).train(x, y)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Esn(EsnModel),
    Elm(ElmModel),
    Forest(ForestModel),
}

impl FittedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Esn(_) => ModelKind::Esn,
            FittedModel::Elm(_) => ModelKind::Elm,
            FittedModel::Forest(_) => ModelKind::Forest,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            FittedModel::Esn(m) => m.input_dim(),
            FittedModel::Elm(m) => m.input_dim(),
            FittedModel::Forest(m) => m.n_features(),
        }
    }
}

impl Regressor for FittedModel {
    fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            FittedModel::Esn(m) => m.predict(x),
            FittedModel::Elm(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
        }
    }
}
