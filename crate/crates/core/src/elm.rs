//! Extreme learning machine regression: `H = f(X·W_in + b)`, output weights
//! `W_out = H⁺·T`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{pinv, DenseMatrix};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Relu => x.max(0.0),
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Sigmoid => 1,
            Activation::Relu => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Sigmoid),
            2 => Some(Activation::Relu),
            _ => None,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Parameter(format!(
                "unknown activation `{other}` (expected tanh, sigmoid or relu)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmConfig {
    pub hidden_size: usize,
    pub activation: Activation,
    /// Pseudoinverse cutoff; `None` means `1e-12 · max(n, hidden_size)`.
    pub rcond: Option<f64>,
    pub seed: u64,
}

impl Default for ElmConfig {
    fn default() -> Self {
        ElmConfig {
            hidden_size: 8000,
            activation: Activation::Tanh,
            rcond: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElmModel {
    /// input_dim × hidden_size
    w_in: DenseMatrix,
    bias: Vec<f64>,
    activation: Activation,
    rcond: Option<f64>,
    seed: u64,
    w_out: Option<DenseMatrix>,
}

impl ElmModel {
    /// Random hidden layer: `W_in` and `b` uniform in [−1, 1].
    pub fn init(config: &ElmConfig, input_dim: usize) -> Result<Self> {
        if config.hidden_size == 0 {
            return Err(Error::Parameter("hidden_size must be >= 1".into()));
        }
        if input_dim == 0 {
            return Err(Error::Parameter("ELM input_dim must be >= 1".into()));
        }
        let mut rng = RngStream::new(config.seed);
        let w_in = DenseMatrix::from_fn(input_dim, config.hidden_size, |_, _| rng.uniform_range(-1.0, 1.0));
        let bias = (0..config.hidden_size).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        Ok(ElmModel {
            w_in,
            bias,
            activation: config.activation,
            rcond: config.rcond,
            seed: config.seed,
            w_out: None,
        })
    }

    pub fn from_weights(
        w_in: DenseMatrix,
        bias: Vec<f64>,
        activation: Activation,
        w_out: Option<DenseMatrix>,
    ) -> Result<Self> {
        if bias.len() != w_in.cols() {
            return Err(Error::shape("elm bias", (1, bias.len()), (1, w_in.cols())));
        }
        if let Some(out) = &w_out {
            if out.rows() != w_in.cols() {
                return Err(Error::shape("elm readout", out.shape(), (w_in.cols(), out.cols())));
            }
        }
        Ok(ElmModel {
            w_in,
            bias,
            activation,
            rcond: None,
            seed: 0,
            w_out,
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.bias.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_weights(&self) -> &DenseMatrix {
        &self.w_in
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn output_weights(&self) -> Option<&DenseMatrix> {
        self.w_out.as_ref()
    }

    pub fn is_fitted(&self) -> bool {
        self.w_out.is_some()
    }

    /// `f(X·W_in + 1·bᵀ)`
    pub fn hidden(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape("elm hidden", x.shape(), (x.rows(), self.input_dim())));
        }
        let mut h = x.matmul(&self.w_in)?;
        let width = h.cols();
        let act = self.activation;
        h.data_mut().par_chunks_mut(width.max(1)).for_each(|row| {
            for (v, b) in row.iter_mut().zip(&self.bias) {
                *v = act.apply(*v + b);
            }
        });
        Ok(h)
    }

    pub fn fit(&mut self, x: &DenseMatrix, t: &DenseMatrix) -> Result<()> {
        if x.rows() != t.rows() {
            return Err(Error::shape("elm fit", x.shape(), t.shape()));
        }
        if x.rows() == 0 {
            return Err(Error::EmptyInput("elm fit"));
        }
        let h = self.hidden(x)?;
        self.w_out = Some(pinv(&h, self.rcond)?.matmul(t)?);
        Ok(())
    }

    pub fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let w_out = self.w_out.as_ref().ok_or(Error::State("ELM output weights not fitted"))?;
        self.hidden(x)?.matmul(w_out)
    }
}

pub fn elm_hidden(model: &ElmModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    model.hidden(x)
}

pub fn elm_fit(mut model: ElmModel, x: &DenseMatrix, t: &DenseMatrix) -> Result<ElmModel> {
    model.fit(x, t)?;
    Ok(model)
}

pub fn elm_predict(model: &ElmModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    model.predict(x)
}
