//! Echo state network regression.
//!
//! The reservoir update `x ← tanh(W_in·u + W·x)` is run per sample from
//! `x = 0` until it reaches its fixed point; the readout maps `[x, 1]` to the
//! targets and is the only trained part. Samples are independent, so
//! predictions do not depend on row order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, power_estimate, ridge_solve, CsrMatrix, DenseMatrix, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::rng::RngStream;

const MAX_RESEEDS: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct EsnConfig {
    pub reservoir_size: usize,
    /// Target spectral radius of the reservoir, in (0, 1).
    pub spectral_radius: f64,
    /// Half-width of the uniform input-weight distribution.
    pub input_scale: f64,
    /// Fraction of nonzero reservoir weights.
    pub reservoir_density: f64,
    /// Maximum fixed-point iterations per sample.
    pub state_iters: usize,
    /// Convergence threshold on the max-norm state change.
    pub state_tol: f64,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        EsnConfig {
            reservoir_size: 512,
            spectral_radius: 0.4,
            input_scale: 1.0,
            reservoir_density: 0.1,
            state_iters: 30,
            state_tol: 1e-8,
            ridge_lambda: 1e-6,
            seed: 0,
        }
    }
}

impl EsnConfig {
    /// Reservoir of 100 units, used for the RNA → protein task.
    pub fn citeseq() -> Self {
        EsnConfig {
            reservoir_size: 100,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reservoir_size == 0 {
            return Err(Error::Parameter("reservoir_size must be >= 1".into()));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius < 1.0) {
            return Err(Error::Parameter(format!(
                "spectral_radius must lie in (0, 1), got {}",
                self.spectral_radius
            )));
        }
        if !(self.reservoir_density > 0.0 && self.reservoir_density <= 1.0) {
            return Err(Error::Parameter(format!(
                "reservoir_density must lie in (0, 1], got {}",
                self.reservoir_density
            )));
        }
        if !(self.input_scale.is_finite() && self.input_scale >= 0.0) {
            return Err(Error::Parameter(format!("input_scale must be >= 0, got {}", self.input_scale)));
        }
        if !(self.state_tol >= 0.0) {
            return Err(Error::Parameter("state_tol must be >= 0".into()));
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::Parameter("ridge_lambda must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EsnModel {
    config: EsnConfig,
    w_in: DenseMatrix,
    w: DenseMatrix,
    w_sparse: CsrMatrix,
    w_out: Option<DenseMatrix>,
}

impl PartialEq for EsnModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.w_in == other.w_in && self.w == other.w && self.w_out == other.w_out
    }
}

impl EsnModel {
    /// Draws input and reservoir weights and rescales the reservoir to the
    /// configured spectral radius.
    pub fn init(config: EsnConfig, input_dim: usize) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::Parameter("ESN input_dim must be >= 1".into()));
        }
        let n = config.reservoir_size;
        let base = RngStream::new(config.seed);
        for attempt in 0..=MAX_RESEEDS {
            let mut rng = base.derive(attempt);
            let s = config.input_scale;
            let w_in = DenseMatrix::from_fn(n, input_dim, |_, _| rng.uniform_range(-s, s));
            let density = config.reservoir_density;
            let raw = DenseMatrix::from_fn(n, n, |_, _| {
                if density >= 1.0 || rng.uniform() < density {
                    rng.uniform_range(-1.0, 1.0)
                } else {
                    0.0
                }
            });
            let rho = power_estimate(&CsrMatrix::from_dense(&raw), DEFAULT_MAX_ITERS, DEFAULT_TOL);
            if rho < 1e-9 {
                continue;
            }
            let w = raw.scale(config.spectral_radius / rho);
            return Ok(EsnModel {
                w_sparse: CsrMatrix::from_dense(&w),
                config,
                w_in,
                w,
                w_out: None,
            });
        }
        Err(Error::Parameter(format!(
            "reservoir draw degenerate (spectral radius ~0) after {MAX_RESEEDS} reseeds; raise density or size"
        )))
    }

    /// Model with explicit weights; used for hand-built examples and loading.
    pub fn from_weights(
        config: EsnConfig,
        w_in: DenseMatrix,
        w: DenseMatrix,
        w_out: Option<DenseMatrix>,
    ) -> Result<Self> {
        let n = w_in.rows();
        if w.shape() != (n, n) {
            return Err(Error::shape("esn reservoir", w.shape(), (n, n)));
        }
        if let Some(out) = &w_out {
            if out.rows() != n + 1 {
                return Err(Error::shape("esn readout", out.shape(), (n + 1, out.cols())));
            }
        }
        Ok(EsnModel {
            config: EsnConfig {
                reservoir_size: n,
                ..config
            },
            w_sparse: CsrMatrix::from_dense(&w),
            w_in,
            w,
            w_out,
        })
    }

    pub fn config(&self) -> &EsnConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.cols()
    }

    pub fn reservoir_size(&self) -> usize {
        self.w.rows()
    }

    pub fn input_weights(&self) -> &DenseMatrix {
        &self.w_in
    }

    pub fn reservoir(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn readout(&self) -> Option<&DenseMatrix> {
        self.w_out.as_ref()
    }

    pub fn is_fitted(&self) -> bool {
        self.w_out.is_some()
    }

    /// One reservoir update `tanh(drive + W·x)` where `drive = W_in·u`.
    pub fn step(&self, drive: &[f64], x: &[f64]) -> Vec<f64> {
        let mut wx = vec![0.0; x.len()];
        self.w_sparse.matvec_into(x, &mut wx);
        drive.iter().zip(&wx).map(|(d, r)| (d + r).tanh()).collect()
    }

    pub fn drive(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.input_dim() {
            return Err(Error::shape("esn input", (1, u.len()), (1, self.input_dim())));
        }
        Ok(self.w_in.row_iter().map(|r| dot(r, u)).collect())
    }

    /// Fixed-point state for input `u`, starting from zero.
    pub fn state(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.state_from(u, &vec![0.0; self.reservoir_size()])
    }

    /// Fixed-point state for input `u` from an arbitrary starting state.
    pub fn state_from(&self, u: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        if x0.len() != self.reservoir_size() {
            return Err(Error::shape("esn state", (1, x0.len()), (1, self.reservoir_size())));
        }
        let drive = self.drive(u)?;
        let mut x = x0.to_vec();
        for _ in 0..self.config.state_iters {
            let next = self.step(&drive, &x);
            let delta = next.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            x = next;
            if delta < self.config.state_tol {
                break;
            }
        }
        Ok(x)
    }

    /// States for every row of `x`, one output row per input row.
    pub fn states(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape("esn states", x.shape(), (x.rows(), self.input_dim())));
        }
        let n = self.reservoir_size();
        let mut out = DenseMatrix::zeros(x.rows(), n);
        out.data_mut()
            .par_chunks_mut(n)
            .enumerate()
            .try_for_each(|(i, row)| -> Result<()> {
                row.copy_from_slice(&self.state(x.row(i))?);
                Ok(())
            })?;
        Ok(out)
    }

    /// Trains the readout by ridge regression on `[state, 1]`.
    pub fn fit(&mut self, x: &DenseMatrix, y: &DenseMatrix) -> Result<()> {
        if x.rows() != y.rows() {
            return Err(Error::shape("esn fit", x.shape(), y.shape()));
        }
        if x.rows() == 0 {
            return Err(Error::EmptyInput("esn fit"));
        }
        let design = self.states(x)?.with_bias_column();
        self.w_out = Some(ridge_solve(&design, y, self.config.ridge_lambda)?);
        Ok(())
    }

    pub fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let w_out = self.w_out.as_ref().ok_or(Error::State("ESN readout not fitted"))?;
        self.states(x)?.with_bias_column().matmul(w_out)
    }
}

pub fn esn_init(config: EsnConfig, input_dim: usize) -> Result<EsnModel> {
    EsnModel::init(config, input_dim)
}

pub fn esn_fit(mut model: EsnModel, x: &DenseMatrix, y: &DenseMatrix) -> Result<EsnModel> {
    model.fit(x, y)?;
    Ok(model)
}

pub fn esn_predict(model: &EsnModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    model.predict(x)
}
