//! Synthetic paired-modality tasks with a known linear latent ground truth.

use crate::error::{Error, Result};
use crate::eval::Task;
use crate::matrix::{DenseMatrix, MatrixData, SparseMatrixCoo};
use crate::rng::RngStream;

/// Minimum pairwise distance between group offsets.
const MIN_OFFSET_SEPARATION: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_cells: usize,
    pub d_input: usize,
    pub d_output: usize,
    pub latent_rank: usize,
    pub noise_sigma: f64,
    pub n_groups: usize,
    /// Target fraction of structural zeros in the input.
    pub sparsity: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec::desk()
    }
}

impl SynthSpec {
    pub fn desk() -> Self {
        SynthSpec {
            n_cells: 2000,
            d_input: 256,
            d_output: 32,
            latent_rank: 8,
            noise_sigma: 0.05,
            n_groups: 6,
            sparsity: 0.5,
            seed: 7,
        }
    }

    /// A Multiome-shaped task scaled down by `factor`.
    pub fn multiome_scaled(factor: usize) -> Self {
        let f = factor.max(1);
        SynthSpec {
            n_cells: (105_942 / f).max(60),
            d_input: 512,
            d_output: 64,
            latent_rank: 8,
            noise_sigma: 0.05,
            n_groups: 12,
            sparsity: 0.8,
            seed: 7,
        }
    }

    /// A CITEseq-shaped task scaled down by `factor`.
    pub fn citeseq_scaled(factor: usize) -> Self {
        let f = factor.max(1);
        SynthSpec {
            n_cells: (70_988 / f).max(60),
            d_input: 219,
            d_output: 32,
            latent_rank: 8,
            noise_sigma: 0.05,
            n_groups: 12,
            sparsity: 0.5,
            seed: 11,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.d_input == 0 || self.d_output == 0 || self.latent_rank == 0 {
            return bad("d_input, d_output and latent_rank must be >= 1".into());
        }
        if self.latent_rank > self.d_input.min(self.d_output) {
            return bad(format!(
                "latent_rank {} exceeds min(d_input, d_output) = {}",
                self.latent_rank,
                self.d_input.min(self.d_output)
            ));
        }
        if self.n_groups < 3 {
            return bad(format!("n_groups must be >= 3, got {}", self.n_groups));
        }
        if self.n_cells < self.n_groups {
            return bad(format!("n_cells {} < n_groups {}", self.n_cells, self.n_groups));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return bad(format!("sparsity must lie in [0, 1), got {}", self.sparsity));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthTask {
    pub x: SparseMatrixCoo,
    pub y: DenseMatrix,
    pub groups: Vec<String>,
    pub b_true: DenseMatrix,
    /// The latent factors Z (n_cells × latent_rank).
    pub latent: DenseMatrix,
    /// Group index per cell.
    pub group_index: Vec<usize>,
}

impl SynthTask {
    /// The noiseless target `Z·B`.
    pub fn ideal_prediction(&self) -> DenseMatrix {
        self.latent.matmul(&self.b_true).expect("latent and B_true agree by construction")
    }

    pub fn into_task(self, name: impl Into<String>) -> Task {
        Task {
            name: name.into(),
            features: MatrixData::Sparse(self.x),
            targets: self.y,
            groups: self.groups,
        }
    }
}

pub fn group_label(g: usize) -> String {
    format!("group_{g}")
}

fn draw_offsets(r: usize, groups: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    loop {
        let offs: Vec<Vec<f64>> = (0..groups).map(|_| (0..r).map(|_| rng.normal()).collect()).collect();
        let separated = (0..groups).all(|a| {
            (a + 1..groups).all(|b| {
                let d2: f64 = offs[a].iter().zip(&offs[b]).map(|(p, q)| (p - q).powi(2)).sum();
                d2.sqrt() >= MIN_OFFSET_SEPARATION
            })
        });
        if separated {
            return offs;
        }
    }
}

pub fn gen_task(spec: &SynthSpec) -> Result<SynthTask> {
    spec.validate()?;
    let (n, r) = (spec.n_cells, spec.latent_rank);
    let root = RngStream::new(spec.seed);

    let offsets = draw_offsets(r, spec.n_groups, &mut root.derive(1));
    let group_index: Vec<usize> = (0..n).map(|i| i * spec.n_groups / n).collect();
    let mut zr = root.derive(2);
    let latent = DenseMatrix::from_fn(n, r, |i, j| zr.normal() + offsets[group_index[i]][j]);

    let scale = 1.0 / (r as f64).sqrt();
    let mut ar = root.derive(3);
    let a = DenseMatrix::from_fn(r, spec.d_input, |_, _| ar.normal() * scale);
    let mut br = root.derive(4);
    let b_true = DenseMatrix::from_fn(r, spec.d_output, |_, _| br.normal() * scale);

    let mut pre = latent.matmul(&a)?;
    let mut xn = root.derive(5);
    if spec.noise_sigma > 0.0 {
        for v in pre.data_mut() {
            *v += spec.noise_sigma * xn.normal();
        }
    }
    let total = pre.data().len();
    let zeros = (spec.sparsity * total as f64).round() as usize;
    let mut sorted = pre.data().to_vec();
    sorted.sort_by(f64::total_cmp);
    let tau = if zeros == 0 { sorted[0] - 1.0 } else { sorted[zeros - 1] };
    let mut x = SparseMatrixCoo::new(n, spec.d_input);
    for i in 0..n {
        for (j, &v) in pre.row(i).iter().enumerate() {
            if v > tau {
                x.push(i, j, v - tau)?;
            }
        }
    }

    let mut y = latent.matmul(&b_true)?;
    let mut yn = root.derive(6);
    if spec.noise_sigma > 0.0 {
        for v in y.data_mut() {
            *v += spec.noise_sigma * yn.normal();
        }
    }

    Ok(SynthTask {
        x,
        y,
        groups: group_index.iter().map(|&g| group_label(g)).collect(),
        b_true,
        latent,
        group_index,
    })
}
