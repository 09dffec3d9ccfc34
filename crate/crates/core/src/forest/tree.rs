use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;

use super::ForestConfig;

/// Relative margin a split's gain must clear to displace the current best.
/// Candidates are scanned by ascending (feature, threshold), so gains equal
/// within this margin resolve to the lower feature, then lower threshold.
pub const SPLIT_TIE_TOL: f64 = 1e-10;

/// Minimum gain, relative to the node's impurity, for a split to count.
pub const MIN_RELATIVE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { value: Vec<f64>, samples: usize },
}

/// A split found by [`best_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Decrease in summed squared deviation (over all outputs).
    pub gain: f64,
}

#[inline]
pub fn gain_improves(candidate: f64, best: Option<f64>) -> bool {
    match best {
        None => true,
        Some(b) => candidate > b + SPLIT_TIE_TOL * b.abs(),
    }
}

/// Total squared deviation from the mean, summed over output columns.
pub fn node_impurity(y: &DenseMatrix, samples: &[usize]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mean = mean_target(y, samples);
    samples
        .iter()
        .map(|&i| y.row(i).iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>())
        .sum()
}

pub fn mean_target(y: &DenseMatrix, samples: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; y.cols()];
    for &i in samples {
        m.iter_mut().zip(y.row(i)).for_each(|(a, b)| *a += b);
    }
    let n = samples.len() as f64;
    m.iter_mut().for_each(|a| *a /= n);
    m
}

/// Best (feature, threshold) split of `samples` over `features`, scanned in
/// ascending order. Returns `None` when no split has positive gain.
pub fn best_split(
    x: &DenseMatrix,
    y: &DenseMatrix,
    samples: &[usize],
    features: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitChoice> {
    let n = samples.len();
    let min_leaf = min_samples_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let parent = node_impurity(y, samples);
    if !(parent > 0.0) {
        return None;
    }
    let q = y.cols();
    let mean = mean_target(y, samples);
    // centered targets keep the gain formula free of large cancellations
    let centered: Vec<Vec<f64>> = samples
        .iter()
        .map(|&i| y.row(i).iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = (0..n).collect();
    let mut left_sum = vec![0.0; q];
    for &f in features {
        order.sort_by(|&a, &b| {
            x.get(samples[a], f)
                .partial_cmp(&x.get(samples[b], f))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        left_sum.iter_mut().for_each(|s| *s = 0.0);
        for pos in 0..n - 1 {
            let k = order[pos];
            left_sum.iter_mut().zip(&centered[k]).for_each(|(s, v)| *s += v);
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let lo = x.get(samples[k], f);
            let hi = x.get(samples[order[pos + 1]], f);
            if !(lo < hi) {
                continue;
            }
            let s2: f64 = left_sum.iter().map(|s| s * s).sum();
            let gain = s2 * (1.0 / n_left as f64 + 1.0 / n_right as f64);
            if gain_improves(gain, best.map(|b| b.gain)) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }
    best.filter(|b| b.gain > MIN_RELATIVE_GAIN * parent)
}

/// Threshold strictly separating `lo < hi`, with `lo <= t < hi`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

struct Frontier {
    node: usize,
    samples: Vec<usize>,
    split: Option<SplitChoice>,
}

/// CART regression tree grown best-first up to a leaf budget.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_features: usize,
    n_outputs: usize,
}

impl RegressionTree {
    /// Grows a tree on the listed sample rows (repeats allowed, as with a
    /// bootstrap draw).
    pub fn fit_on(
        x: &DenseMatrix,
        y: &DenseMatrix,
        samples: Vec<usize>,
        config: &ForestConfig,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::shape("tree fit", x.shape(), y.shape()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyInput("tree fit"));
        }
        let p = x.cols();
        let n_candidates = ((config.feature_fraction * p as f64).ceil() as usize).clamp(1, p.max(1));
        let mut pick_features = |rng: &mut RngStream| -> Vec<usize> {
            if n_candidates >= p {
                (0..p).collect()
            } else {
                rng.sample_indices(p, n_candidates)
            }
        };
        let find = |samples: &[usize], rng: &mut RngStream, pick: &mut dyn FnMut(&mut RngStream) -> Vec<usize>| {
            let feats = pick(rng);
            best_split(x, y, samples, &feats, config.min_samples_leaf)
        };

        let mut nodes = vec![Node::Leaf {
            value: Vec::new(),
            samples: 0,
        }];
        let root_split = if config.max_leaf_nodes > 1 {
            find(&samples, rng, &mut pick_features)
        } else {
            None
        };
        let mut frontier = vec![Frontier {
            node: 0,
            samples,
            split: root_split,
        }];
        let mut leaves = 1;

        while leaves < config.max_leaf_nodes {
            // largest gain wins; equal gains go to the older node
            let mut pick: Option<usize> = None;
            for (i, f) in frontier.iter().enumerate() {
                if let Some(s) = f.split {
                    let better = match pick {
                        None => true,
                        Some(j) => {
                            let g = frontier[j].split.expect("picked has split").gain;
                            s.gain > g || (s.gain == g && f.node < frontier[j].node)
                        }
                    };
                    if better {
                        pick = Some(i);
                    }
                }
            }
            let Some(i) = pick else { break };
            let entry = frontier.swap_remove(i);
            let split = entry.split.expect("picked has split");
            let (left_s, right_s): (Vec<usize>, Vec<usize>) = entry
                .samples
                .iter()
                .partition(|&&s| x.get(s, split.feature) <= split.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { value: Vec::new(), samples: 0 });
            nodes.push(Node::Leaf { value: Vec::new(), samples: 0 });
            nodes[entry.node] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            leaves += 1;
            let budget_left = leaves < config.max_leaf_nodes;
            for (node, s) in [(left, left_s), (right, right_s)] {
                let sp = if budget_left { find(&s, rng, &mut pick_features) } else { None };
                frontier.push(Frontier { node, samples: s, split: sp });
            }
        }

        for f in frontier {
            nodes[f.node] = Node::Leaf {
                value: mean_target(y, &f.samples),
                samples: f.samples.len(),
            };
        }
        Ok(RegressionTree {
            nodes,
            n_features: p,
            n_outputs: y.cols(),
        })
    }

    /// Grows a tree on every row of `x`.
    pub fn fit(x: &DenseMatrix, y: &DenseMatrix, config: &ForestConfig, rng: &mut RngStream) -> Result<Self> {
        Self::fit_on(x, y, (0..x.rows()).collect(), config, rng)
    }

    /// Validates and wraps an explicit node list (root at index 0).
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize, n_outputs: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Integrity("tree has no nodes".into()));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Split { feature, left, right, threshold } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return Err(Error::Integrity(format!("node {i}: bad split")));
                    }
                    for &c in [left, right] {
                        if c <= i || c >= nodes.len() {
                            return Err(Error::Integrity(format!("node {i}: child {c} out of order")));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf { value, .. } => {
                    if value.len() != n_outputs {
                        return Err(Error::Integrity(format!("node {i}: leaf width {}", value.len())));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::Integrity("tree nodes do not form a single tree".into()));
        }
        Ok(RegressionTree { nodes, n_features, n_outputs })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Index of the leaf node `row` lands in.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> &[f64] {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value, .. } => value,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub fn predict(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.n_features {
            return Err(Error::shape("tree predict", x.shape(), (x.rows(), self.n_features)));
        }
        let mut out = DenseMatrix::zeros(x.rows(), self.n_outputs);
        for i in 0..x.rows() {
            out.row_mut(i).copy_from_slice(self.predict_row(x.row(i)));
        }
        Ok(out)
    }
}

pub fn tree_fit(x: &DenseMatrix, y: &DenseMatrix, config: &ForestConfig, rng: &mut RngStream) -> Result<RegressionTree> {
    RegressionTree::fit(x, y, config, rng)
}
