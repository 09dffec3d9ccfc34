mod common;

use common::*;
use omx_core::forest::{forest_fit, forest_predict, ForestConfig, ForestModel, Node, RegressionTree};
use omx_core::{DenseMatrix, RngStream};

fn sse(y: &DenseMatrix, rows: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    (0..y.cols())
        .map(|j| {
            let m = rows.iter().map(|&i| y.get(i, j)).sum::<f64>() / rows.len() as f64;
            rows.iter().map(|&i| (y.get(i, j) - m).powi(2)).sum::<f64>()
        })
        .sum()
}

/// Every (feature, midpoint) split by direct SSE recomputation.
fn exhaustive(x: &DenseMatrix, y: &DenseMatrix) -> Vec<(usize, f64, f64)> {
    let all: Vec<usize> = (0..x.rows()).collect();
    let parent = sse(y, &all);
    let mut out = Vec::new();
    for f in 0..x.cols() {
        let mut vals: Vec<f64> = x.column(f);
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x.get(i, f) <= t);
            out.push((f, t, parent - sse(y, &l) - sse(y, &r)));
        }
    }
    out
}

fn stump() -> ForestConfig {
    ForestConfig {
        n_trees: 1,
        max_leaf_nodes: 2,
        bootstrap: false,
        ..ForestConfig::default()
    }
}

#[test]
fn first_split_matches_exhaustive_enumeration() {
    let mut rng = RngStream::new(2024);
    let mut checked = 0;
    for case in 0..200 {
        let n = 2 + rng.index(7);
        let outputs = 1 + rng.index(3);
        let discrete = case % 3 == 0;
        let x = DenseMatrix::from_fn(n, 2, |_, _| if discrete { rng.index(3) as f64 } else { rng.normal() });
        let y = DenseMatrix::from_fn(n, outputs, |_, _| rng.normal());
        let cands = exhaustive(&x, &y);
        let tree = RegressionTree::fit(&x, &y, &stump(), &mut RngStream::new(case)).unwrap();
        let best = cands.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        match &tree.nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                let tol = 1e-10 * best.abs().max(1e-300);
                let first = cands.iter().find(|c| c.2 >= best - tol).unwrap();
                assert_eq!(*feature, first.0, "case {case}: {cands:?}");
                assert!((threshold - first.1).abs() <= 4.0 * f64::EPSILON * first.1.abs().max(1.0), "case {case}");
                let side = |t: f64| (0..n).map(|i| x.get(i, first.0) <= t).collect::<Vec<_>>();
                assert_eq!(side(*threshold), side(first.1), "case {case}");
                checked += 1;
            }
            Node::Leaf { .. } => assert!(cands.is_empty() || best <= 1e-12 * sse(&y, &(0..n).collect::<Vec<_>>()), "case {case}"),
        }
    }
    assert!(checked > 150);
}

#[test]
fn leaf_values_replay_training_means() {
    let mut rng = RngStream::new(9);
    let x = gaussian(300, 5, &mut rng);
    let y = DenseMatrix::from_fn(300, 3, |i, j| x.get(i, j).sin() + 0.1 * rng.normal());
    let cfg = ForestConfig { max_leaf_nodes: 25, bootstrap: false, ..ForestConfig::default() };
    let tree = RegressionTree::fit(&x, &y, &cfg, &mut RngStream::new(1)).unwrap();
    assert_eq!(tree.n_leaves(), 25);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes().len()];
    for i in 0..300 {
        members[tree.leaf_index(x.row(i))].push(i);
    }
    for (id, node) in tree.nodes().iter().enumerate() {
        if let Node::Leaf { value, samples } = node {
            assert_eq!(*samples, members[id].len());
            for j in 0..3 {
                let mean = members[id].iter().map(|&i| y.get(i, j)).sum::<f64>() / members[id].len() as f64;
                assert!((value[j] - mean).abs() <= 1e-10, "leaf {id}");
            }
        }
    }
}

fn training_sse(tree: &RegressionTree, x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    let p = tree.predict(x).unwrap();
    p.data().iter().zip(y.data()).map(|(a, b)| (a - b).powi(2)).sum()
}

#[test]
fn impurity_nonincreasing_in_leaf_budget() {
    let mut rng = RngStream::new(10);
    let x = gaussian(200, 4, &mut rng);
    let y = DenseMatrix::from_fn(200, 2, |i, j| x.get(i, j) * x.get(i, 3) + 0.05 * rng.normal());
    let mut prev = f64::INFINITY;
    for leaves in 1..40 {
        let cfg = ForestConfig { max_leaf_nodes: leaves, bootstrap: false, ..ForestConfig::default() };
        let t = RegressionTree::fit(&x, &y, &cfg, &mut RngStream::new(0)).unwrap();
        assert!(t.n_leaves() <= leaves);
        let s = training_sse(&t, &x, &y);
        assert!(s <= prev + 1e-9, "{leaves}: {s} > {prev}");
        prev = s;
    }
}

#[test]
fn min_samples_leaf_respected() {
    let mut rng = RngStream::new(11);
    let x = gaussian(120, 3, &mut rng);
    let y = gaussian(120, 1, &mut rng);
    let cfg = ForestConfig { max_leaf_nodes: 60, min_samples_leaf: 7, bootstrap: false, ..ForestConfig::default() };
    let t = RegressionTree::fit(&x, &y, &cfg, &mut RngStream::new(0)).unwrap();
    for n in t.nodes() {
        if let Node::Leaf { samples, .. } = n {
            assert!(*samples >= 7);
        }
    }
}

#[test]
fn predictions_within_target_range() {
    let mut rng = RngStream::new(12);
    let x = gaussian(150, 4, &mut rng);
    let y = gaussian(150, 3, &mut rng);
    let f = forest_fit(&x, &y, &ForestConfig { n_trees: 20, max_leaf_nodes: 30, ..ForestConfig::default() }).unwrap();
    let p = forest_predict(&f, &gaussian(100, 4, &mut rng).scale(3.0)).unwrap();
    for j in 0..3 {
        let col = y.column(j);
        let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!(p.column(j).iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }
}

#[test]
fn forest_is_mean_of_trees() {
    let mut rng = RngStream::new(13);
    let x = gaussian(80, 3, &mut rng);
    let y = gaussian(80, 2, &mut rng);
    let f = forest_fit(&x, &y, &ForestConfig { n_trees: 7, max_leaf_nodes: 10, ..ForestConfig::default() }).unwrap();
    let p = f.predict(&x).unwrap();
    let mut sum = DenseMatrix::zeros(80, 2);
    for t in f.trees() {
        sum = sum.add(&t.predict(&x).unwrap()).unwrap();
    }
    assert!(max_diff(&p, &sum.scale(1.0 / 7.0)) < 1e-12);
    let rebuilt = ForestModel::from_trees(f.trees().to_vec()).unwrap();
    assert!(bitwise_eq(&rebuilt.predict(&x).unwrap(), &p));
}

#[test]
fn defaults() {
    let c = ForestConfig::default();
    assert_eq!((c.n_trees, c.max_leaf_nodes), (100, 200));
}

#[test]
fn learns_step_function() {
    let mut rng = RngStream::new(14);
    let x = gaussian(400, 2, &mut rng);
    let y = DenseMatrix::from_fn(400, 1, |i, _| if x.get(i, 0) > 0.3 { 2.0 } else { -1.0 });
    let f = forest_fit(&x, &y, &ForestConfig { n_trees: 10, max_leaf_nodes: 4, ..ForestConfig::default() }).unwrap();
    let p = f.predict(&x).unwrap();
    let acc = (0..400).filter(|&i| (p.get(i, 0) - y.get(i, 0)).abs() < 0.5).count();
    assert!(acc >= 390, "{acc}");
}
