use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Per-sample fold assignment in which all samples of a group share a fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn validation_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Grouped K-fold: distinct groups (in sorted order) are shuffled with `rng`
/// and dealt round-robin to `k` folds.
pub fn group_kfold_split<G: Ord + Clone>(groups: &[G], k: usize, rng: &mut RngStream) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Parameter(format!("grouped K-fold needs k >= 2, got {k}")));
    }
    let mut distinct: Vec<G> = groups.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::Parameter(format!(
            "{} distinct groups cannot fill {k} folds",
            distinct.len()
        )));
    }
    rng.shuffle(&mut distinct);
    let fold_of: BTreeMap<G, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, i % k))
        .collect();
    Ok(FoldPlan {
        k,
        assignments: groups.iter().map(|g| fold_of[g]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_groups_three_folds() {
        let groups = ["a", "a", "b", "b", "c", "c"];
        let plan = group_kfold_split(&groups, 3, &mut RngStream::new(1)).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for f in 0..3 {
            let v = plan.validation_indices(f);
            assert_eq!(v.len(), 2);
            assert_eq!(groups[v[0]], groups[v[1]]);
            seen.insert(groups[v[0]]);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn k_below_two_rejected() {
        assert!(group_kfold_split(&[1, 2, 3], 1, &mut RngStream::new(1)).is_err());
    }

    #[test]
    fn too_few_groups_rejected() {
        assert!(group_kfold_split(&[1, 1, 2], 3, &mut RngStream::new(1)).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let groups: Vec<u32> = (0..50).map(|i| i % 7).collect();
        let a = group_kfold_split(&groups, 3, &mut RngStream::new(5)).unwrap();
        let b = group_kfold_split(&groups, 3, &mut RngStream::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fold_group_counts_differ_by_at_most_one() {
        let groups: Vec<u32> = (0..100).map(|i| i % 11).collect();
        let plan = group_kfold_split(&groups, 3, &mut RngStream::new(2)).unwrap();
        let mut per_fold = vec![std::collections::BTreeSet::new(); 3];
        for (g, &f) in groups.iter().zip(plan.assignments()) {
            per_fold[f].insert(*g);
        }
        let sizes: Vec<usize> = per_fold.iter().map(|s| s.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}
