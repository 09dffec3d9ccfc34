use std::time::Instant;

use super::folds::group_kfold_split;
use super::metrics::{correlation_score_detailed, mse};
use super::report::{EvalReport, ReportRow};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, MatrixData};
use crate::model::Learner;
use crate::preprocess::{log1p_transform, Projector};
use crate::rng::RngStream;

/// One modality-translation dataset.
#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub features: MatrixData,
    pub targets: DenseMatrix,
    /// One label per sample (e.g. donor); samples sharing a label share a fold.
    pub groups: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSettings {
    pub folds: usize,
    pub seed: u64,
    /// Truncated-SVD projection size.
    pub components: usize,
    /// Apply `ln(1 + x)` to the features before projection.
    pub log1p: bool,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        BenchmarkSettings {
            folds: 3,
            seed: 0,
            components: 64,
            log1p: false,
        }
    }
}

/// Seed for model `model` on fold `fold`.
pub fn model_seed(run_seed: u64, fold: usize, model: usize) -> u64 {
    RngStream::new(run_seed)
        .derive(((fold as u64 + 1) << 32) | model as u64)
        .next_u64()
}

/// Grouped K-fold evaluation of every learner on one task. The projector is
/// refitted on the training rows of each fold.
pub fn benchmark_run(task: &Task, learners: &[&dyn Learner], settings: &BenchmarkSettings) -> Result<EvalReport> {
    let n = task.features.rows();
    if task.targets.rows() != n || task.groups.len() != n {
        return Err(Error::Parameter(format!(
            "task `{}`: {} feature rows, {} target rows, {} group labels",
            task.name,
            n,
            task.targets.rows(),
            task.groups.len()
        )));
    }
    let base = RngStream::new(settings.seed);
    let plan = group_kfold_split(&task.groups, settings.folds, &mut base.derive(0))
        .map_err(|e| e.context(format!("task `{}`", task.name)))?;
    let features = if settings.log1p {
        log1p_transform(&task.features)?
    } else {
        task.features.clone()
    };

    struct Acc {
        corr: f64,
        mse: f64,
        fit: f64,
        predict: f64,
        zero_var: usize,
    }
    let mut acc: Vec<Acc> = learners
        .iter()
        .map(|_| Acc { corr: 0.0, mse: 0.0, fit: 0.0, predict: 0.0, zero_var: 0 })
        .collect();

    for fold in 0..plan.k() {
        let ctx = |what: &str| format!("task `{}`, fold {fold}, {what}", task.name);
        let train = plan.train_indices(fold);
        let valid = plan.validation_indices(fold);
        let (projector, z_train) = Projector::fit_transform(
            &features.select_rows(&train),
            settings.components,
            &mut base.derive(1 + fold as u64),
        )
        .map_err(|e| e.context(ctx("preprocessing")))?;
        let z_valid = projector
            .apply(&features.select_rows(&valid))
            .map_err(|e| e.context(ctx("preprocessing")))?;
        let y_train = task.targets.select_rows(&train);
        let y_valid = task.targets.select_rows(&valid);

        for (mi, learner) in learners.iter().enumerate() {
            let name = learner.name();
            let started = Instant::now();
            let model = learner
                .fit(&z_train, &y_train, model_seed(settings.seed, fold, mi))
                .map_err(|e| e.context(ctx(&format!("model `{name}`"))))?;
            let fitted = Instant::now();
            let pred = model
                .predict(&z_valid)
                .map_err(|e| e.context(ctx(&format!("model `{name}`"))))?;
            let done = Instant::now();
            let stats = correlation_score_detailed(&y_valid, &pred)?;
            let a = &mut acc[mi];
            a.corr += stats.score;
            a.mse += mse(&y_valid, &pred)?;
            a.fit += (fitted - started).as_secs_f64();
            a.predict += (done - fitted).as_secs_f64();
            a.zero_var += stats.diagnostics.zero_variance;
        }
    }

    let k = plan.k() as f64;
    let rows = learners
        .iter()
        .zip(acc)
        .map(|(l, a)| ReportRow {
            model: l.name(),
            task: task.name.clone(),
            correlation_score: a.corr / k,
            mse: a.mse / k,
            fit_seconds: a.fit,
            predict_seconds: a.predict,
            folds: plan.k(),
            seed: settings.seed,
            zero_variance_rows: a.zero_var,
        })
        .collect();
    Ok(EvalReport::new(rows))
}
