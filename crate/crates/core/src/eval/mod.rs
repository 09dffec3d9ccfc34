//! Grouped K-fold evaluation, metrics and reports.

mod benchmark;
mod folds;
mod metrics;
mod report;

pub use benchmark::{benchmark_run, model_seed, BenchmarkSettings, Task};
pub use folds::{group_kfold_split, FoldPlan};
pub use metrics::{
    correlation_flat, correlation_score, correlation_score_columns, correlation_score_detailed, mse,
    pearson_counted, pearson_row, CorrelationStats, Diagnostics,
};
pub use report::{format_f64, render_bar_chart, EvalReport, Metric, ReportRow, RESULTS_HEADER};
