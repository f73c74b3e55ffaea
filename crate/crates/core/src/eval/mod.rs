//! Repeated stratified holdout, a k-nearest-neighbor classifier over sparse
//! embedding rows, and the accuracy / precision / recall / F1 suite.

mod experiment;
mod knn;
mod metrics;
mod split;

pub use experiment::{
    evaluate_matrix, run_experiment, ExperimentConfig, ExperimentOutcome, KnnParams, MetricsFile, TableSizing,
    Timings, METHOD_NAME,
};
pub use knn::{knn_classify, knn_classify_grid, Metric, SparseRow};
pub use metrics::{compute_metrics, MetricsReport, RunMetrics};
pub use split::{split_labels, stratified_split, SplitSpec};
