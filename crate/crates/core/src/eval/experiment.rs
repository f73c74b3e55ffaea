use std::fs::File;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::knn::{knn_classify_grid, Metric, SparseRow};
use super::metrics::{compute_metrics, MetricsReport};
use super::split::{run_rng, stratified_split, validation_holdout, SplitSpec};
use crate::embed::{embed_corpus, EmbeddingConfig, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::kmer::corpus_vocabulary;
use crate::murmur3::HashSeed;
use crate::tune::{CollisionMeter, CollisionReport, SearchPolicy, TuneResult};

/// How the table size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableSizing {
    Fixed(u64),
    CollisionTarget(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    /// Candidate neighbor counts; the best on a validation slice of the
    /// training set is used for the test predictions.
    pub grid: Vec<usize>,
    pub metric: Metric,
    pub validation_fraction: f64,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            grid: vec![1, 3, 5],
            metric: Metric::Euclidean,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub seed: HashSeed,
    pub sizing: TableSizing,
    pub split: SplitSpec,
    pub knn: KnnParams,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub tune_s: f64,
    pub embedding_generation_s: f64,
    pub train_s: f64,
    pub predict_s: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub metrics: MetricsReport,
    pub embedding: EmbeddingConfig,
    pub collision: CollisionReport,
    pub tune: Option<TuneResult>,
    pub label_set: Vec<String>,
    /// Neighbor count picked on validation, per run.
    pub chosen_neighbors: Vec<usize>,
    pub timings: Timings,
}

fn pick_neighbors(
    rows: &[SparseRow<'_>],
    labels: &[usize],
    train: &[usize],
    n_labels: usize,
    params: &KnnParams,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<usize> {
    let (fit, val) = validation_holdout(train, labels, params.validation_fraction, rng);
    let grid: Vec<usize> = params.grid.iter().copied().filter(|&n| n <= fit.len()).collect();
    if grid.len() <= 1 || val.is_empty() {
        return grid
            .first()
            .or(params.grid.first())
            .copied()
            .ok_or_else(|| Error::invalid("empty neighbor grid"));
    }
    let fit_rows: Vec<SparseRow> = fit.iter().map(|&i| rows[i]).collect();
    let fit_labels: Vec<usize> = fit.iter().map(|&i| labels[i]).collect();
    let val_rows: Vec<SparseRow> = val.iter().map(|&i| rows[i]).collect();
    let val_labels: Vec<usize> = val.iter().map(|&i| labels[i]).collect();
    let preds = knn_classify_grid(&fit_rows, &fit_labels, &val_rows, &grid, params.metric)?;
    let mut best = (grid[0], f64::NEG_INFINITY);
    for (&n, p) in grid.iter().zip(&preds) {
        let acc = compute_metrics(&val_labels, p, n_labels)?.accuracy;
        if acc > best.1 {
            best = (n, acc);
        }
    }
    Ok(best.0)
}

/// Runs the repeated-holdout kNN protocol on an existing embedding.
pub fn evaluate_matrix(
    matrix: &EmbeddingMatrix,
    label_set: &[String],
    split: &SplitSpec,
    knn: &KnnParams,
) -> Result<(MetricsReport, Vec<usize>)> {
    split.validate()?;
    if knn.grid.is_empty() || knn.grid.contains(&0) {
        return Err(Error::invalid("neighbor grid must be non-empty and positive"));
    }
    let labels: Vec<usize> = matrix
        .labels
        .iter()
        .zip(&matrix.ids)
        .map(|(l, id)| {
            let l = l.as_deref().ok_or_else(|| Error::MissingLabel(id.clone()))?;
            label_set
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::invalid(format!("label `{l}` not in label set")))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SparseRow> = matrix.rows.iter().map(|r| r.entries()).collect();

    let mut per_run = Vec::with_capacity(split.n_runs);
    let mut chosen = Vec::with_capacity(split.n_runs);
    let (mut train_s, mut predict_s) = (0.0, 0.0);
    for run in 0..split.n_runs as u64 {
        let (train, test) = stratified_split(matrix, split, run)?;
        // A separate stream from the split's own.
        let mut rng = run_rng(split.rng_seed ^ 0x5eed_u64.rotate_left(32), run);

        let t = Instant::now();
        let n = pick_neighbors(&rows, &labels, &train, label_set.len(), knn, &mut rng)?;
        train_s += t.elapsed().as_secs_f64();

        let train_rows: Vec<SparseRow> = train.iter().map(|&i| rows[i]).collect();
        let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let test_rows: Vec<SparseRow> = test.iter().map(|&i| rows[i]).collect();
        let t = Instant::now();
        let pred = knn_classify_grid(&train_rows, &train_labels, &test_rows, &[n], knn.metric)?.remove(0);
        predict_s += t.elapsed().as_secs_f64();

        let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        per_run.push(compute_metrics(&truth, &pred, label_set.len())?);
        chosen.push(n);
    }
    let mut report = MetricsReport::aggregate(per_run)?;
    report.train_time_s = train_s / split.n_runs as f64;
    report.predict_time_s = predict_s / split.n_runs as f64;
    Ok((report, chosen))
}

/// Tunes the table size when a collision target is given, embeds once, then
/// runs the repeated-holdout evaluation.
pub fn run_experiment(corpus: &Corpus, config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Some(r) = corpus.records().iter().find(|r| r.label.is_none()) {
        return Err(Error::MissingLabel(r.id.clone()));
    }
    let mut timings = Timings::default();

    let vocabulary = corpus_vocabulary(corpus, config.k)?;
    let mut meter = CollisionMeter::new(&vocabulary, config.seed)?;
    let (m, tune) = match config.sizing {
        TableSizing::Fixed(m) => (m, None),
        TableSizing::CollisionTarget(target) => {
            let t = Instant::now();
            let result = meter.tune(target, SearchPolicy::default())?;
            timings.tune_s = t.elapsed().as_secs_f64();
            (result.chosen_m, Some(result))
        }
    };
    let embedding = EmbeddingConfig::new(config.k, m, config.seed)?;
    let collision = meter.measure(m)?;

    let t = Instant::now();
    let matrix = embed_corpus(corpus, &embedding)?;
    timings.embedding_generation_s = t.elapsed().as_secs_f64();

    let label_set = corpus.label_set().to_vec();
    let (metrics, chosen_neighbors) = evaluate_matrix(&matrix, &label_set, &config.split, &config.knn)?;
    timings.train_s = metrics.train_time_s;
    timings.predict_s = metrics.predict_time_s;

    Ok(ExperimentOutcome {
        metrics,
        embedding,
        collision,
        tune,
        label_set,
        chosen_neighbors,
        timings,
    })
}

/// Serializable summary written as the `metrics.json` of an evaluation.
/// Contains no timings, so identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub method: String,
    pub k: usize,
    pub m: u64,
    pub seed: HashSeed,
    pub collision_target: Option<f64>,
    pub collision_fraction: f64,
    pub label_set: Vec<String>,
    pub chosen_neighbors: Vec<usize>,
    pub metrics: MetricsReport,
}

pub const METHOD_NAME: &str = "Murmur2Vec+KNN";

impl ExperimentOutcome {
    pub fn metrics_file(&self, sizing: TableSizing) -> MetricsFile {
        MetricsFile {
            method: METHOD_NAME.to_string(),
            k: self.embedding.k,
            m: self.embedding.m,
            seed: self.embedding.seed,
            collision_target: match sizing {
                TableSizing::CollisionTarget(t) => Some(t),
                TableSizing::Fixed(_) => None,
            },
            collision_fraction: self.collision.collision_fraction,
            label_set: self.label_set.clone(),
            chosen_neighbors: self.chosen_neighbors.clone(),
            metrics: self.metrics.clone(),
        }
    }

    /// Writes one results-table row: collision (%), method, the five mean
    /// metrics and the mean training time.
    pub fn write_table_row(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record([
            "collision",
            "method",
            "accuracy",
            "precision",
            "recall",
            "f1_weighted",
            "f1_macro",
            "train_time_s",
        ])?;
        let m = &self.metrics;
        w.write_record([
            format!("{}", self.collision.collision_fraction * 100.0),
            METHOD_NAME.to_string(),
            m.accuracy.to_string(),
            m.precision_weighted.to_string(),
            m.recall_weighted.to_string(),
            m.f1_weighted.to_string(),
            m.f1_macro.to_string(),
            m.train_time_s.to_string(),
        ])?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}
