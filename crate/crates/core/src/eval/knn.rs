use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{l1_distance, squared_l2_distance};
use crate::error::{Error, Result};

/// A sparse row: nonzero `(index, value)` pairs sorted by index.
pub type SparseRow<'a> = &'a [(u32, u64)];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    /// Exact integer distance. Euclidean is returned squared, which orders
    /// identically.
    pub fn distance(self, a: SparseRow<'_>, b: SparseRow<'_>) -> u128 {
        match self {
            Metric::Euclidean => squared_l2_distance(a, b),
            Metric::Manhattan => u128::from(l1_distance(a, b)),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "manhattan" | "l1" => Ok(Metric::Manhattan),
            other => Err(Error::invalid(format!("unknown metric `{other}`"))),
        }
    }
}

/// Indices of the `n` nearest train rows to `query`, nearest first; equal
/// distances are ordered by train index.
fn nearest(train: &[SparseRow<'_>], query: SparseRow<'_>, n: usize, metric: Metric) -> Vec<usize> {
    let mut d: Vec<(u128, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, t)| (metric.distance(t, query), i))
        .collect();
    if n < d.len() {
        d.select_nth_unstable(n - 1);
        d.truncate(n);
    }
    d.sort_unstable();
    d.into_iter().map(|(_, i)| i).collect()
}

/// Majority label; ties go to the smallest label index.
fn vote(neighbors: &[usize], labels: &[usize], counts: &mut Vec<usize>) -> usize {
    counts.iter_mut().for_each(|c| *c = 0);
    for &i in neighbors {
        let l = labels[i];
        if l >= counts.len() {
            counts.resize(l + 1, 0);
        }
        counts[l] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

fn check(train: &[SparseRow<'_>], train_labels: &[usize], n_neighbors: usize) -> Result<()> {
    if train.is_empty() {
        return Err(Error::invalid("kNN needs a non-empty training set"));
    }
    if train.len() != train_labels.len() {
        return Err(Error::invalid("train rows and labels differ in length"));
    }
    if n_neighbors == 0 || n_neighbors > train.len() {
        return Err(Error::invalid(format!(
            "n_neighbors = {n_neighbors} must be in 1..={}",
            train.len()
        )));
    }
    Ok(())
}

/// Predicts a label index for each test row by majority vote among its
/// `n_neighbors` nearest training rows.
pub fn knn_classify(
    train: &[SparseRow<'_>],
    train_labels: &[usize],
    test: &[SparseRow<'_>],
    n_neighbors: usize,
    metric: Metric,
) -> Result<Vec<usize>> {
    Ok(knn_classify_grid(train, train_labels, test, &[n_neighbors], metric)?.remove(0))
}

/// Predictions for several neighbor counts at once, sharing one distance
/// pass per test row. Output is indexed like `grid`.
pub fn knn_classify_grid(
    train: &[SparseRow<'_>],
    train_labels: &[usize],
    test: &[SparseRow<'_>],
    grid: &[usize],
    metric: Metric,
) -> Result<Vec<Vec<usize>>> {
    let widest = grid.iter().copied().max().ok_or_else(|| Error::invalid("empty neighbor grid"))?;
    for &n in grid {
        check(train, train_labels, n)?;
    }
    let per_row: Vec<Vec<usize>> = test
        .par_iter()
        .map_init(Vec::new, |counts, q| {
            let nn = nearest(train, q, widest, metric);
            grid.iter().map(|&n| vote(&nn[..n], train_labels, counts)).collect()
        })
        .collect();
    Ok((0..grid.len())
        .map(|g| per_row.iter().map(|p| p[g]).collect())
        .collect())
}
