use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Repeated holdout: `n_runs` independent train/test splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub n_runs: usize,
    pub rng_seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            n_runs: 5,
            rng_seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if self.n_runs == 0 {
            return Err(Error::invalid("at least one run is required"));
        }
        Ok(())
    }
}

pub(crate) fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Per-group train quotas by largest remainder, so the total is
/// `round(N * fraction)` and every group is within one record of its exact
/// share. Groups of size >= 2 keep at least one record on each side; when
/// `keep_singletons` is set, a group of one goes wholly to the train side.
fn quotas(sizes: &[usize], fraction: f64) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let target = (n as f64 * fraction).round() as usize;
    let extra = target.saturating_sub(quota.iter().sum());
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // Stable sort: equal remainders are served in group order.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).expect("finite remainders")
    });
    for &g in order.iter().take(extra) {
        quota[g] += 1;
    }
    for (q, &s) in quota.iter_mut().zip(sizes) {
        *q = if s >= 2 { (*q).clamp(1, s - 1) } else { s };
    }
    quota
}

/// Splits `items` (indices with their group key) into train/test. Both
/// outputs are sorted ascending.
fn split_groups<K: Ord>(
    items: impl IntoIterator<Item = (usize, K)>,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, key) in items {
        groups.entry(key).or_default().push(i);
    }
    let sizes: Vec<usize> = groups.values().map(Vec::len).collect();
    let quota = quotas(&sizes, fraction);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (members, q) in groups.into_values().zip(quota) {
        let mut members = members;
        members.shuffle(rng);
        train.extend_from_slice(&members[..q]);
        test.extend_from_slice(&members[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Train/test indices over `labels` for run `run_index`. Deterministic in
/// `(spec.rng_seed, run_index)`.
pub fn split_labels(labels: &[&str], spec: &SplitSpec, run_index: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    if labels.len() < 2 {
        return Err(Error::invalid("need at least 2 records to split"));
    }
    let mut rng = run_rng(spec.rng_seed, run_index);
    if spec.stratified {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &l in labels {
            *counts.entry(l).or_default() += 1;
        }
        if let Some((l, _)) = counts.iter().find(|(_, &c)| c < 2) {
            return Err(Error::Stratification(l.to_string()));
        }
        Ok(split_groups(labels.iter().copied().enumerate(), spec.train_fraction, &mut rng))
    } else {
        Ok(split_groups((0..labels.len()).map(|i| (i, ())), spec.train_fraction, &mut rng))
    }
}

/// Stratified split of the rows of an embedding matrix.
pub fn stratified_split(
    matrix: &EmbeddingMatrix,
    spec: &SplitSpec,
    run_index: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let labels: Vec<&str> = matrix
        .labels
        .iter()
        .zip(&matrix.ids)
        .map(|(l, id)| l.as_deref().ok_or_else(|| Error::MissingLabel(id.clone())))
        .collect::<Result<_>>()?;
    split_labels(&labels, spec, run_index)
}

/// Holds out about `fraction` of `indices` per label for validation. Labels
/// with a single record stay on the fit side. Returns `(fit, validation)`.
pub(crate) fn validation_holdout(
    indices: &[usize],
    labels: &[usize],
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let (fit_pos, val_pos) = split_groups(
        indices.iter().enumerate().map(|(p, &i)| (p, labels[i])),
        1.0 - fraction,
        rng,
    );
    (
        fit_pos.into_iter().map(|p| indices[p]).collect(),
        val_pos.into_iter().map(|p| indices[p]).collect(),
    )
}
