//! Murmur2Vec: every distinct k-mer's count is added into slot
//! `murmur32(kmer, seed) mod m` of a length-`m` table, and that table is the
//! feature vector.
//!
//! Rows are kept sparse (sorted `(bucket, count)` pairs) since the number of
//! occupied buckets is bounded by the distinct k-mers of the sequence, even
//! when `m` is in the millions.

pub mod export;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::kmer::{count_windows, KmerCounts};
use crate::murmur3::{murmur32, reduce, HashSeed};

/// Everything that determines an embedding: k-mer length, table size and
/// hash seed. Aggregation is always additive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub k: usize,
    pub m: u64,
    #[serde(default)]
    pub seed: HashSeed,
}

impl EmbeddingConfig {
    pub fn new(k: usize, m: u64, seed: HashSeed) -> Result<Self> {
        let config = EmbeddingConfig { k, m, seed };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::invalid("table size m must be at least 1"));
        }
        if self.m > 1 << 32 {
            // Digests are 32-bit; larger tables only add empty slots.
            return Err(Error::invalid(format!("table size {} exceeds 2^32", self.m)));
        }
        Ok(())
    }
}

/// One row of the embedding, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingVector {
    pub source_id: String,
    pub config: EmbeddingConfig,
    entries: Vec<(u32, u64)>,
}

impl EmbeddingVector {
    /// Nonzero `(bucket, value)` pairs in ascending bucket order.
    pub fn entries(&self) -> &[(u32, u64)] {
        &self.entries
    }

    pub fn len(&self) -> u64 {
        self.config.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn sum(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn get(&self, bucket: u64) -> u64 {
        u32::try_from(bucket)
            .ok()
            .and_then(|b| self.entries.binary_search_by_key(&b, |&(i, _)| i).ok())
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn to_dense(&self) -> Vec<u64> {
        let mut out = vec![0; self.config.m as usize];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }
}

/// Hashes `(kmer, count)` pairs into sorted, merged `(bucket, sum)` pairs.
/// The result does not depend on the iteration order of `items`.
pub(crate) fn hash_into_table<'a>(
    items: impl IntoIterator<Item = (&'a [u8], u64)>,
    config: &EmbeddingConfig,
) -> Vec<(u32, u64)> {
    let mut slots: Vec<(u32, u64)> = items
        .into_iter()
        .map(|(kmer, count)| (reduce(murmur32(kmer, config.seed), config.m) as u32, count))
        .collect();
    slots.sort_unstable_by_key(|&(b, _)| b);
    let mut merged: Vec<(u32, u64)> = Vec::with_capacity(slots.len());
    for (b, c) in slots {
        match merged.last_mut() {
            Some((last, total)) if *last == b => *total += c,
            _ => merged.push((b, c)),
        }
    }
    merged
}

/// Embeds precomputed k-mer counts.
pub fn murmur2vec(counts: &KmerCounts, config: &EmbeddingConfig) -> Result<EmbeddingVector> {
    config.validate()?;
    if counts.k() != config.k {
        return Err(Error::invalid(format!(
            "counts use k = {}, config uses k = {}",
            counts.k(),
            config.k
        )));
    }
    let entries = hash_into_table(
        counts.entries().iter().map(|(kmer, &c)| (kmer.as_bytes(), c)),
        config,
    );
    Ok(EmbeddingVector {
        source_id: String::new(),
        config: *config,
        entries,
    })
}

/// Counts and embeds one sequence.
pub fn embed_sequence(id: &str, residues: &str, config: &EmbeddingConfig) -> Result<EmbeddingVector> {
    config.validate()?;
    let counts = count_windows(residues.as_bytes(), config.k).map_err(|e| e.for_sequence(id))?;
    Ok(EmbeddingVector {
        source_id: id.to_string(),
        config: *config,
        entries: hash_into_table(counts, config),
    })
}

/// The `N x m` corpus embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingMatrix {
    pub config: EmbeddingConfig,
    pub rows: Vec<EmbeddingVector>,
    pub ids: Vec<String>,
    pub labels: Vec<Option<String>>,
}

impl EmbeddingMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> u64 {
        self.config.m
    }
}

/// Embeds every record, in parallel on the current rayon pool. Row order
/// follows the corpus and the output does not depend on the worker count.
pub fn embed_corpus(corpus: &Corpus, config: &EmbeddingConfig) -> Result<EmbeddingMatrix> {
    config.validate()?;
    let rows = corpus
        .records()
        .par_iter()
        .map(|r| embed_sequence(&r.id, &r.residues, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(EmbeddingMatrix {
        config: *config,
        rows,
        ids: corpus.records().iter().map(|r| r.id.clone()).collect(),
        labels: corpus.records().iter().map(|r| r.label.clone()).collect(),
    })
}

/// L1 distance between two sparse rows sorted by index.
pub fn l1_distance(a: &[(u32, u64)], b: &[(u32, u64)]) -> u64 {
    merge_fold(a, b, 0u64, |acc, x, y| acc + x.abs_diff(y))
}

/// Squared L2 distance between two sparse rows sorted by index.
pub fn squared_l2_distance(a: &[(u32, u64)], b: &[(u32, u64)]) -> u128 {
    merge_fold(a, b, 0u128, |acc, x, y| {
        let d = u128::from(x.abs_diff(y));
        acc + d * d
    })
}

fn merge_fold<T>(a: &[(u32, u64)], b: &[(u32, u64)], init: T, mut f: impl FnMut(T, u64, u64) -> T) -> T {
    let (mut i, mut j) = (0, 0);
    let mut acc = init;
    while i < a.len() && j < b.len() {
        let (ia, va) = a[i];
        let (ib, vb) = b[j];
        if ia == ib {
            acc = f(acc, va, vb);
            i += 1;
            j += 1;
        } else if ia < ib {
            acc = f(acc, va, 0);
            i += 1;
        } else {
            acc = f(acc, 0, vb);
            j += 1;
        }
    }
    for &(_, v) in &a[i..] {
        acc = f(acc, v, 0);
    }
    for &(_, v) in &b[j..] {
        acc = f(acc, 0, v);
    }
    acc
}
