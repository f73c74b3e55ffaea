//! Wall-clock comparison of Murmur2Vec against the exact spectrum with
//! alphabetical bin lookup, at equal output dimension.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::{embed_corpus, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::ingest::Corpus;
use crate::kmer::{corpus_vocabulary, spectrum_row, Vocabulary};
use crate::murmur3::HashSeed;

pub const MIN_REPEATS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub k: usize,
    pub seed: HashSeed,
    /// Extra Murmur2Vec table sizes to time. The equal-dimension size
    /// (vocabulary size) is always timed.
    pub table_sizes: Vec<u64>,
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            k: 3,
            seed: HashSeed(0),
            table_sizes: Vec::new(),
            repeats: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub method: String,
    pub dimension: u64,
    pub samples_s: Vec<f64>,
    pub median_s: f64,
    pub sequences_per_s: Option<f64>,
}

impl Timing {
    fn new(method: &str, dimension: u64, samples_s: Vec<f64>, n_sequences: usize) -> Self {
        let median_s = median(&samples_s);
        Timing {
            method: method.to_string(),
            dimension,
            sequences_per_s: (median_s > 0.0).then(|| n_sequences as f64 / median_s),
            samples_s,
            median_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n_sequences: usize,
    pub k: usize,
    pub vocabulary_size: usize,
    pub repeats: usize,
    pub murmur2vec: Vec<Timing>,
    pub spectrum: Timing,
    /// Spectrum median over Murmur2Vec median at equal dimension; `None`
    /// if the Murmur2Vec median rounds to zero.
    pub speedup: Option<f64>,
}

pub fn median(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let mid = s.len() / 2;
    if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / 2.0
    }
}

fn time<T>(f: impl FnOnce() -> Result<T>) -> Result<f64> {
    let t = Instant::now();
    std::hint::black_box(f()?);
    Ok(t.elapsed().as_secs_f64())
}

/// Spectrum embedding of every record, each k-mer located by binary search.
pub fn spectrum_corpus(corpus: &Corpus, vocabulary: &Vocabulary) -> Result<Vec<Vec<(u32, u64)>>> {
    corpus
        .records()
        .par_iter()
        .map(|r| spectrum_row(r.as_bytes(), vocabulary).map_err(|e| e.for_sequence(&r.id)))
        .collect()
}

/// Times both embeddings `repeats` times each, interleaved, on the current
/// rayon pool. The vocabulary is built once up front, outside the timings.
pub fn run_bench(corpus: &Corpus, config: &BenchConfig) -> Result<BenchReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if config.repeats < MIN_REPEATS {
        return Err(Error::invalid(format!("at least {MIN_REPEATS} repeats are required")));
    }
    let vocabulary = corpus_vocabulary(corpus, config.k)?;
    let dim = vocabulary.len() as u64;

    let mut sizes = vec![dim];
    sizes.extend(config.table_sizes.iter().copied().filter(|&m| m != dim));
    let embed_configs = sizes
        .iter()
        .map(|&m| EmbeddingConfig::new(config.k, m, config.seed))
        .collect::<Result<Vec<_>>>()?;

    let mut murmur_samples = vec![Vec::with_capacity(config.repeats); sizes.len()];
    let mut spectrum_samples = Vec::with_capacity(config.repeats);
    for _ in 0..config.repeats {
        spectrum_samples.push(time(|| spectrum_corpus(corpus, &vocabulary))?);
        for (samples, ec) in murmur_samples.iter_mut().zip(&embed_configs) {
            samples.push(time(|| embed_corpus(corpus, ec))?);
        }
    }

    let n = corpus.len();
    let murmur2vec: Vec<Timing> = murmur_samples
        .into_iter()
        .zip(&sizes)
        .map(|(s, &m)| Timing::new("murmur2vec", m, s, n))
        .collect();
    let spectrum = Timing::new("spectrum-bin-search", dim, spectrum_samples, n);
    let speedup = (murmur2vec[0].median_s > 0.0).then(|| spectrum.median_s / murmur2vec[0].median_s);
    Ok(BenchReport {
        n_sequences: n,
        k: config.k,
        vocabulary_size: vocabulary.len(),
        repeats: config.repeats,
        murmur2vec,
        spectrum,
        speedup,
    })
}
