//! Brute-force oracles shared by the integration and acceptance tests. Each
//! one recomputes its answer from scratch with dense or map-based data and
//! none of the library's fast paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use murmur2vec::ingest::{Corpus, SequenceRecord};
use murmur2vec::murmur3::{bucket_of, HashSeed};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Vector {
    pub input: Vec<u8>,
    pub seed: u32,
    pub digest: u32,
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn hex_bytes(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

fn hex_u32(s: &str) -> u32 {
    u32::from_str_radix(s.trim_start_matches("0x"), 16).unwrap()
}

/// Reference digests computed by an independent MurmurHash3 implementation.
pub fn murmur_vectors() -> Vec<Vector> {
    let mut r = csv::Reader::from_path(fixture_path("murmur3_vectors.csv")).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            Vector {
                input: hex_bytes(&rec[0]),
                seed: hex_u32(&rec[1]),
                digest: hex_u32(&rec[2]),
            }
        })
        .collect()
}

pub fn random_sequence(rng: &mut ChaCha8Rng, alphabet: &[u8], len: usize) -> String {
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())] as char).collect()
}

pub fn unlabeled(seqs: &[String]) -> Corpus {
    Corpus::new(
        seqs.iter()
            .enumerate()
            .map(|(i, s)| SequenceRecord::new(format!("s{i:05}"), s.clone(), None))
            .collect(),
    )
    .unwrap()
}

/// Exact k-mer spectrum keyed by the k-mer string.
pub fn spectrum(seq: &str, k: usize) -> BTreeMap<String, i128> {
    let mut out = BTreeMap::new();
    for i in 0..=seq.len() - k {
        *out.entry(seq[i..i + k].to_string()).or_insert(0) += 1;
    }
    out
}

/// Squared L2 and L1 distance between two spectra.
pub fn spectrum_distances(a: &BTreeMap<String, i128>, b: &BTreeMap<String, i128>) -> (u128, u128) {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let (mut l2, mut l1) = (0i128, 0i128);
    for key in keys {
        let d = a.get(key).copied().unwrap_or(0) - b.get(key).copied().unwrap_or(0);
        l2 += d * d;
        l1 += d.abs();
    }
    (l2 as u128, l1 as u128)
}

/// Number of distinct buckets hit by `kmers` at table size `m`.
pub fn occupied_buckets<'a>(kmers: impl IntoIterator<Item = &'a str>, seed: HashSeed, m: u64) -> usize {
    kmers
        .into_iter()
        .map(|k| bucket_of(k.as_bytes(), seed, m).unwrap())
        .collect::<BTreeSet<u64>>()
        .len()
}

pub fn squared_l2_dense(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, y)| i128::from(x - y) * i128::from(x - y)).sum()
}

pub fn l1_dense(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, y)| i128::from((x - y).abs())).sum()
}

/// All-pairs kNN over dense rows: stable sort of every training point by
/// (distance, index), then a majority vote that prefers the lower label.
pub fn brute_knn(
    train: &[Vec<i64>],
    labels: &[usize],
    test: &[Vec<i64>],
    n: usize,
    dist: fn(&[i64], &[i64]) -> i128,
) -> Vec<usize> {
    test.iter()
        .map(|q| {
            let mut order: Vec<(i128, usize)> = train.iter().enumerate().map(|(i, t)| (dist(t, q), i)).collect();
            order.sort();
            let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
            for &(_, i) in &order[..n] {
                *votes.entry(labels[i]).or_insert(0) += 1;
            }
            let best = *votes.values().max().unwrap();
            *votes.iter().find(|(_, &v)| v == best).unwrap().0
        })
        .collect()
}

pub fn to_sparse(row: &[i64]) -> Vec<(u32, u64)> {
    row.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (i as u32, v as u64))
        .collect()
}

/// Accuracy, weighted precision/recall/F1 and macro F1 from a full
/// confusion matrix.
pub fn brute_metrics(truth: &[usize], pred: &[usize], n_labels: usize) -> [f64; 5] {
    let mut cm = vec![vec![0u64; n_labels]; n_labels];
    for (&t, &p) in truth.iter().zip(pred) {
        cm[t][p] += 1;
    }
    let n = truth.len() as f64;
    let diag: u64 = (0..n_labels).map(|c| cm[c][c]).sum();
    let (mut pw, mut rw, mut fw, mut fm) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..n_labels {
        let row: u64 = cm[c].iter().sum();
        let col: u64 = cm.iter().map(|r| r[c]).sum();
        let p = if col == 0 { 0.0 } else { cm[c][c] as f64 / col as f64 };
        let r = if row == 0 { 0.0 } else { cm[c][c] as f64 / row as f64 };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let w = row as f64 / n;
        pw += w * p;
        rw += w * r;
        fw += w * f;
        fm += f;
    }
    [diag as f64 / n, pw, rw, fw, fm / n_labels as f64]
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
