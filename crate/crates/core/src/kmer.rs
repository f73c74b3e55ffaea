//! Sliding-window k-mers, per-sequence counting, and the exact spectrum
//! (alphabetically ordered bins over a corpus vocabulary).

use std::collections::HashMap;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::ingest::Corpus;

fn check_window(len: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > len {
        return Err(Error::SequenceTooShort {
            id: String::new(),
            len,
            k,
        });
    }
    Ok(())
}

/// The `n - k + 1` windows of `seq`, left to right.
pub fn extract_kmers(seq: &str, k: usize) -> Result<Vec<&str>> {
    check_window(seq.len(), k)?;
    // Residues are ASCII, so byte windows are char windows.
    Ok((0..=seq.len() - k).map(|i| &seq[i..i + k]).collect())
}

/// Counts windows of `seq` without copying them. Shared by the embedding and
/// spectrum paths.
pub(crate) fn count_windows(seq: &[u8], k: usize) -> Result<FxHashMap<&[u8], u64>> {
    check_window(seq.len(), k)?;
    let n_windows = seq.len() - k + 1;
    let mut counts = FxHashMap::with_capacity_and_hasher(n_windows, Default::default());
    for w in seq.windows(k) {
        *counts.entry(w).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Multiplicity of every distinct k-mer of one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmerCounts {
    k: usize,
    total: u64,
    entries: HashMap<String, u64>,
}

impl KmerCounts {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of windows in the source sequence, `n - k + 1`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn entries(&self) -> &HashMap<String, u64> {
        &self.entries
    }

    pub fn get(&self, kmer: &str) -> u64 {
        self.entries.get(kmer).copied().unwrap_or(0)
    }

    /// Number of distinct k-mers.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending k-mer order.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(k, &c)| (k.as_str(), c)).collect();
        v.sort_unstable();
        v
    }
}

pub fn count_kmers(seq: &str, k: usize) -> Result<KmerCounts> {
    let windows = count_windows(seq.as_bytes(), k)?;
    let entries = windows
        .into_iter()
        .map(|(w, c)| {
            // Windows of an ASCII string are valid UTF-8.
            (String::from_utf8(w.to_vec()).expect("ASCII residues"), c)
        })
        .collect();
    Ok(KmerCounts {
        k,
        total: (seq.len() - k + 1) as u64,
        entries,
    })
}

/// A sorted, duplicate-free list of equal-length k-mers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    k: usize,
    kmers: Vec<String>,
}

impl Vocabulary {
    /// Wraps an already sorted, duplicate-free list; rejects anything else.
    pub fn from_sorted(k: usize, kmers: Vec<String>) -> Result<Self> {
        if let Some(w) = kmers.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "vocabulary is not strictly ascending at `{}` >= `{}`",
                w[0], w[1]
            )));
        }
        if let Some(bad) = kmers.iter().find(|s| s.len() != k) {
            return Err(Error::invalid(format!("vocabulary entry `{bad}` does not have length {k}")));
        }
        Ok(Vocabulary { k, kmers })
    }

    /// Sorts and deduplicates `kmers`.
    pub fn from_unsorted(k: usize, mut kmers: Vec<String>) -> Result<Self> {
        kmers.sort_unstable();
        kmers.dedup();
        Self::from_sorted(k, kmers)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.kmers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kmers.is_empty()
    }

    pub fn kmers(&self) -> &[String] {
        &self.kmers
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.kmers.iter().map(String::as_str)
    }

    /// Bin of `kmer` by binary search.
    #[inline]
    pub fn index_of(&self, kmer: &[u8]) -> Option<usize> {
        self.kmers.binary_search_by(|p| p.as_bytes().cmp(kmer)).ok()
    }
}

/// Sorted union of the k-mers of every record.
pub fn corpus_vocabulary(corpus: &Corpus, k: usize) -> Result<Vocabulary> {
    let per_record: Vec<FxHashSet<&[u8]>> = corpus
        .records()
        .par_iter()
        .map(|r| {
            count_windows(r.as_bytes(), k)
                .map(|c| c.into_keys().collect())
                .map_err(|e| e.for_sequence(&r.id))
        })
        .collect::<Result<_>>()?;
    let mut union: FxHashSet<&[u8]> = FxHashSet::default();
    for set in per_record {
        union.extend(set);
    }
    let mut kmers: Vec<String> = union
        .into_iter()
        .map(|w| String::from_utf8(w.to_vec()).expect("ASCII residues"))
        .collect();
    kmers.sort_unstable();
    Ok(Vocabulary { k, kmers })
}

/// Dense spectrum of one sequence over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumVector<'v> {
    pub dims: &'v Vocabulary,
    pub values: Vec<u64>,
}

impl SpectrumVector<'_> {
    pub fn sum(&self) -> u64 {
        self.values.iter().sum()
    }
}

/// `values[i]` is the count of `vocabulary[i]` (0 when absent). K-mers of
/// `counts` missing from the vocabulary are ignored; that cannot happen when
/// the vocabulary is corpus-wide.
pub fn spectrum_embed<'v>(counts: &KmerCounts, vocabulary: &'v Vocabulary) -> Result<SpectrumVector<'v>> {
    if counts.k() != vocabulary.k() {
        return Err(Error::invalid(format!(
            "counts use k = {}, vocabulary uses k = {}",
            counts.k(),
            vocabulary.k()
        )));
    }
    let values = vocabulary.iter().map(|kmer| counts.get(kmer)).collect();
    Ok(SpectrumVector {
        dims: vocabulary,
        values,
    })
}

/// Sparse spectrum row of `seq`: each distinct k-mer is located by binary
/// search in the vocabulary, the "bin search" that hashing replaces.
/// Returned `(bin, count)` pairs are sorted by bin.
pub fn spectrum_row(seq: &[u8], vocabulary: &Vocabulary) -> Result<Vec<(u32, u64)>> {
    let counts = count_windows(seq, vocabulary.k())?;
    let mut row: Vec<(u32, u64)> = counts
        .into_iter()
        .filter_map(|(w, c)| vocabulary.index_of(w).map(|i| (i as u32, c)))
        .collect();
    row.sort_unstable_by_key(|&(i, _)| i);
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SequenceRecord;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn corpus(seqs: &[&str]) -> Corpus {
        Corpus::new(
            seqs.iter()
                .enumerate()
                .map(|(i, s)| SequenceRecord::new(format!("s{i}"), *s, None))
                .collect(),
        )
        .unwrap()
    }

    fn naive_count(seq: &str, kmer: &str) -> u64 {
        let k = kmer.len();
        (0..=seq.len() - k).filter(|&i| &seq[i..i + k] == kmer).count() as u64
    }

    #[test]
    fn extracts_windows_in_order() {
        assert_eq!(extract_kmers("MDPEG", 3).unwrap(), ["MDP", "DPE", "PEG"]);
        assert_eq!(extract_kmers("AB", 2).unwrap(), ["AB"]);
    }

    #[test]
    fn window_errors() {
        assert!(matches!(
            extract_kmers("AB", 3),
            Err(Error::SequenceTooShort { len: 2, k: 3, .. })
        ));
        assert!(matches!(extract_kmers("AB", 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn counts_small_sequences() {
        let c = count_kmers("ABAB", 2).unwrap();
        assert_eq!(c.sorted(), [("AB", 2), ("BA", 1)]);
        assert_eq!(c.total(), 3);
        let c = count_kmers("AAAA", 2).unwrap();
        assert_eq!(c.sorted(), [("AA", 3)]);
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn counts_match_quadratic_recount() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let seq: String = (0..200).map(|_| b"ACDE"[rng.gen_range(0..4)] as char).collect();
        for k in [1, 2, 3, 5] {
            let c = count_kmers(&seq, k).unwrap();
            for (kmer, &n) in c.entries() {
                assert_eq!(n, naive_count(&seq, kmer));
            }
            let distinct: BTreeSet<&str> = (0..=seq.len() - k).map(|i| &seq[i..i + k]).collect();
            assert_eq!(c.len(), distinct.len());
        }
    }

    #[test]
    fn corpus_vocabulary_is_sorted_union() {
        let v = corpus_vocabulary(&corpus(&["ABAB", "BABA"]), 2).unwrap();
        assert_eq!(v.kmers(), ["AB", "BA"]);
        let v = corpus_vocabulary(&corpus(&["MDPEGMD"]), 2).unwrap();
        let c = count_kmers("MDPEGMD", 2).unwrap();
        let keys: Vec<&str> = c.sorted().into_iter().map(|(k, _)| k).collect();
        assert_eq!(v.iter().collect::<Vec<_>>(), keys);
    }

    #[test]
    fn corpus_vocabulary_matches_brute_force_union() {
        use crate::ingest::{generate_synthetic, ClassSizes, SynthSpec};
        let c = generate_synthetic(&SynthSpec {
            n_classes: 4,
            seqs_per_class: ClassSizes::Uniform(25),
            base_length: 120,
            mutations_per_class: 3,
            noise_rate: 0.05,
            rng_seed: 5,
        })
        .unwrap();
        let v = corpus_vocabulary(&c, 3).unwrap();
        let mut brute = BTreeSet::new();
        for r in c.records() {
            for i in 0..=r.len() - 3 {
                brute.insert(r.residues[i..i + 3].to_string());
            }
        }
        assert_eq!(v.kmers(), brute.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn corpus_vocabulary_reports_short_sequence_id() {
        let err = corpus_vocabulary(&corpus(&["ABAB", "B"]), 2).unwrap_err();
        assert!(matches!(err, Error::SequenceTooShort { id, len: 1, k: 2 } if id == "s1"));
    }

    #[test]
    fn spectrum_fills_zeros() {
        let c = count_kmers("ABAB", 2).unwrap();
        let v = Vocabulary::from_sorted(2, vec!["AB".into(), "BA".into(), "CC".into()]).unwrap();
        assert_eq!(spectrum_embed(&c, &v).unwrap().values, [2, 1, 0]);
        let v = Vocabulary::from_sorted(2, vec!["XY".into(), "YZ".into()]).unwrap();
        assert_eq!(spectrum_embed(&c, &v).unwrap().values, [0, 0]);
    }

    #[test]
    fn unsorted_vocabulary_is_rejected() {
        assert!(matches!(
            Vocabulary::from_sorted(2, vec!["BA".into(), "AB".into()]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(Vocabulary::from_sorted(2, vec!["AB".into(), "AB".into()]).is_err());
    }

    #[test]
    fn sparse_spectrum_row_matches_dense() {
        let c = corpus(&["MDPEGMDPQ", "QQMDPEG"]);
        let v = corpus_vocabulary(&c, 3).unwrap();
        for r in c.records() {
            let dense = spectrum_embed(&count_kmers(&r.residues, 3).unwrap(), &v).unwrap();
            let sparse = spectrum_row(r.as_bytes(), &v).unwrap();
            let mut expanded = vec![0; v.len()];
            for (i, x) in sparse {
                expanded[i as usize] = x;
            }
            assert_eq!(expanded, dense.values);
        }
    }

    proptest! {
        #[test]
        fn window_count_and_mass(seq in "[ACDE]{1,80}", k in 1usize..6) {
            prop_assume!(k <= seq.len());
            let n_windows = (seq.len() - k + 1) as u64;
            prop_assert_eq!(extract_kmers(&seq, k).unwrap().len() as u64, n_windows);
            let c = count_kmers(&seq, k).unwrap();
            prop_assert_eq!(c.entries().values().sum::<u64>(), n_windows);
            prop_assert!(c.len() as u64 <= n_windows);
            let all_distinct = c.len() as u64 == n_windows;
            prop_assert_eq!(all_distinct, c.entries().values().all(|&x| x == 1));
            prop_assert!(c.entries().keys().all(|key| key.len() == k));
        }

        #[test]
        fn spectrum_conserves_mass_over_corpus_vocabulary(
            seqs in proptest::collection::vec("[ACD]{3,40}", 1..6)
        ) {
            let refs: Vec<&str> = seqs.iter().map(String::as_str).collect();
            let c = corpus(&refs);
            let v = corpus_vocabulary(&c, 3).unwrap();
            for r in c.records() {
                let s = spectrum_embed(&count_kmers(&r.residues, 3).unwrap(), &v).unwrap();
                prop_assert_eq!(s.sum(), (r.len() - 2) as u64);
            }
        }
    }
}
