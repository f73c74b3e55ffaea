mod common;

use common::*;
use murmur2vec::embed::{embed_corpus, l1_distance, squared_l2_distance, EmbeddingConfig};
use murmur2vec::eval::{compute_metrics, knn_classify, Metric};
use murmur2vec::kmer::{corpus_vocabulary, spectrum_row};
use murmur2vec::murmur3::HashSeed;
use murmur2vec::tune::{measure_collisions, tune_table_size, SearchPolicy};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(max_n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(proptest::collection::vec(0i64..4, dim), 2..max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knn_matches_brute_force(
        pts in points(60, 5),
        labels in proptest::collection::vec(0usize..4, 60),
        split in any::<prop::sample::Index>(),
        n in 1usize..8,
        manhattan: bool,
    ) {
        let n_train = 1 + split.index(pts.len() - 1);
        let (train, test) = pts.split_at(n_train);
        let n = n.min(n_train);
        let labels = &labels[..n_train];
        let st: Vec<_> = train.iter().map(|p| to_sparse(p)).collect();
        let sq: Vec<_> = test.iter().map(|p| to_sparse(p)).collect();
        let tr: Vec<&[(u32, u64)]> = st.iter().map(Vec::as_slice).collect();
        let te: Vec<&[(u32, u64)]> = sq.iter().map(Vec::as_slice).collect();
        let (metric, dist) = if manhattan {
            (Metric::Manhattan, l1_dense as fn(&[i64], &[i64]) -> i128)
        } else {
            (Metric::Euclidean, squared_l2_dense as fn(&[i64], &[i64]) -> i128)
        };
        prop_assert_eq!(knn_classify(&tr, labels, &te, n, metric).unwrap(), brute_knn(train, labels, test, n, dist));
    }

    #[test]
    fn metrics_match_confusion_matrix(pairs in proptest::collection::vec((0usize..22, 0usize..22), 1..200), extra in 0usize..3) {
        let n_labels = pairs.iter().map(|&(t, p)| t.max(p)).max().unwrap() + 1 + extra;
        let (truth, pred): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let got = compute_metrics(&truth, &pred, n_labels).unwrap();
        let want = brute_metrics(&truth, &pred, n_labels);
        let got = [got.accuracy, got.precision_weighted, got.recall_weighted, got.f1_weighted, got.f1_macro];
        for (g, w) in got.iter().zip(want) {
            prop_assert!(relative_error(*g, w) <= 1e-12, "{} vs {}", g, w);
        }
    }

    #[test]
    fn sparse_distances_match_dense(a in proptest::collection::vec(0i64..50, 12), b in proptest::collection::vec(0i64..50, 12)) {
        let (sa, sb) = (to_sparse(&a), to_sparse(&b));
        prop_assert_eq!(squared_l2_distance(&sa, &sb) as i128, squared_l2_dense(&a, &b));
        prop_assert_eq!(l1_distance(&sa, &sb) as i128, l1_dense(&a, &b));
    }
}

#[test]
fn spectrum_row_matches_string_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let seqs: Vec<String> = (0..30).map(|_| random_sequence(&mut rng, b"ACDEFGHIKL", 80)).collect();
    let corpus = unlabeled(&seqs);
    let vocab = corpus_vocabulary(&corpus, 3).unwrap();
    for s in &seqs {
        let row = spectrum_row(s.as_bytes(), &vocab).unwrap();
        let want: Vec<(u32, u64)> = spectrum(s, 3)
            .into_iter()
            .map(|(kmer, c)| (vocab.index_of(kmer.as_bytes()).unwrap() as u32, c as u64))
            .collect();
        assert_eq!(row, want);
    }
}

#[test]
fn collision_free_embedding_preserves_spectrum_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seqs: Vec<String> = (0..25).map(|_| random_sequence(&mut rng, b"ACGT", 200)).collect();
    let corpus = unlabeled(&seqs);
    let vocab = corpus_vocabulary(&corpus, 4).unwrap();
    let tuned = tune_table_size(&vocab, 0.0, HashSeed(7), SearchPolicy::default()).unwrap();
    let m = embed_corpus(&corpus, &EmbeddingConfig::new(4, tuned.chosen_m, HashSeed(7)).unwrap()).unwrap();
    for i in 0..seqs.len() {
        for j in 0..seqs.len() {
            let (l2, l1) = spectrum_distances(&spectrum(&seqs[i], 4), &spectrum(&seqs[j], 4));
            let (a, b) = (m.rows[i].entries(), m.rows[j].entries());
            assert_eq!((squared_l2_distance(a, b), u128::from(l1_distance(a, b))), (l2, l1));
        }
    }
}

#[test]
fn collision_report_matches_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let seqs: Vec<String> = (0..40).map(|_| random_sequence(&mut rng, b"ACDEFGHIKLMNPQRSTVWY", 150)).collect();
    let vocab = corpus_vocabulary(&unlabeled(&seqs), 3).unwrap();
    for m in [1, 7, 100, 1000, 4096, 1 << 23, 1 << 32] {
        let r = measure_collisions(&vocab, m, HashSeed(3)).unwrap();
        assert_eq!(r.occupied_buckets, occupied_buckets(vocab.iter(), HashSeed(3), m), "m = {m}");
        assert_eq!(r.unique_kmers, vocab.len());
    }
}
