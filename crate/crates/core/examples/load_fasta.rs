//! Read a labeled FASTA corpus and write its embedding matrix.
//!
//! cargo run --example load_fasta -- corpus.fa corpus.labels.csv
//!
//! Without arguments a small corpus is written to a temporary directory first.

use std::path::PathBuf;

use murmur2vec::embed::export::{write_sparse, Normalization};
use murmur2vec::embed::{embed_corpus, EmbeddingConfig};
use murmur2vec::ingest::{load_fasta, write_fasta, write_labels, SequenceRecord};
use murmur2vec::murmur3::HashSeed;

fn main() -> murmur2vec::Result<()> {
    let dir = std::env::temp_dir().join("murmur2vec-load-fasta");
    std::fs::create_dir_all(&dir).expect("temporary directory");
    let mut args = std::env::args().skip(1).map(PathBuf::from);
    let (fasta, labels) = match (args.next(), args.next()) {
        (Some(f), l) => (f, l),
        (None, _) => {
            let records = vec![
                SequenceRecord::new("s1", "MFVFLVLLPLVSSQCVNLTTRTQLPPAYTNS", Some("alpha".into())),
                SequenceRecord::new("s2", "MFVFLVLLPLVSSQCVNLRTRTQLPPAYTNS", Some("delta".into())),
                SequenceRecord::new("s3", "MFVFLVLLPLVSSQCVNLTTRTQLPLAYTNS", Some("alpha".into())),
            ];
            let (f, l) = (dir.join("demo.fa"), dir.join("demo.labels.csv"));
            write_fasta(&f, &records, 60)?;
            write_labels(&l, &records)?;
            (f, Some(l))
        }
    };

    let corpus = load_fasta(&fasta, labels.as_deref())?;
    println!("{} records, labels {:?}", corpus.len(), corpus.label_set());

    let matrix = embed_corpus(&corpus, &EmbeddingConfig::new(3, 256, HashSeed(0))?)?;
    let out = dir.join("embedding.triplets.csv");
    write_sparse(&out, &matrix, Normalization::None)?;
    println!("wrote {} x {} matrix to {}", matrix.n_rows(), matrix.n_cols(), out.display());
    Ok(())
}
