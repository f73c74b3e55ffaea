//! Count overlapping k-mers and build the exact spectrum over a corpus
//! vocabulary.

use murmur2vec::ingest::{Corpus, SequenceRecord};
use murmur2vec::kmer::{corpus_vocabulary, count_kmers, spectrum_embed};

fn main() -> murmur2vec::Result<()> {
    let seqs = ["MFVFLVLLPLVSS", "MFVFLVLLPLVSSQ", "MKVLAAGIV"];
    let corpus = Corpus::new(
        seqs.iter()
            .enumerate()
            .map(|(i, s)| SequenceRecord::new(format!("seq{i}"), *s, None))
            .collect(),
    )?;

    let counts = count_kmers(seqs[0], 3)?;
    println!("{} windows, {} distinct 3-mers", counts.total(), counts.len());
    for (kmer, n) in counts.sorted() {
        println!("  {kmer} {n}");
    }

    let vocab = corpus_vocabulary(&corpus, 3)?;
    let spectrum = spectrum_embed(&counts, &vocab)?;
    println!("corpus vocabulary: {} k-mers", vocab.len());
    println!("spectrum of seq0: {:?} (sum {})", spectrum.values, spectrum.sum());
    Ok(())
}
