//! Table size against collision budget over the standard grid, as CSV.

use murmur2vec::ingest::{generate_synthetic, ClassSizes, SynthSpec};
use murmur2vec::kmer::corpus_vocabulary;
use murmur2vec::murmur3::HashSeed;
use murmur2vec::tune::{collision_curve, SearchPolicy, COLLISION_GRID};

fn main() -> murmur2vec::Result<()> {
    let corpus = generate_synthetic(&SynthSpec {
        n_classes: 5,
        seqs_per_class: ClassSizes::Uniform(100),
        base_length: 500,
        mutations_per_class: 4,
        noise_rate: 0.05,
        rng_seed: 2,
    })?;
    let vocab = corpus_vocabulary(&corpus, 3)?;
    println!("target_percent,chosen_m,achieved_percent,m_over_vocabulary");
    for r in collision_curve(&vocab, &COLLISION_GRID, HashSeed(0), SearchPolicy::default())? {
        println!(
            "{},{},{:.4},{:.3}",
            r.target_fraction * 100.0,
            r.chosen_m,
            r.achieved.collision_fraction * 100.0,
            r.chosen_m as f64 / vocab.len() as f64
        );
    }
    Ok(())
}
