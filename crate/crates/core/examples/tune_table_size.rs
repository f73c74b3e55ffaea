//! Find the table size that keeps bucket collisions under a budget.

use murmur2vec::ingest::{generate_synthetic, ClassSizes, SynthSpec};
use murmur2vec::kmer::corpus_vocabulary;
use murmur2vec::murmur3::HashSeed;
use murmur2vec::tune::{CollisionMeter, SearchPolicy};

fn main() -> murmur2vec::Result<()> {
    let corpus = generate_synthetic(&SynthSpec {
        n_classes: 4,
        seqs_per_class: ClassSizes::Uniform(50),
        base_length: 400,
        mutations_per_class: 5,
        noise_rate: 0.05,
        rng_seed: 1,
    })?;
    let vocab = corpus_vocabulary(&corpus, 3)?;
    let mut meter = CollisionMeter::new(&vocab, HashSeed(0))?;

    for target in [0.10, 0.01, 0.0] {
        let r = meter.tune(target, SearchPolicy::default())?;
        println!(
            "target {:>5.2}%: m = {:>9}, achieved {:.4}% ({} of {} k-mers in distinct buckets, {} probes)",
            target * 100.0,
            r.chosen_m,
            r.achieved.collision_fraction * 100.0,
            r.achieved.occupied_buckets,
            r.achieved.unique_kmers,
            r.probes.len()
        );
    }
    Ok(())
}
