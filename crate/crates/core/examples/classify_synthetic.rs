//! Repeated stratified holdout with kNN on a synthetic corpus, at several
//! collision budgets.

use murmur2vec::eval::{run_experiment, ExperimentConfig, TableSizing};
use murmur2vec::ingest::{generate_synthetic, ClassSizes, SynthSpec};
use murmur2vec::murmur3::HashSeed;

fn main() -> murmur2vec::Result<()> {
    let corpus = generate_synthetic(&SynthSpec {
        n_classes: 5,
        seqs_per_class: ClassSizes::Uniform(80),
        base_length: 500,
        mutations_per_class: 4,
        noise_rate: 0.005,
        rng_seed: 3,
    })?;

    println!("collision  m         accuracy  f1_macro  neighbors");
    for target in [0.40, 0.10, 0.0] {
        let out = run_experiment(
            &corpus,
            &ExperimentConfig {
                k: 3,
                seed: HashSeed(0),
                sizing: TableSizing::CollisionTarget(target),
                split: Default::default(),
                knn: Default::default(),
            },
        )?;
        println!(
            "{:>8.2}%  {:<8}  {:.4}    {:.4}    {:?}",
            out.collision.collision_fraction * 100.0,
            out.embedding.m,
            out.metrics.accuracy,
            out.metrics.f1_macro,
            out.chosen_neighbors
        );
    }
    Ok(())
}
