//! Time hashed embedding against the exact spectrum with bin search.
//!
//! cargo run --release --example bench_vs_spectrum

use murmur2vec::bench::{run_bench, BenchConfig};
use murmur2vec::ingest::{generate_synthetic, ClassSizes, SynthSpec};

fn main() -> murmur2vec::Result<()> {
    let corpus = generate_synthetic(&SynthSpec {
        n_classes: 5,
        seqs_per_class: ClassSizes::Uniform(400),
        base_length: 500,
        mutations_per_class: 4,
        noise_rate: 0.05,
        rng_seed: 4,
    })?;
    let report = run_bench(
        &corpus,
        &BenchConfig {
            table_sizes: vec![1024, 1 << 16],
            ..Default::default()
        },
    )?;

    println!("{} sequences, vocabulary {}", report.n_sequences, report.vocabulary_size);
    for t in report.murmur2vec.iter().chain([&report.spectrum]) {
        println!("{:<20} m = {:<7} median {:.4}s", t.method, t.dimension, t.median_s);
    }
    if let Some(s) = report.speedup {
        println!("speedup at equal dimension: {s:.2}x");
    }
    Ok(())
}
