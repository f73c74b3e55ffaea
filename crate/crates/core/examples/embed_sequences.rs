//! Embed sequences into a fixed-size count table and compare them.

use murmur2vec::embed::{embed_sequence, l1_distance, squared_l2_distance, EmbeddingConfig};
use murmur2vec::murmur3::HashSeed;

fn main() -> murmur2vec::Result<()> {
    let config = EmbeddingConfig::new(3, 64, HashSeed(0))?;
    let a = embed_sequence("a", "MFVFLVLLPLVSSQCVNLTT", &config)?;
    let b = embed_sequence("b", "MFVFLVLLPLVSSQCVNLRT", &config)?;

    println!("a: {} nonzero buckets, mass {}", a.nnz(), a.sum());
    println!("   {:?}", a.entries());
    println!("dense: {:?}", a.to_dense());
    println!(
        "L1 = {}, squared L2 = {}",
        l1_distance(a.entries(), b.entries()),
        squared_l2_distance(a.entries(), b.entries())
    );
    Ok(())
}
