//! Hash k-mers with 32-bit Murmur and reduce the digests to table buckets.
//!
//! cargo run --example hash_kmers -- MKVLAAGIVALLL 64

use murmur2vec::kmer::extract_kmers;
use murmur2vec::murmur3::{bucket_of, murmur32, HashSeed};

fn main() -> murmur2vec::Result<()> {
    let mut args = std::env::args().skip(1);
    let seq = args.next().unwrap_or_else(|| "MKVLAAGIVALLL".into());
    let m: u64 = args.next().map_or(64, |s| s.parse().expect("table size"));
    let seed = HashSeed::default();

    println!("{:<6} {:>10} {:>8}", "k-mer", "digest", "bucket");
    for kmer in extract_kmers(&seq, 3)? {
        let digest = murmur32(kmer.as_bytes(), seed);
        println!("{kmer:<6} {digest:>10x} {:>8}", bucket_of(kmer.as_bytes(), seed, m)?);
    }
    Ok(())
}
