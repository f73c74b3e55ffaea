//! Alignment-free embeddings of biological sequences by feature hashing.
//!
//! Each sequence is cut into overlapping k-mers, the k-mers are counted, and
//! every distinct k-mer's count is added into slot `murmur32(kmer) mod m` of a
//! fixed-size table. The table size `m` trades dimension for collisions and
//! can be tuned to a target collision fraction over a corpus.
//!
//! ```
//! use murmur2vec::embed::{embed_sequence, EmbeddingConfig};
//! use murmur2vec::murmur3::HashSeed;
//!
//! let config = EmbeddingConfig::new(3, 64, HashSeed::default()).unwrap();
//! let v = embed_sequence("s1", "MFVFLVLLPLVSS", &config).unwrap();
//! assert_eq!(v.sum(), 11); // n - k + 1 windows
//! ```
//!
//! The runnable programs under `examples/` walk through each part of the
//! pipeline; the `murmur2vec` binary exposes the same steps as subcommands.

pub mod bench;
pub mod cli;
pub mod embed;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod kmer;
pub mod manifest;
pub mod murmur3;
pub mod tune;

pub use error::{Error, ErrorKind, Result};
