//! 32-bit MurmurHash3 (the x86_32 variant), the single global hash of the
//! embedding pipeline.
//!
//! Blocks and tail bytes are always read little-endian, so digests are
//! identical on every host.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const C1: u32 = 0xcc9e_2d51;
const C2: u32 = 0x1b87_3593;
const R1: u32 = 15;
const R2: u32 = 13;
const M: u32 = 5;
const N: u32 = 0xe654_6b64;

/// Seed of the global hash. Defaults to 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HashSeed(pub u32);

impl From<u32> for HashSeed {
    fn from(value: u32) -> Self {
        HashSeed(value)
    }
}

impl fmt::Display for HashSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A 32-bit digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HashValue(pub u32);

impl fmt::LowerHex for HashValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

#[inline(always)]
fn scramble(mut k: u32) -> u32 {
    k = k.wrapping_mul(C1);
    k = k.rotate_left(R1);
    k.wrapping_mul(C2)
}

#[inline(always)]
fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^ (h >> 16)
}

/// MurmurHash3_x86_32 of `data`.
#[inline]
pub fn murmur32(data: &[u8], seed: HashSeed) -> HashValue {
    let mut h = seed.0;
    let mut blocks = data.chunks_exact(4);
    for block in blocks.by_ref() {
        let k = u32::from_le_bytes([block[0], block[1], block[2], block[3]]);
        h ^= scramble(k);
        h = h.rotate_left(R2);
        h = h.wrapping_mul(M).wrapping_add(N);
    }

    let tail = blocks.remainder();
    if !tail.is_empty() {
        let mut k = 0u32;
        for (i, &b) in tail.iter().enumerate() {
            k |= u32::from(b) << (8 * i);
        }
        h ^= scramble(k);
    }

    // The reference implementation mixes in the length as a 32-bit int.
    h ^= data.len() as u32;
    HashValue(fmix32(h))
}

/// Reduces a digest to a bucket index in `[0, m)` by plain modulo.
#[inline]
pub fn reduce(hash: HashValue, m: u64) -> u64 {
    u64::from(hash.0) % m
}

/// Bucket of `data` in a table of `m` slots: `murmur32(data, seed) mod m`.
pub fn bucket_of(data: &[u8], seed: HashSeed, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::invalid("table size m must be at least 1"));
    }
    Ok(reduce(murmur32(data, seed), m))
}
