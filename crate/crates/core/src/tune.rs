//! Corpus-level collision measurement and the table-size search.
//!
//! The collision fraction of a vocabulary of `U` distinct k-mers in a table
//! of `m` slots is `1 - B / U`, where `B` is the number of distinct buckets
//! the k-mers land in.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmer::Vocabulary;
use crate::murmur3::{murmur32, HashSeed};

/// Largest useful table: beyond this every 32-bit digest has its own slot.
pub const MAX_TABLE_SIZE: u64 = 1 << 32;

/// Allowed-collision grid, as fractions, used for the classification tables.
pub const COLLISION_GRID: [f64; 12] = [
    0.40, 0.30, 0.20, 0.10, 0.08, 0.06, 0.04, 0.02, 0.01, 0.005, 0.0025, 0.0,
];

const BITSET_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub unique_kmers: usize,
    pub occupied_buckets: usize,
    pub collision_fraction: f64,
    pub m: u64,
    pub seed: HashSeed,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub m: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub target_fraction: f64,
    pub chosen_m: u64,
    pub achieved: CollisionReport,
    pub probes: Vec<Probe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPolicy {
    /// Maximum number of measured table sizes per target.
    pub max_probes: usize,
}

impl Default for SearchPolicy {
    fn default() -> Self {
        SearchPolicy { max_probes: 64 }
    }
}

/// Measures collisions of one vocabulary under one seed. Digests are
/// computed once; occupied-bucket counts are cached per table size.
pub struct CollisionMeter<'v> {
    vocabulary: &'v Vocabulary,
    seed: HashSeed,
    digests: Vec<u32>,
    cache: HashMap<u64, usize>,
}

impl<'v> CollisionMeter<'v> {
    pub fn new(vocabulary: &'v Vocabulary, seed: HashSeed) -> Result<Self> {
        if vocabulary.is_empty() {
            return Err(Error::invalid("cannot measure collisions of an empty vocabulary"));
        }
        let digests = vocabulary.iter().map(|k| murmur32(k.as_bytes(), seed).0).collect();
        Ok(CollisionMeter {
            vocabulary,
            seed,
            digests,
            cache: HashMap::new(),
        })
    }

    pub fn unique_kmers(&self) -> usize {
        self.digests.len()
    }

    fn occupied(&mut self, m: u64) -> usize {
        if let Some(&b) = self.cache.get(&m) {
            return b;
        }
        let b = if m <= BITSET_LIMIT {
            let mut bits = vec![0u64; m.div_ceil(64) as usize];
            let mut occupied = 0;
            for &d in &self.digests {
                let slot = (u64::from(d) % m) as usize;
                let (word, bit) = (slot / 64, 1u64 << (slot % 64));
                if bits[word] & bit == 0 {
                    bits[word] |= bit;
                    occupied += 1;
                }
            }
            occupied
        } else {
            let mut slots: Vec<u64> = self.digests.iter().map(|&d| u64::from(d) % m).collect();
            slots.sort_unstable();
            slots.dedup();
            slots.len()
        };
        self.cache.insert(m, b);
        b
    }

    pub fn measure(&mut self, m: u64) -> Result<CollisionReport> {
        if m == 0 {
            return Err(Error::invalid("table size m must be at least 1"));
        }
        let u = self.unique_kmers();
        let b = self.occupied(m);
        Ok(CollisionReport {
            unique_kmers: u,
            occupied_buckets: b,
            collision_fraction: (u - b) as f64 / u as f64,
            m,
            seed: self.seed,
            k: self.vocabulary.k(),
        })
    }

    /// Pairs of vocabulary k-mers whose full 32-bit digests are equal.
    pub fn digest_collisions(&self) -> Vec<(String, String)> {
        let mut order: Vec<usize> = (0..self.digests.len()).collect();
        order.sort_unstable_by_key(|&i| (self.digests[i], i));
        order
            .windows(2)
            .filter(|w| self.digests[w[0]] == self.digests[w[1]])
            .map(|w| {
                let kmers = self.vocabulary.kmers();
                (kmers[w[0]].clone(), kmers[w[1]].clone())
            })
            .collect()
    }

    /// Finds a small verified table size whose collision fraction is at most
    /// `target`.
    ///
    /// Starts at `m = U`. If that already passes (and the target is nonzero)
    /// the size is halved until a probe fails; otherwise it is doubled until
    /// one passes. The bracket is then bisected, accepting only measured
    /// passes, because the fraction is not monotone in `m`. A zero target
    /// never probes below `U`.
    pub fn tune(&mut self, target: f64, policy: SearchPolicy) -> Result<TuneResult> {
        if !(0.0..1.0).contains(&target) {
            return Err(Error::invalid(format!("collision target {target} outside [0, 1)")));
        }
        if target == 0.0 {
            let pairs = self.digest_collisions();
            if !pairs.is_empty() {
                return Err(Error::IrreducibleCollision { pairs });
            }
        }

        let mut probes: Vec<Probe> = Vec::new();
        let mut probe = |meter: &mut Self, m: u64| -> Result<bool> {
            if probes.len() >= policy.max_probes {
                return Err(Error::ProbeLimitExceeded {
                    target,
                    limit: policy.max_probes,
                });
            }
            let fraction = meter.measure(m)?.collision_fraction;
            probes.push(Probe { m, fraction });
            Ok(fraction <= target)
        };

        let start = (self.unique_kmers() as u64).min(MAX_TABLE_SIZE);
        let (mut lo, mut hi);
        if probe(self, start)? {
            hi = start;
            lo = 0;
            if target > 0.0 {
                while hi > 1 {
                    let cand = hi / 2;
                    if probe(self, cand)? {
                        hi = cand;
                    } else {
                        lo = cand;
                        break;
                    }
                }
            }
        } else {
            lo = start;
            loop {
                if lo == MAX_TABLE_SIZE {
                    return Err(Error::IrreducibleCollision {
                        pairs: self.digest_collisions(),
                    });
                }
                let cand = (lo * 2).min(MAX_TABLE_SIZE);
                if probe(self, cand)? {
                    hi = cand;
                    break;
                }
                lo = cand;
            }
        }

        // lo == 0 means no failing probe was seen: hi is already minimal.
        if lo > 0 {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if probe(self, mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }

        Ok(TuneResult {
            target_fraction: target,
            chosen_m: hi,
            achieved: self.measure(hi)?,
            probes,
        })
    }
}

pub fn measure_collisions(vocabulary: &Vocabulary, m: u64, seed: HashSeed) -> Result<CollisionReport> {
    CollisionMeter::new(vocabulary, seed)?.measure(m)
}

pub fn tune_table_size(
    vocabulary: &Vocabulary,
    target_fraction: f64,
    seed: HashSeed,
    policy: SearchPolicy,
) -> Result<TuneResult> {
    CollisionMeter::new(vocabulary, seed)?.tune(target_fraction, policy)
}

/// One [`TuneResult`] per target, in the order given. Measurements are shared
/// across targets.
pub fn collision_curve(
    vocabulary: &Vocabulary,
    targets: &[f64],
    seed: HashSeed,
    policy: SearchPolicy,
) -> Result<Vec<TuneResult>> {
    let mut meter = CollisionMeter::new(vocabulary, seed)?;
    targets.iter().map(|&t| meter.tune(t, policy)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::murmur3::bucket_of;
    use std::collections::HashSet;

    fn vocab_of(n: usize) -> Vocabulary {
        // Distinct 4-letter k-mers over a 20-letter alphabet.
        let aa = crate::ingest::AMINO_ACIDS;
        let kmers = (0..n)
            .map(|i| {
                let mut x = i;
                (0..4)
                    .map(|_| {
                        let c = aa[x % 20] as char;
                        x /= 20;
                        c
                    })
                    .collect::<String>()
            })
            .collect();
        Vocabulary::from_unsorted(4, kmers).unwrap()
    }

    fn brute_occupied(v: &Vocabulary, m: u64, seed: HashSeed) -> usize {
        let buckets: HashSet<u64> = v.iter().map(|k| bucket_of(k.as_bytes(), seed, m).unwrap()).collect();
        buckets.len()
    }

    #[test]
    fn single_slot_and_single_kmer() {
        let v = vocab_of(10);
        let r = measure_collisions(&v, 1, HashSeed(0)).unwrap();
        assert_eq!(r.occupied_buckets, 1);
        assert!((r.collision_fraction - 0.9).abs() < 1e-15);
        let one = vocab_of(1);
        for m in [1, 2, 1000] {
            assert_eq!(measure_collisions(&one, m, HashSeed(3)).unwrap().collision_fraction, 0.0);
        }
    }

    #[test]
    fn empty_vocabulary_is_rejected() {
        let v = Vocabulary::from_sorted(3, vec![]).unwrap();
        assert!(matches!(measure_collisions(&v, 8, HashSeed(0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn matches_brute_force_on_both_paths() {
        let v = vocab_of(5000);
        for m in [1, 7, 8192, 4999, BITSET_LIMIT + 3, 1 << 30] {
            let r = measure_collisions(&v, m, HashSeed(0)).unwrap();
            assert_eq!(r.occupied_buckets, brute_occupied(&v, m, HashSeed(0)), "m = {m}");
            assert!(r.occupied_buckets >= 1 && r.occupied_buckets as u64 <= m.min(5000));
        }
    }

    #[test]
    fn single_kmer_tunes_to_one() {
        let r = tune_table_size(&vocab_of(1), 0.0, HashSeed(0), SearchPolicy::default()).unwrap();
        assert_eq!(r.chosen_m, 1);
        let curve = collision_curve(&vocab_of(1), &[0.4, 0.0], HashSeed(0), SearchPolicy::default()).unwrap();
        assert!(curve.iter().all(|r| r.chosen_m == 1));
    }

    #[test]
    fn tuned_size_meets_target() {
        let v = vocab_of(5000);
        let r = tune_table_size(&v, 0.40, HashSeed(0), SearchPolicy::default()).unwrap();
        assert!(r.achieved.collision_fraction <= 0.40);
        assert_eq!(r.achieved.m, r.chosen_m);
        let occupied = brute_occupied(&v, r.chosen_m, HashSeed(0));
        assert_eq!(occupied, r.achieved.occupied_buckets);
        assert!(1.0 - occupied as f64 / 5000.0 <= 0.40 + 1e-12);
        // The neighbour just below the answer was probed and failed.
        assert!(r.probes.iter().any(|p| p.m == r.chosen_m - 1 && p.fraction > 0.40));
    }

    #[test]
    fn zero_target_is_injective_and_never_below_u() {
        let v = vocab_of(300);
        let r = tune_table_size(&v, 0.0, HashSeed(0), SearchPolicy::default()).unwrap();
        assert_eq!(r.achieved.collision_fraction, 0.0);
        assert_eq!(r.achieved.occupied_buckets, 300);
        assert!(r.probes.iter().all(|p| p.m >= 300));
    }

    #[test]
    fn invalid_targets() {
        let v = vocab_of(5);
        for t in [1.0, -0.1, f64::NAN] {
            assert!(matches!(
                tune_table_size(&v, t, HashSeed(0), SearchPolicy::default()),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn probe_limit_is_enforced() {
        let v = vocab_of(2000);
        let err = tune_table_size(&v, 0.0, HashSeed(0), SearchPolicy { max_probes: 3 }).unwrap_err();
        assert!(matches!(err, Error::ProbeLimitExceeded { limit: 3, .. }));
    }

    #[test]
    fn curve_is_monotone_down_the_grid() {
        let v = vocab_of(3000);
        let curve = collision_curve(&v, &COLLISION_GRID, HashSeed(0), SearchPolicy::default()).unwrap();
        assert_eq!(curve.len(), 12);
        for w in curve.windows(2) {
            assert!(w[0].chosen_m <= w[1].chosen_m);
        }
        for r in &curve {
            assert!(r.achieved.collision_fraction <= r.target_fraction);
            assert_eq!(
                measure_collisions(&v, r.chosen_m, HashSeed(0)).unwrap(),
                r.achieved
            );
        }
    }

    #[test]
    fn irreducible_collision_is_reported() {
        // murmur32 of both 6-mers under seed 0 is 0x2f5c16ac.
        let v = Vocabulary::from_unsorted(6, vec!["AACAVI".into(), "AACNRE".into(), "MDPEGK".into()]).unwrap();
        let meter = CollisionMeter::new(&v, HashSeed(0)).unwrap();
        assert_eq!(meter.digest_collisions(), [("AACAVI".to_string(), "AACNRE".to_string())]);
        let err = tune_table_size(&v, 0.0, HashSeed(0), SearchPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::IrreducibleCollision { pairs } if pairs.len() == 1));
        // A nonzero budget is still reachable.
        let r = tune_table_size(&v, 0.4, HashSeed(0), SearchPolicy::default()).unwrap();
        assert!(r.achieved.collision_fraction <= 0.4);
        assert!(CollisionMeter::new(&vocab_of(500), HashSeed(0)).unwrap().digest_collisions().is_empty());
    }
}
