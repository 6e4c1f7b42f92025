//! Streaming distinct-count sketches.
//!
//! All sketches consume `(key, hash)` pairs where `hash` is the L-bit word of
//! a projected tuple and `key` its canonical encoding. Bit-pattern sketches
//! only look at the hash; the tuple-storing ones (KMV and Gibbons–Tirthapura)
//! also keep the key so that repeated tuples are recognised.
//!
//! Two sketches can be merged when they share the memory budget, the hash
//! width and the hashing seed; the merged state is identical to the state a
//! single pass over both inputs would have produced.

mod codec;
mod gt;
mod kmv;
mod loglog;
mod pc;

use std::fmt;
use std::str::FromStr;

pub use self::codec::{decode, encode};
pub use self::gt::GtSketch;
pub use self::kmv::KmvSketch;
pub use self::loglog::{loglog_alpha, BucketMaxSketch, LINEAR_COUNTING_THRESHOLD};
pub use self::pc::{BitMatrixSketch, PHI};

use crate::error::{Error, Result};
use crate::hashing::HashBits;

/// Result of an estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// The sketch certifies the value is the exact distinct count.
    pub exact: bool,
}

impl Estimate {
    pub fn approximate(value: f64) -> Self {
        Estimate { value, exact: false }
    }

    pub fn exact(count: u64) -> Self {
        Estimate {
            value: count as f64,
            exact: true,
        }
    }
}

/// Estimation technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technique {
    /// Probabilistic Counting.
    Pc,
    /// LogLog.
    Ll,
    /// Adaptive Counting.
    Ac,
    /// Generalized Counting.
    Gc,
    /// Gibbons–Tirthapura.
    Gt,
    /// Sample-based multifractal model.
    Mf,
    /// Brute-force count.
    Exact,
}

impl Technique {
    pub const SKETCHES: [Technique; 5] = [
        Technique::Pc,
        Technique::Ll,
        Technique::Ac,
        Technique::Gc,
        Technique::Gt,
    ];

    pub fn is_sketch(self) -> bool {
        Self::SKETCHES.contains(&self)
    }

    /// Whether the sketch stores tuples and so needs their canonical keys.
    pub fn needs_key(self) -> bool {
        matches!(self, Technique::Gc | Technique::Gt)
    }

    pub fn name(self) -> &'static str {
        match self {
            Technique::Pc => "pc",
            Technique::Ll => "ll",
            Technique::Ac => "ac",
            Technique::Gc => "gc",
            Technique::Gt => "gt",
            Technique::Mf => "mf",
            Technique::Exact => "exact",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "pc" => Technique::Pc,
            "ll" => Technique::Ll,
            "ac" => Technique::Ac,
            "gc" => Technique::Gc,
            "gt" => Technique::Gt,
            "mf" => Technique::Mf,
            "exact" => Technique::Exact,
            other => return Err(Error::invalid(format!("unknown technique `{other}`"))),
        })
    }
}

/// Parameters shared by all sketch kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchParams {
    /// Memory budget M: rows, buckets or stored tuples.
    pub memory: usize,
    pub bits: HashBits,
    /// Master seed of the tuple hasher feeding the sketch.
    pub seed: u64,
}

impl SketchParams {
    pub fn new(memory: usize, bits: HashBits, seed: u64) -> Self {
        SketchParams { memory, bits, seed }
    }

    /// log2 M for power-of-two budgets with `1 <= log2 M < L`.
    pub(crate) fn log2_buckets(&self) -> Result<u32> {
        let m = self.memory;
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::invalid(format!("memory budget {m} must be a power of two >= 2")));
        }
        let k = m.trailing_zeros();
        if k >= self.bits.width() {
            return Err(Error::invalid(format!(
                "memory budget 2^{k} leaves no bits of a {}-bit hash",
                self.bits.width()
            )));
        }
        Ok(k)
    }

    pub(crate) fn check_same(&self, other: &SketchParams) -> Result<()> {
        if self != other {
            return Err(Error::Incompatible(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Common interface of the streaming sketches.
pub trait DistinctSketch {
    /// Feeds one tuple, given its canonical key and its hash.
    fn insert(&mut self, key: &[u8], hash: u64);

    fn estimate(&self) -> Estimate;

    /// Folds `other` into `self`.
    fn merge(&mut self, other: &Self) -> Result<()>;

    fn params(&self) -> SketchParams;
}

/// A sketch of any technique, selected at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySketch {
    Pc(BitMatrixSketch),
    Ll(BucketMaxSketch),
    Ac(BucketMaxSketch),
    Gc(KmvSketch),
    Gt(GtSketch),
}

impl AnySketch {
    pub fn new(technique: Technique, params: SketchParams) -> Result<Self> {
        Ok(match technique {
            Technique::Pc => AnySketch::Pc(BitMatrixSketch::new(params)?),
            Technique::Ll => AnySketch::Ll(BucketMaxSketch::new(params)?),
            Technique::Ac => AnySketch::Ac(BucketMaxSketch::new(params)?),
            Technique::Gc => AnySketch::Gc(KmvSketch::new(params)?),
            Technique::Gt => AnySketch::Gt(GtSketch::new(params)?),
            other => return Err(Error::invalid(format!("`{other}` is not a streaming sketch"))),
        })
    }

    pub fn technique(&self) -> Technique {
        match self {
            AnySketch::Pc(_) => Technique::Pc,
            AnySketch::Ll(_) => Technique::Ll,
            AnySketch::Ac(_) => Technique::Ac,
            AnySketch::Gc(_) => Technique::Gc,
            AnySketch::Gt(_) => Technique::Gt,
        }
    }
}

impl DistinctSketch for AnySketch {
    #[inline]
    fn insert(&mut self, key: &[u8], hash: u64) {
        match self {
            AnySketch::Pc(s) => s.update(hash),
            AnySketch::Ll(s) | AnySketch::Ac(s) => s.update(hash),
            AnySketch::Gc(s) => s.update(key, hash),
            AnySketch::Gt(s) => s.update(key, hash),
        }
    }

    fn estimate(&self) -> Estimate {
        match self {
            AnySketch::Pc(s) => s.estimate(),
            AnySketch::Ll(s) => s.loglog_estimate(),
            AnySketch::Ac(s) => s.adaptive_estimate(),
            AnySketch::Gc(s) => s.estimate(),
            AnySketch::Gt(s) => s.estimate(),
        }
    }

    fn merge(&mut self, other: &Self) -> Result<()> {
        match (self, other) {
            (AnySketch::Pc(a), AnySketch::Pc(b)) => a.merge(b),
            (AnySketch::Ll(a), AnySketch::Ll(b)) | (AnySketch::Ac(a), AnySketch::Ac(b)) => a.merge(b),
            (AnySketch::Gc(a), AnySketch::Gc(b)) => a.merge(b),
            (AnySketch::Gt(a), AnySketch::Gt(b)) => a.merge(b),
            (a, b) => Err(Error::Incompatible(format!(
                "cannot merge {} into {}",
                b.technique(),
                a.technique()
            ))),
        }
    }

    fn params(&self) -> SketchParams {
        match self {
            AnySketch::Pc(s) => s.params(),
            AnySketch::Ll(s) | AnySketch::Ac(s) => s.params(),
            AnySketch::Gc(s) => s.params(),
            AnySketch::Gt(s) => s.params(),
        }
    }
}

macro_rules! impl_distinct_sketch {
    ($ty:ty, $insert:expr, $estimate:expr) => {
        impl DistinctSketch for $ty {
            #[inline]
            fn insert(&mut self, key: &[u8], hash: u64) {
                $insert(self, key, hash)
            }
            fn estimate(&self) -> Estimate {
                $estimate(self)
            }
            fn merge(&mut self, other: &Self) -> Result<()> {
                <$ty>::merge(self, other)
            }
            fn params(&self) -> SketchParams {
                <$ty>::params(self)
            }
        }
    };
}

impl_distinct_sketch!(
    BitMatrixSketch,
    |s: &mut BitMatrixSketch, _k, h| s.update(h),
    BitMatrixSketch::estimate
);
impl_distinct_sketch!(KmvSketch, KmvSketch::update, KmvSketch::estimate);
impl_distinct_sketch!(GtSketch, GtSketch::update, GtSketch::estimate);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::TupleHasher;
    use crate::ingest::encode_tuple;
    use crate::oracle::exact_distinct_keys;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hashed_stream(values: &[u32], seed: u64, bits: HashBits) -> Vec<(Vec<u8>, u64)> {
        let mut h = TupleHasher::new(bits, seed);
        values
            .iter()
            .map(|v| {
                let s = format!("k{v}");
                (encode_tuple(&[&s]), h.hash_attribute(0, &s))
            })
            .collect()
    }

    fn feed(s: &mut AnySketch, items: &[(Vec<u8>, u64)]) {
        for (k, h) in items {
            s.insert(k, *h);
        }
    }

    fn kinds() -> impl Strategy<Value = Technique> {
        prop::sample::select(Technique::SKETCHES.to_vec())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reupdates_and_permutations_do_not_change_estimates(
            tech in kinds(),
            values in prop::collection::vec(0u32..400, 0..600),
            log2m in 1u32..7,
            seed in any::<u64>(),
        ) {
            let params = SketchParams::new(1 << log2m, HashBits::L64, seed);
            let items = hashed_stream(&values, seed, HashBits::L64);
            let mut once = AnySketch::new(tech, params).unwrap();
            feed(&mut once, &items);

            let mut twice = once.clone();
            feed(&mut twice, &items);
            prop_assert_eq!(&twice, &once);

            let mut shuffled = items.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut permuted = AnySketch::new(tech, params).unwrap();
            feed(&mut permuted, &shuffled);
            prop_assert_eq!(&permuted, &once);
            prop_assert_eq!(permuted.estimate(), once.estimate());
        }

        #[test]
        fn merged_state_equals_single_pass(
            tech in kinds(),
            values in prop::collection::vec(0u32..2_000, 0..1_500),
            log2m in 1u32..8,
            seed in any::<u64>(),
        ) {
            let params = SketchParams::new(1 << log2m, HashBits::L32, seed);
            let items = hashed_stream(&values, seed, HashBits::L32);
            let mut single = AnySketch::new(tech, params).unwrap();
            feed(&mut single, &items);

            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            let cut = if items.is_empty() { 0 } else { rng.gen_range(0..=items.len()) };
            let mut left = AnySketch::new(tech, params).unwrap();
            let mut right = AnySketch::new(tech, params).unwrap();
            feed(&mut left, &items[..cut]);
            feed(&mut right, &items[cut..]);
            let mut lr = left.clone();
            lr.merge(&right).unwrap();
            let mut rl = right.clone();
            rl.merge(&left).unwrap();
            prop_assert_eq!(&lr, &single);
            prop_assert_eq!(&rl, &single);
        }

        #[test]
        fn exact_below_budget(
            values in prop::collection::vec(0u32..300, 0..300),
            seed in any::<u64>(),
        ) {
            let items = hashed_stream(&values, seed, HashBits::L64);
            let truth = exact_distinct_keys(items.iter().map(|(k, _)| k.as_slice()));
            let params = SketchParams::new(512, HashBits::L64, seed);
            for tech in [Technique::Gc, Technique::Gt] {
                let mut s = AnySketch::new(tech, params).unwrap();
                feed(&mut s, &items);
                prop_assert_eq!(s.estimate(), Estimate::exact(truth));
            }
        }

        #[test]
        fn state_is_monotone(
            values in prop::collection::vec(any::<u32>(), 1..800),
            seed in any::<u64>(),
        ) {
            let items = hashed_stream(&values, seed, HashBits::L64);
            let params = SketchParams::new(16, HashBits::L64, seed);
            let mut pc = BitMatrixSketch::new(params).unwrap();
            let mut ll = BucketMaxSketch::new(params).unwrap();
            let mut gt = GtSketch::new(params).unwrap();
            let mut gc = KmvSketch::new(params).unwrap();
            for (k, h) in &items {
                let (rows, counters, level) = (pc.rows().to_vec(), ll.counters().to_vec(), gt.level());
                let (full, max) = (gc.len() == 16, gc.max_hash());
                pc.update(*h);
                ll.update(*h);
                gt.update(k, *h);
                gc.update(k, *h);
                prop_assert!(rows.iter().zip(pc.rows()).all(|(a, b)| a & b == *a));
                prop_assert!(counters.iter().zip(ll.counters()).all(|(a, b)| a <= b));
                prop_assert!(gt.level() >= level);
                prop_assert!(gt.len() <= 16);
                prop_assert!(gc.len() <= 16);
                if full {
                    prop_assert!(gc.max_hash() <= max);
                }
            }
        }
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let items = hashed_stream(&(0..3000).collect::<Vec<_>>(), 4, HashBits::L64);
        for tech in Technique::SKETCHES {
            let params = SketchParams::new(64, HashBits::L64, 4);
            let mut s = AnySketch::new(tech, params).unwrap();
            feed(&mut s, &items);
            let before = s.clone();
            s.merge(&AnySketch::new(tech, params).unwrap()).unwrap();
            assert_eq!(s, before, "{tech}");
        }
    }

    #[test]
    fn merge_rejects_mismatches() {
        let a = SketchParams::new(64, HashBits::L64, 1);
        for tech in Technique::SKETCHES {
            let mut s = AnySketch::new(tech, a).unwrap();
            for other in [
                SketchParams::new(128, HashBits::L64, 1),
                SketchParams::new(64, HashBits::L32, 1),
                SketchParams::new(64, HashBits::L64, 2),
            ] {
                assert!(s.merge(&AnySketch::new(tech, other).unwrap()).is_err(), "{tech}");
            }
        }
        let mut pc = AnySketch::new(Technique::Pc, a).unwrap();
        assert!(pc.merge(&AnySketch::new(Technique::Ll, a).unwrap()).is_err());
        let mut ll = AnySketch::new(Technique::Ll, a).unwrap();
        assert!(ll.merge(&AnySketch::new(Technique::Ac, a).unwrap()).is_err());
    }

    #[test]
    fn technique_names_roundtrip() {
        for t in Technique::SKETCHES.into_iter().chain([Technique::Mf, Technique::Exact]) {
            assert_eq!(t.name().parse::<Technique>().unwrap(), t);
        }
        assert!("hll".parse::<Technique>().is_err());
        assert!(AnySketch::new(Technique::Mf, SketchParams::new(8, HashBits::L64, 0)).is_err());
    }
}
