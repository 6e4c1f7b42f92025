use std::f64::consts::{LN_2, PI};

use super::{Estimate, SketchParams};
use crate::error::Result;
use crate::hashing::first_one_bit_position;

/// Fraction of empty buckets from which Adaptive Counting switches to
/// linear counting.
pub const LINEAR_COUNTING_THRESHOLD: f64 = 0.051;

/// LogLog bias correction α_M ≈ 0.39701 − (2π² + ln²2)/(48M).
pub fn loglog_alpha(m: usize) -> f64 {
    0.39701 - (2.0 * PI * PI + LN_2 * LN_2) / (48.0 * m as f64)
}

/// M buckets holding the largest 1-based first-one-bit position seen.
///
/// The bucket index is the low log2 M bits of the hash; the position is
/// scanned upward from the next bit, and an all-zero remainder counts as
/// `L - log2 M + 1`. Shared by LogLog and Adaptive Counting, which only
/// differ in how they read the counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketMaxSketch {
    params: SketchParams,
    log2m: u32,
    counters: Vec<u8>,
}

impl BucketMaxSketch {
    pub fn new(params: SketchParams) -> Result<Self> {
        let log2m = params.log2_buckets()?;
        Ok(BucketMaxSketch {
            params,
            log2m,
            counters: vec![0; params.memory],
        })
    }

    pub(crate) fn from_counters(params: SketchParams, counters: Vec<u8>) -> Result<Self> {
        let mut s = Self::new(params)?;
        s.counters = counters;
        Ok(s)
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    pub fn counters(&self) -> &[u8] {
        &self.counters
    }

    /// Largest value a counter can take.
    pub fn max_counter(&self) -> u8 {
        (self.params.bits.width() - self.log2m + 1) as u8
    }

    /// Bits needed per counter.
    pub fn counter_bits(&self) -> u32 {
        u32::BITS - (self.max_counter() as u32).leading_zeros()
    }

    #[inline]
    pub fn update(&mut self, hash: u64) {
        let bucket = (hash & (self.params.memory as u64 - 1)) as usize;
        let z = first_one_bit_position(hash >> self.log2m, self.params.bits.width() - self.log2m) + 1;
        let c = &mut self.counters[bucket];
        *c = (*c).max(z as u8);
    }

    /// Number of counters still at zero (β).
    pub fn empty_buckets(&self) -> usize {
        self.counters.iter().filter(|&&c| c == 0).count()
    }

    /// α_M · M · 2^(mean counter).
    pub fn loglog_estimate(&self) -> Estimate {
        let m = self.params.memory as f64;
        let sum: u64 = self.counters.iter().map(|&c| c as u64).sum();
        Estimate::approximate(loglog_alpha(self.params.memory) * m * (sum as f64 / m).exp2())
    }

    /// −M · ln(β/M), the linear counting estimate.
    pub fn linear_counting_estimate(&self) -> Option<Estimate> {
        let empty = self.empty_buckets();
        (empty > 0).then(|| {
            let m = self.params.memory as f64;
            Estimate::approximate(-m * (empty as f64 / m).ln())
        })
    }

    /// Linear counting while at least 5.1% of the buckets are empty,
    /// LogLog afterwards.
    pub fn adaptive_estimate(&self) -> Estimate {
        let empty_ratio = self.empty_buckets() as f64 / self.params.memory as f64;
        if empty_ratio >= LINEAR_COUNTING_THRESHOLD {
            if let Some(e) = self.linear_counting_estimate() {
                return e;
            }
        }
        self.loglog_estimate()
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        self.params.check_same(&other.params)?;
        for (a, &b) in self.counters.iter_mut().zip(&other.counters) {
            *a = (*a).max(b);
        }
        Ok(())
    }
}
