use super::{Estimate, SketchParams};
use crate::error::Result;
use crate::hashing::first_one_bit_position;

/// Flajolet–Martin correction constant.
pub const PHI: f64 = 0.77351;

/// Probabilistic Counting: an M×L bit matrix.
///
/// The low log2 M bits of a hash pick a row; in that row the bit indexed by
/// the position of the first 1-bit of the remaining bits is set. Row `α` of
/// the matrix is stored as the low L bits of `rows[α]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrixSketch {
    params: SketchParams,
    log2m: u32,
    rows: Vec<u64>,
}

impl BitMatrixSketch {
    pub fn new(params: SketchParams) -> Result<Self> {
        let log2m = params.log2_buckets()?;
        Ok(BitMatrixSketch {
            params,
            log2m,
            rows: vec![0; params.memory],
        })
    }

    pub(crate) fn from_rows(params: SketchParams, rows: Vec<u64>) -> Result<Self> {
        let mut s = Self::new(params)?;
        s.rows = rows;
        Ok(s)
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Memory of the bit matrix, M·L bits.
    pub fn size_in_bits(&self) -> usize {
        self.rows.len() * self.params.bits.width() as usize
    }

    #[inline]
    pub fn update(&mut self, hash: u64) {
        let row = (hash & (self.params.memory as u64 - 1)) as usize;
        // the all-zero remainder sets the capped bit L - log2 M
        let bit = first_one_bit_position(hash >> self.log2m, self.params.bits.width() - self.log2m);
        self.rows[row] |= 1 << bit;
    }

    /// Sum over rows of the index of the first zero bit.
    pub fn first_zero_sum(&self) -> u64 {
        let width = self.params.bits.width();
        self.rows.iter().map(|r| r.trailing_ones().min(width) as u64).sum()
    }

    /// M/φ · 2^(A/M).
    pub fn estimate(&self) -> Estimate {
        let m = self.params.memory as f64;
        Estimate::approximate(m / PHI * (self.first_zero_sum() as f64 / m).exp2())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        self.params.check_same(&other.params)?;
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            *a |= b;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::HashBits;

    fn sketch(m: usize, bits: HashBits) -> BitMatrixSketch {
        BitMatrixSketch::new(SketchParams::new(m, bits, 0)).unwrap()
    }

    #[test]
    fn zero_hash_sets_capped_bit() {
        let mut s = sketch(16, HashBits::L64);
        s.update(0);
        assert_eq!(s.rows()[0], 1 << 60);
        let mut s = sketch(16, HashBits::L32);
        s.update(0);
        assert_eq!(s.rows()[0], 1 << 28);
    }

    #[test]
    fn hash_equal_to_m_sets_bit_zero_of_row_zero() {
        let mut s = sketch(16, HashBits::L64);
        s.update(16);
        assert_eq!(s.rows()[0], 1);
        s.update(16 * 8 + 5);
        assert_eq!(s.rows()[5], 1 << 3);
    }

    #[test]
    fn update_is_idempotent() {
        let mut s = sketch(16, HashBits::L64);
        s.update(0xdead_beef);
        let before = s.clone();
        s.update(0xdead_beef);
        assert_eq!(s, before);
    }

    #[test]
    fn empty_matrix_estimate() {
        // 64 / 0.77351
        let e = sketch(64, HashBits::L64).estimate();
        assert!((e.value - 82.739_718_943_517).abs() < 1e-9, "{}", e.value);
        assert!(!e.exact);
    }

    #[test]
    fn bit_zero_everywhere_doubles_the_base() {
        let m = 32;
        let mut s = sketch(m, HashBits::L64);
        for row in 0..m as u64 {
            s.update(row | (1 << 5));
        }
        assert_eq!(s.first_zero_sum(), m as u64);
        assert!((s.estimate().value - 2.0 * m as f64 / PHI).abs() < 1e-9);
    }

    #[test]
    fn full_rows_count_l() {
        let mut s = sketch(2, HashBits::L32);
        for bit in 0..=31 {
            s.update(if bit == 31 { 0 } else { 1 << (bit + 1) });
        }
        assert_eq!(s.rows()[0], u32::MAX as u64);
        assert_eq!(s.first_zero_sum(), 32);
    }

    #[test]
    fn memory_contract() {
        assert_eq!(sketch(1024, HashBits::L64).size_in_bits(), 1024 * 64);
        assert!(BitMatrixSketch::new(SketchParams::new(100, HashBits::L64, 0)).is_err());
        assert!(BitMatrixSketch::new(SketchParams::new(1, HashBits::L64, 0)).is_err());
        assert!(BitMatrixSketch::new(SketchParams::new(1 << 32, HashBits::L32, 0)).is_err());
    }
}
