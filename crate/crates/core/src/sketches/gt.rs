use std::collections::HashMap;

use super::{Estimate, SketchParams};
use crate::error::{Error, Result};
use crate::hashing::first_one_bit_position;

/// Gibbons–Tirthapura level sampling.
///
/// A tuple's level is the 0-based position of the first 1-bit of its hash.
/// Tuples of level at least `t` are kept; whenever more than M are kept,
/// `t` grows and lower levels are dropped. Each distinct tuple survives with
/// probability 2^-t, hence the estimate 2^t · size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtSketch {
    params: SketchParams,
    entries: HashMap<Box<[u8]>, u8>,
    level: u32,
}

impl GtSketch {
    pub fn new(params: SketchParams) -> Result<Self> {
        if params.memory == 0 {
            return Err(Error::invalid("memory budget must be positive"));
        }
        Ok(GtSketch {
            params,
            entries: HashMap::new(),
            level: 0,
        })
    }

    pub(crate) fn from_parts(params: SketchParams, level: u32, entries: HashMap<Box<[u8]>, u8>) -> Result<Self> {
        let mut s = Self::new(params)?;
        s.level = level;
        s.entries = entries;
        Ok(s)
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    /// Current sampling level t.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u32)> + '_ {
        self.entries.iter().map(|(k, &l)| (&k[..], l as u32))
    }

    pub fn update(&mut self, key: &[u8], hash: u64) {
        let level = first_one_bit_position(hash, self.params.bits.width());
        self.admit(key, level);
    }

    fn admit(&mut self, key: &[u8], level: u32) {
        if level < self.level || self.entries.contains_key(key) {
            return;
        }
        self.entries.insert(key.into(), level as u8);
        self.prune();
    }

    fn prune(&mut self) {
        while self.entries.len() > self.params.memory {
            self.level += 1;
            let t = self.level;
            self.entries.retain(|_, l| *l as u32 >= t);
        }
    }

    /// 2^t · size; exact while t = 0.
    pub fn estimate(&self) -> Estimate {
        if self.level == 0 {
            return Estimate::exact(self.entries.len() as u64);
        }
        Estimate::approximate(2f64.powi(self.level as i32) * self.entries.len() as f64)
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        self.params.check_same(&other.params)?;
        if other.level > self.level {
            self.level = other.level;
            let t = self.level;
            self.entries.retain(|_, l| *l as u32 >= t);
        }
        for (key, level) in other.iter() {
            self.admit(key, level);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::HashBits;

    fn sketch(m: usize) -> GtSketch {
        GtSketch::new(SketchParams::new(m, HashBits::L64, 0)).unwrap()
    }

    #[test]
    fn level_zero_admits_everything() {
        let mut s = sketch(8);
        for (i, h) in [1u64, 2, 4, 3, 0].into_iter().enumerate() {
            s.update(&[i as u8], h);
        }
        assert_eq!(s.len(), 5);
        assert_eq!(s.level(), 0);
        assert_eq!(s.estimate(), Estimate::exact(5));
    }

    #[test]
    fn hand_simulated_overflow() {
        // five distinct tuples with levels 0,0,0,0,1 and M = 4
        let mut s = sketch(4);
        for (i, h) in [1u64, 3, 5, 7, 2].into_iter().enumerate() {
            s.update(&[i as u8], h);
        }
        assert_eq!(s.level(), 1);
        assert_eq!(s.iter().collect::<Vec<_>>(), [(&[4u8][..], 1)]);
        assert_eq!(s.estimate(), Estimate::approximate(2.0));
    }

    #[test]
    fn low_levels_are_ignored_once_t_grows() {
        let mut s = sketch(1);
        s.update(b"a", 0b100);
        s.update(b"b", 0b1000);
        assert_eq!(s.level(), 3);
        s.update(b"c", 0b10);
        assert_eq!(s.len(), 1);
        assert_eq!(s.level(), 3);
    }

    #[test]
    fn estimate_arithmetic() {
        let mut entries = HashMap::new();
        for i in 0..900u32 {
            entries.insert(i.to_le_bytes().to_vec().into_boxed_slice(), 5u8);
        }
        let s = GtSketch::from_parts(SketchParams::new(1000, HashBits::L64, 0), 3, entries).unwrap();
        assert_eq!(s.estimate(), Estimate::approximate(7200.0));
        assert_eq!(sketch(10).estimate(), Estimate::exact(0));
    }

    #[test]
    fn zero_hash_has_top_level() {
        let mut s = sketch(1);
        s.update(b"z", 0);
        s.update(b"y", 1 << 40);
        assert_eq!(s.level(), 41);
        assert_eq!(s.iter().collect::<Vec<_>>(), [(&b"z"[..], 64)]);
    }
}
