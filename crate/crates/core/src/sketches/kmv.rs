use std::collections::BTreeMap;

use super::{Estimate, SketchParams};
use crate::error::{Error, Result};

/// Generalized Counting: the M distinct tuples with the smallest hashes.
///
/// Entries are ordered by `(hash, key)`, so distinct tuples that collide on
/// their hash are both retained and the kept set does not depend on the
/// arrival order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KmvSketch {
    params: SketchParams,
    // hash -> keys with that hash, sorted
    entries: BTreeMap<u64, Vec<Box<[u8]>>>,
    len: usize,
    // some distinct tuple was turned away, so more than M were seen
    saturated: bool,
}

impl KmvSketch {
    pub fn new(params: SketchParams) -> Result<Self> {
        if params.memory == 0 {
            return Err(Error::invalid("memory budget must be positive"));
        }
        Ok(KmvSketch {
            params,
            entries: BTreeMap::new(),
            len: 0,
            saturated: false,
        })
    }

    pub fn params(&self) -> SketchParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether more than M distinct tuples were seen.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub(crate) fn set_saturated(&mut self, saturated: bool) {
        self.saturated = saturated;
    }

    /// Largest stored hash, max(𝓜).
    pub fn max_hash(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// Stored `(hash, key)` pairs in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &[u8])> + '_ {
        self.entries
            .iter()
            .flat_map(|(&h, keys)| keys.iter().map(move |k| (h, &k[..])))
    }

    pub fn update(&mut self, key: &[u8], hash: u64) {
        if self.len >= self.params.memory {
            // fast path: not smaller than the current maximum
            let (&max, keys) = self.entries.last_key_value().expect("full sketch");
            let last = &*keys[keys.len() - 1];
            if hash > max || (hash == max && key > last) {
                self.saturated = true;
                return;
            }
            if hash == max && key == last {
                return;
            }
        }
        let keys = self.entries.entry(hash).or_default();
        match keys.binary_search_by(|k| (**k).cmp(key)) {
            Ok(_) => return,
            Err(pos) => keys.insert(pos, key.into()),
        }
        self.len += 1;
        if self.len > self.params.memory {
            self.saturated = true;
            self.pop_max();
        }
    }

    fn pop_max(&mut self) {
        let mut last = self.entries.last_entry().expect("non-empty sketch");
        last.get_mut().pop();
        if last.get().is_empty() {
            last.remove();
        }
        self.len -= 1;
    }

    /// Exact count while at most M distinct tuples were seen, otherwise
    /// 2^L · M / max(𝓜).
    pub fn estimate(&self) -> Estimate {
        if !self.saturated {
            return Estimate::exact(self.len as u64);
        }
        // a zero maximum would need M zero hashes; treat it as 1
        let max = self.max_hash().unwrap_or(1).max(1) as f64;
        Estimate::approximate(self.params.bits.range() * self.len as f64 / max)
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        self.params.check_same(&other.params)?;
        for (hash, key) in other.iter() {
            self.update(key, hash);
        }
        self.saturated |= other.saturated;
        Ok(())
    }
}
