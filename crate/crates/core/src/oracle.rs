//! Brute-force ground truth for view sizes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ingest::{encode_projection, Row, ViewQuery};

/// Exact size of a view, with its histogram when requested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub distinct: u64,
    pub rows: u64,
    /// Canonical tuple encoding to number of occurrences.
    pub histogram: Option<HashMap<Vec<u8>, u64>>,
}

impl ExactResult {
    /// Occurrences of the most frequent tuple (0 without a histogram or rows).
    pub fn max_multiplicity(&self) -> u64 {
        self.histogram
            .as_ref()
            .and_then(|h| h.values().copied().max())
            .unwrap_or(0)
    }
}

/// Counts the distinct projections of `rows` onto `query`.
pub fn exact_view_size<I>(rows: I, query: &ViewQuery, keep_histogram: bool) -> Result<ExactResult>
where
    I: IntoIterator<Item = Result<Row>>,
{
    let mut n = 0u64;
    let mut key = Vec::new();
    if keep_histogram {
        let mut hist: HashMap<Vec<u8>, u64> = HashMap::new();
        for row in rows {
            let row = row?;
            key.clear();
            encode_projection(&row, query, &mut key)?;
            n += 1;
            if let Some(c) = hist.get_mut(key.as_slice()) {
                *c += 1;
            } else {
                hist.try_reserve(1).map_err(|_| Error::OutOfMemory)?;
                hist.insert(key.clone(), 1);
            }
        }
        Ok(ExactResult {
            distinct: hist.len() as u64,
            rows: n,
            histogram: Some(hist),
        })
    } else {
        let mut set: HashSet<Vec<u8>> = HashSet::new();
        for row in rows {
            let row = row?;
            key.clear();
            encode_projection(&row, query, &mut key)?;
            n += 1;
            if !set.contains(key.as_slice()) {
                set.try_reserve(1).map_err(|_| Error::OutOfMemory)?;
                set.insert(key.clone());
            }
        }
        Ok(ExactResult {
            distinct: set.len() as u64,
            rows: n,
            histogram: None,
        })
    }
}

/// Number of distinct keys among already encoded tuples.
pub fn exact_distinct_keys<'a>(keys: impl IntoIterator<Item = &'a [u8]>) -> u64 {
    keys.into_iter().collect::<HashSet<_>>().len() as u64
}

/// Exact counts persisted as `signature<TAB>count` lines, so repeated
/// sweeps count each view once.
#[derive(Debug, Default)]
pub struct OracleCache {
    path: Option<PathBuf>,
    counts: BTreeMap<String, u64>,
}

impl OracleCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists; [`save`](Self::save) writes back to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut counts = BTreeMap::new();
        match fs::read_to_string(&path) {
            Ok(text) => {
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let (sig, count) = line
                        .rsplit_once('\t')
                        .ok_or_else(|| Error::format("oracle cache", format!("line {}", i + 1)))?;
                    let count = count
                        .trim()
                        .parse()
                        .map_err(|_| Error::format("oracle cache", format!("line {}", i + 1)))?;
                    counts.insert(sig.to_owned(), count);
                }
            }
            Err(e) if e.kind() == ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        Ok(OracleCache {
            path: Some(path),
            counts,
        })
    }

    pub fn signature(dataset: &str, query: &ViewQuery) -> String {
        format!("{dataset}|{query}")
    }

    pub fn get(&self, signature: &str) -> Option<u64> {
        self.counts.get(signature).copied()
    }

    pub fn insert(&mut self, signature: String, count: u64) {
        self.counts.insert(signature, count);
    }

    /// Cached count, computing it with `compute` on a miss.
    pub fn get_or_compute(&mut self, signature: &str, compute: impl FnOnce() -> Result<u64>) -> Result<u64> {
        if let Some(c) = self.get(signature) {
            return Ok(c);
        }
        let c = compute()?;
        self.insert(signature.to_owned(), c);
        Ok(c)
    }

    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut text = String::from("# view signature\tdistinct tuples\n");
        for (sig, count) in &self.counts {
            text.push_str(&format!("{sig}\t{count}\n"));
        }
        fs::write(path, text)?;
        Ok(())
    }
}
