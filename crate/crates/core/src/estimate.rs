//! One-pass view-size estimation: project, hash, update.
//!
//! [`ViewEstimator`] feeds a stream of rows to any number of sketches that
//! share one [`TupleHasher`], and accounts the time spent loading rows,
//! hashing them and updating the sketches.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::hashing::{HashBits, TupleHasher};
use crate::ingest::{encode_projection, Row, ViewQuery};
use crate::sketches::{AnySketch, DistinctSketch, Estimate, SketchParams, Technique};

const BATCH: usize = 4096;

/// Wall-clock time per processing phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    /// Reading and parsing rows.
    pub loading: Duration,
    /// Projecting and hashing tuples.
    pub hashing: Duration,
    /// Sketch updates and the final estimate.
    pub counting: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.loading + self.hashing + self.counting
    }

    pub fn add(&mut self, other: &PhaseTimings) {
        self.loading += other.loading;
        self.hashing += other.hashing;
        self.counting += other.counting;
    }
}

/// Sketches of one view fed in a single pass.
pub struct ViewEstimator {
    query: ViewQuery,
    hasher: TupleHasher,
    sketches: Vec<AnySketch>,
    needs_key: bool,
    timings: PhaseTimings,
    rows: u64,
    // batch buffers
    keys: Vec<u8>,
    key_ends: Vec<usize>,
    hashes: Vec<u64>,
}

impl ViewEstimator {
    pub fn new(query: ViewQuery, bits: HashBits, seed: u64) -> Self {
        Self::with_hasher(query, TupleHasher::new(bits, seed))
    }

    /// Uses an existing hasher, e.g. one whose tables were loaded from disk
    /// or warmed by another view.
    pub fn with_hasher(query: ViewQuery, hasher: TupleHasher) -> Self {
        ViewEstimator {
            query,
            hasher,
            sketches: Vec::new(),
            needs_key: false,
            timings: PhaseTimings::default(),
            rows: 0,
            keys: Vec::new(),
            key_ends: Vec::new(),
            hashes: Vec::new(),
        }
    }

    /// Adds a sketch of `technique` with budget `memory`; returns its index.
    pub fn add_sketch(&mut self, technique: Technique, memory: usize) -> Result<usize> {
        let params = SketchParams::new(memory, self.hasher.bits(), self.hasher.seed());
        self.sketches.push(AnySketch::new(technique, params)?);
        self.needs_key |= technique.needs_key();
        Ok(self.sketches.len() - 1)
    }

    pub fn query(&self) -> &ViewQuery {
        &self.query
    }

    pub fn hasher(&self) -> &TupleHasher {
        &self.hasher
    }

    pub fn into_hasher(self) -> TupleHasher {
        self.hasher
    }

    pub fn sketches(&self) -> &[AnySketch] {
        &self.sketches
    }

    pub fn into_sketches(self) -> Vec<AnySketch> {
        self.sketches
    }

    pub fn timings(&self) -> PhaseTimings {
        self.timings
    }

    /// Rows consumed so far.
    pub fn rows(&self) -> u64 {
        self.rows
    }

    /// Feeds a single row.
    pub fn push_row(&mut self, row: &[String]) -> Result<()> {
        self.keys.clear();
        if self.needs_key {
            encode_projection(row, &self.query, &mut self.keys)?;
        }
        let hash = self.hasher.hash_row(row, &self.query)?;
        for s in &mut self.sketches {
            s.insert(&self.keys, hash);
        }
        self.rows += 1;
        Ok(())
    }

    /// Consumes a whole stream in batches, timing each phase.
    pub fn consume<I>(&mut self, rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Result<Row>>,
    {
        let mut rows = rows.into_iter();
        let mut batch: Vec<Row> = Vec::with_capacity(BATCH);
        loop {
            let t0 = Instant::now();
            batch.clear();
            for row in rows.by_ref().take(BATCH) {
                batch.push(row?);
            }
            let t1 = Instant::now();
            self.timings.loading += t1 - t0;
            if batch.is_empty() {
                return Ok(());
            }

            self.keys.clear();
            self.key_ends.clear();
            self.hashes.clear();
            for row in &batch {
                if self.needs_key {
                    encode_projection(row, &self.query, &mut self.keys)?;
                    self.key_ends.push(self.keys.len());
                }
                self.hashes.push(self.hasher.hash_row(row, &self.query)?);
            }
            let t2 = Instant::now();
            self.timings.hashing += t2 - t1;

            for s in &mut self.sketches {
                let mut start = 0;
                for (i, &h) in self.hashes.iter().enumerate() {
                    let key = if self.needs_key {
                        let end = self.key_ends[i];
                        let k = &self.keys[start..end];
                        start = end;
                        k
                    } else {
                        &[][..]
                    };
                    s.insert(key, h);
                }
            }
            self.timings.counting += t2.elapsed();
            self.rows += batch.len() as u64;
        }
    }

    /// Current estimates, one per sketch in insertion order.
    pub fn estimates(&mut self) -> Vec<Estimate> {
        let t = Instant::now();
        let out = self.sketches.iter().map(|s| s.estimate()).collect();
        self.timings.counting += t.elapsed();
        out
    }
}

/// Estimates the size of `query` over `rows` with one sketch.
pub fn estimate_view_size<I>(
    rows: I,
    query: &ViewQuery,
    technique: Technique,
    memory: usize,
    bits: HashBits,
    seed: u64,
) -> Result<Estimate>
where
    I: IntoIterator<Item = Result<Row>>,
{
    let mut est = ViewEstimator::new(query.clone(), bits, seed);
    est.add_sketch(technique, memory)?;
    est.consume(rows)?;
    Ok(est.estimates()[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RowStream, SyntheticSpec};
    use crate::oracle::exact_view_size;

    #[test]
    fn batched_and_row_by_row_agree() {
        let table = SyntheticSpec::zipf(1.1, 5_000, 20_000, 3, 1).generate().unwrap();
        let q = ViewQuery::new(vec![2, 0], 3).unwrap();
        let build = || {
            let mut e = ViewEstimator::new(q.clone(), HashBits::L64, 9);
            for t in Technique::SKETCHES {
                e.add_sketch(t, 256).unwrap();
            }
            e
        };
        let mut batched = build();
        batched.consume(table.open_stream().unwrap()).unwrap();
        let mut single = build();
        for row in table.open_stream().unwrap() {
            single.push_row(&row.unwrap()).unwrap();
        }
        assert_eq!(batched.sketches(), single.sketches());
        assert_eq!(batched.rows(), 20_000);
    }

    #[test]
    fn exact_paths_match_oracle() {
        let table = SyntheticSpec::zipf(1.3, 800, 5_000, 2, 4).generate().unwrap();
        let q = ViewQuery::new(vec![0, 1], 2).unwrap();
        let truth = exact_view_size(table.open_stream().unwrap(), &q, false).unwrap();
        for t in [Technique::Gc, Technique::Gt] {
            let e = estimate_view_size(table.open_stream().unwrap(), &q, t, 1024, HashBits::L32, 3).unwrap();
            assert_eq!(e, Estimate::exact(truth.distinct), "{t}");
        }
    }

    #[test]
    fn empty_stream() {
        let q = ViewQuery::new(vec![0], 1).unwrap();
        for t in [Technique::Gc, Technique::Gt, Technique::Ac] {
            let e = estimate_view_size(RowStream::from_rows(vec![]), &q, t, 64, HashBits::L64, 0).unwrap();
            assert_eq!(e.value, 0.0);
        }
    }

    #[test]
    fn invalid_budget_is_rejected() {
        let q = ViewQuery::new(vec![0], 1).unwrap();
        assert!(estimate_view_size(RowStream::from_rows(vec![]), &q, Technique::Pc, 100, HashBits::L64, 0).is_err());
        assert!(estimate_view_size(RowStream::from_rows(vec![]), &q, Technique::Mf, 64, HashBits::L64, 0).is_err());
    }

    #[test]
    fn projection_errors_propagate() {
        let q = ViewQuery::new(vec![1], 2).unwrap();
        let rows = RowStream::from_rows(vec![vec!["only".into()]]);
        assert!(estimate_view_size(rows, &q, Technique::Gt, 8, HashBits::L64, 0).is_err());
    }

    #[test]
    fn timings_add_up() {
        let table = SyntheticSpec::uniform(10_000, 50_000, 2, 0).generate().unwrap();
        let q = ViewQuery::new(vec![0, 1], 2).unwrap();
        let start = Instant::now();
        let mut e = ViewEstimator::new(q, HashBits::L64, 1);
        e.add_sketch(Technique::Gt, 512).unwrap();
        e.consume(table.open_stream().unwrap()).unwrap();
        e.estimates();
        let wall = start.elapsed();
        let t = e.timings();
        assert!(t.total() <= wall);
        assert!(t.loading > Duration::ZERO && t.hashing > Duration::ZERO && t.counting > Duration::ZERO);
    }
}
