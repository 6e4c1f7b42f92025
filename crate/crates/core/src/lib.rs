//! View-size estimation for OLAP group-by queries.
//!
//! The size of a view is the number of distinct tuples obtained by projecting
//! a fact table onto a subset of its dimensions. This crate estimates it in a
//! single pass with small memory, using five hashing-based sketches:
//!
//! * [`sketches::BitMatrixSketch`]: Flajolet–Martin probabilistic counting (`pc`).
//! * [`sketches::BucketMaxSketch`]: LogLog (`ll`) and Adaptive Counting (`ac`).
//! * [`sketches::KmvSketch`]: Generalized Counting, the M smallest hashes (`gc`).
//! * [`sketches::GtSketch`]: Gibbons–Tirthapura level sampling (`gt`).
//!
//! Tuples are hashed with per-dimension random look-up tables combined by
//! exclusive-or ([`hashing::TupleHasher`]). A sample-based multifractal
//! estimator ([`multifractal`]), an exact brute-force oracle ([`oracle`]),
//! closed-form accuracy bounds ([`bounds`]) and an experiment driver
//! ([`harness`]) complete the toolkit.
//!
//! ```
//! use viewsize::ingest::{SyntheticSpec, ViewQuery};
//! use viewsize::estimate::estimate_view_size;
//! use viewsize::hashing::HashBits;
//! use viewsize::Technique;
//!
//! let table = SyntheticSpec::uniform(5_000, 20_000, 2, 1).generate().unwrap();
//! let query = ViewQuery::new(vec![0, 1], table.arity()).unwrap();
//! let est = estimate_view_size(table.open_stream().unwrap(), &query, Technique::Gt, 8192, HashBits::L64, 7).unwrap();
//! assert_eq!(est.value, 5_000.0);
//! assert!(est.exact);
//! ```

pub mod bounds;
mod error;
pub mod estimate;
pub mod harness;
pub mod hashing;
pub mod ingest;
pub mod multifractal;
pub mod oracle;
pub mod sketches;

pub use crate::error::{Error, Result};
pub use crate::sketches::{Estimate, Technique};
