use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First line of every results log; bump the version when columns change.
pub const LOG_MAGIC: &str = "#viewsize-runlog v1";

/// One estimation run, as logged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    /// Projected dimensions, comma separated.
    pub query: String,
    pub technique: String,
    /// Memory budget M (0 for the multifractal and exact techniques).
    pub memory: u64,
    /// Hash width L.
    pub bits: u32,
    pub seed: u64,
    /// Sampling ratio of a multifractal run.
    pub sample_ratio: Option<f64>,
    pub estimate: Option<f64>,
    pub exact_f0: u64,
    pub relative_error: Option<f64>,
    pub loading_ms: f64,
    pub hashing_ms: f64,
    pub counting_ms: f64,
    /// Failure message; the estimate is absent when set.
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn total_ms(&self) -> f64 {
        self.loading_ms + self.hashing_ms + self.counting_ms
    }

    /// `|estimate - f0| / f0`, absent when `f0 = 0`.
    pub fn relative_error_of(estimate: f64, f0: u64) -> Option<f64> {
        (f0 > 0).then(|| (estimate - f0 as f64).abs() / f0 as f64)
    }
}

/// Appends records to a tab-separated results log, creating it with its
/// header when needed.
pub fn append_records(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let path = path.as_ref();
    let fresh = match std::fs::metadata(path) {
        Ok(m) => m.len() == 0,
        Err(_) => true,
    };
    if !fresh {
        let mut first = String::new();
        BufReader::new(File::open(path)?).read_line(&mut first)?;
        if first.trim_end() != LOG_MAGIC {
            return Err(Error::format(
                "results log",
                format!("{} lacks the `{LOG_MAGIC}` line", path.display()),
            ));
        }
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(file, "{LOG_MAGIC}")?;
    }
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .has_headers(fresh)
        .from_writer(file);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a results log back.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != LOG_MAGIC {
        return Err(Error::format(
            "results log",
            format!("{} lacks the `{LOG_MAGIC}` line", path.display()),
        ));
    }
    let mut r = csv::ReaderBuilder::new().delimiter(b'\t').from_reader(reader);
    r.deserialize().map(|rec| rec.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::format("results log", e.to_string())
}
