//! Fact tables, row streams, projections, sampling and synthetic data.
//!
//! Rows are read one line at a time from delimited text files (or produced by
//! a synthetic generator) and every field is kept as an opaque string. A
//! [`ViewQuery`] selects the dimensions of a group-by and [`project`] extracts
//! them from a row.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One fact: a row of attribute values, one per dimension.
pub type Row = Vec<String>;

/// Ordered subset of dimension indices defining a group-by view.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ViewQuery {
    dims: Vec<usize>,
}

impl ViewQuery {
    /// Builds a query over a table with `arity` dimensions.
    pub fn new(dims: Vec<usize>, arity: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("a view query needs at least one dimension"));
        }
        let mut seen = HashSet::with_capacity(dims.len());
        for &d in &dims {
            if d >= arity {
                return Err(Error::DimensionOutOfRange { index: d, arity });
            }
            if !seen.insert(d) {
                return Err(Error::invalid(format!("dimension {d} repeated in query")));
            }
        }
        Ok(ViewQuery { dims })
    }

    /// Parses a comma separated list such as `0,2,5`.
    pub fn parse(list: &str, arity: usize) -> Result<Self> {
        let dims = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad dimension index `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        ViewQuery::new(dims, arity)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
}

impl fmt::Display for ViewQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Projects `row` onto the dimensions of `query`, in query order.
pub fn project<'a>(row: &'a [String], query: &ViewQuery) -> Result<Vec<&'a str>> {
    query
        .dims
        .iter()
        .map(|&d| {
            row.get(d).map(String::as_str).ok_or(Error::DimensionOutOfRange {
                index: d,
                arity: row.len(),
            })
        })
        .collect()
}

/// Appends the canonical encoding of the projection of `row` to `buf`.
///
/// Each field is written as a little-endian `u32` length followed by its
/// bytes, so `("a", "b,c")` and `("a,b", "c")` never collide.
pub fn encode_projection(row: &[String], query: &ViewQuery, buf: &mut Vec<u8>) -> Result<()> {
    for &d in &query.dims {
        let field = row.get(d).ok_or(Error::DimensionOutOfRange {
            index: d,
            arity: row.len(),
        })?;
        push_field(buf, field);
    }
    Ok(())
}

/// Canonical encoding of an already projected tuple.
pub fn encode_tuple<S: AsRef<str>>(fields: &[S]) -> Vec<u8> {
    let mut buf = Vec::new();
    for f in fields {
        push_field(&mut buf, f.as_ref());
    }
    buf
}

fn push_field(buf: &mut Vec<u8>, field: &str) {
    buf.extend_from_slice(&(field.len() as u32).to_le_bytes());
    buf.extend_from_slice(field.as_bytes());
}

/// Options for reading a delimited file.
#[derive(Debug, Clone)]
pub struct FileOptions {
    pub delimiter: char,
    pub has_header: bool,
    /// Abort on malformed rows instead of skipping them.
    pub strict: bool,
}

impl Default for FileOptions {
    fn default() -> Self {
        FileOptions {
            delimiter: ',',
            has_header: false,
            strict: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TableSource {
    File { path: PathBuf, options: FileOptions },
    Synthetic(SyntheticSpec),
}

/// A fact table: a re-openable source of rows with fixed arity.
#[derive(Debug, Clone)]
pub struct FactTable {
    source: TableSource,
    dimension_names: Vec<String>,
    rows: Option<u64>,
}

impl FactTable {
    /// Opens a delimited file. The dimension names come from the header line
    /// when there is one, otherwise they are `d0, d1, ...` sized from the
    /// first data line.
    pub fn from_file(path: impl AsRef<Path>, options: FileOptions) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|source| Error::Open {
            path: path.clone(),
            source,
        })?;
        let mut first = String::new();
        BufReader::new(file).read_line(&mut first)?;
        let first = trim_eol(&first);
        let fields: Vec<String> = if first.is_empty() {
            Vec::new()
        } else {
            first.split(options.delimiter).map(str::to_owned).collect()
        };
        let dimension_names = if options.has_header {
            let mut seen = HashSet::new();
            for name in &fields {
                if !seen.insert(name.as_str()) {
                    return Err(Error::DuplicateDimension(name.clone()));
                }
            }
            fields
        } else {
            (0..fields.len()).map(|i| format!("d{i}")).collect()
        };
        Ok(FactTable {
            source: TableSource::File { path, options },
            dimension_names,
            rows: None,
        })
    }

    pub fn from_spec(spec: SyntheticSpec) -> Result<Self> {
        spec.validate()?;
        Ok(FactTable {
            dimension_names: (0..spec.dims).map(|i| format!("d{i}")).collect(),
            rows: Some(spec.rows),
            source: TableSource::Synthetic(spec),
        })
    }

    pub fn source(&self) -> &TableSource {
        &self.source
    }

    pub fn dimension_names(&self) -> &[String] {
        &self.dimension_names
    }

    pub fn arity(&self) -> usize {
        self.dimension_names.len()
    }

    /// Number of facts, when known without a scan.
    pub fn rows(&self) -> Option<u64> {
        self.rows
    }

    /// A short identifier for logs: the file path or the synthetic spec.
    pub fn id(&self) -> String {
        match &self.source {
            TableSource::File { path, .. } => path.display().to_string(),
            TableSource::Synthetic(spec) => spec.to_string(),
        }
    }

    /// Starts a fresh single pass over the rows.
    pub fn open_stream(&self) -> Result<RowStream> {
        match &self.source {
            TableSource::File { path, options } => {
                let file = File::open(path).map_err(|source| Error::Open {
                    path: path.clone(),
                    source,
                })?;
                let mut reader = BufReader::with_capacity(1 << 16, file);
                let mut line_no = 0;
                if options.has_header {
                    let mut header = String::new();
                    reader.read_line(&mut header)?;
                    line_no = 1;
                }
                Ok(RowStream::File(FileRows {
                    reader,
                    options: options.clone(),
                    arity: self.arity(),
                    line: String::new(),
                    line_no,
                    skipped: 0,
                }))
            }
            TableSource::Synthetic(spec) => Ok(RowStream::Synthetic(Box::new(SyntheticRows::new(spec)))),
        }
    }
}

fn trim_eol(s: &str) -> &str {
    s.trim_end_matches(['\n', '\r'])
}

/// Single-pass iterator over the rows of a [`FactTable`].
pub enum RowStream {
    File(FileRows),
    Synthetic(Box<SyntheticRows>),
    Memory(std::vec::IntoIter<Row>),
}

impl RowStream {
    /// Wraps rows already held in memory.
    pub fn from_rows(rows: Vec<Row>) -> Self {
        RowStream::Memory(rows.into_iter())
    }

    /// Malformed rows skipped so far (non-strict file reading only).
    pub fn skipped_rows(&self) -> u64 {
        match self {
            RowStream::File(f) => f.skipped,
            _ => 0,
        }
    }
}

impl Iterator for RowStream {
    type Item = Result<Row>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            RowStream::File(f) => f.next(),
            RowStream::Synthetic(s) => s.next().map(Ok),
            RowStream::Memory(m) => m.next().map(Ok),
        }
    }
}

pub struct FileRows {
    reader: BufReader<File>,
    options: FileOptions,
    arity: usize,
    line: String,
    line_no: u64,
    skipped: u64,
}

impl Iterator for FileRows {
    type Item = Result<Row>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line.clear();
            match self.reader.read_line(&mut self.line) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let line = trim_eol(&self.line);
            if line.is_empty() {
                continue;
            }
            let row: Row = line.split(self.options.delimiter).map(str::to_owned).collect();
            if row.len() == self.arity {
                return Some(Ok(row));
            }
            let err = Error::FieldCount {
                line: self.line_no,
                expected: self.arity,
                found: row.len(),
            };
            if self.options.strict {
                return Some(Err(err));
            }
            log::warn!("skipping row: {err}");
            self.skipped += 1;
        }
    }
}

/// Keeps each row independently with probability `ratio`.
pub struct BernoulliSample<I> {
    inner: I,
    ratio: f64,
    rng: ChaCha8Rng,
    seen: u64,
    kept: u64,
}

/// Bernoulli sampling adapter; deterministic for a given seed.
pub fn bernoulli_sample<I>(rows: I, ratio: f64, seed: u64) -> Result<BernoulliSample<I>>
where
    I: Iterator<Item = Result<Row>>,
{
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("sampling ratio {ratio} not in (0, 1)")));
    }
    Ok(BernoulliSample {
        inner: rows,
        ratio,
        rng: ChaCha8Rng::seed_from_u64(seed),
        seen: 0,
        kept: 0,
    })
}

impl<I> BernoulliSample<I> {
    /// Rows drawn from the source so far (N once the pass is complete).
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Rows kept so far (N′).
    pub fn kept(&self) -> u64 {
        self.kept
    }
}

impl<I> Iterator for BernoulliSample<I>
where
    I: Iterator<Item = Result<Row>>,
{
    type Item = Result<Row>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let row = match self.inner.next()? {
                Ok(row) => row,
                Err(e) => return Some(Err(e)),
            };
            self.seen += 1;
            if self.rng.gen_bool(self.ratio) {
                self.kept += 1;
                return Some(Ok(row));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    /// Round-robin over the distinct keys: every key appears N/F0 times.
    Uniform,
    /// Key of rank r drawn with probability proportional to 1/r^s.
    Zipf { exponent: f64 },
}

/// Parameters of a synthetic fact table.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub distribution: Distribution,
    /// Intended number of distinct tuples over all dimensions.
    pub distinct: u64,
    pub rows: u64,
    pub dims: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn uniform(distinct: u64, rows: u64, dims: usize, seed: u64) -> Self {
        SyntheticSpec {
            distribution: Distribution::Uniform,
            distinct,
            rows,
            dims,
            seed,
        }
    }

    pub fn zipf(exponent: f64, distinct: u64, rows: u64, dims: usize, seed: u64) -> Self {
        SyntheticSpec {
            distribution: Distribution::Zipf { exponent },
            distinct,
            rows,
            dims,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.distinct > self.rows {
            return Err(Error::invalid(format!(
                "distinct target {} exceeds row count {}",
                self.distinct, self.rows
            )));
        }
        if self.distinct == 0 && self.rows > 0 {
            return Err(Error::invalid("a non-empty table needs at least one distinct key"));
        }
        if self.dims == 0 {
            return Err(Error::invalid("a synthetic table needs at least one dimension"));
        }
        if let Distribution::Zipf { exponent } = self.distribution {
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(Error::invalid(format!("zipf exponent {exponent} must be positive")));
            }
        }
        Ok(())
    }

    /// Shorthand for [`FactTable::from_spec`].
    pub fn generate(self) -> Result<FactTable> {
        FactTable::from_spec(self)
    }

    /// Writes the table as delimited text, without a header.
    pub fn write_to(&self, path: impl AsRef<Path>, delimiter: char) -> Result<u64> {
        self.validate()?;
        let mut out = BufWriter::new(File::create(path)?);
        let mut n = 0;
        let mut sep = [0u8; 4];
        let sep = delimiter.encode_utf8(&mut sep).as_bytes();
        for row in SyntheticRows::new(self) {
            for (i, field) in row.iter().enumerate() {
                if i > 0 {
                    out.write_all(sep)?;
                }
                out.write_all(field.as_bytes())?;
            }
            out.write_all(b"\n")?;
            n += 1;
        }
        out.flush()?;
        Ok(n)
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.distribution {
            Distribution::Uniform => f.write_str("uniform:")?,
            Distribution::Zipf { exponent } => write!(f, "zipf:s={exponent},")?,
        }
        write!(
            f,
            "f0={},n={},dims={},seed={}",
            self.distinct, self.rows, self.dims, self.seed
        )
    }
}

impl FromStr for SyntheticSpec {
    type Err = Error;

    /// Parses `uniform:f0=1000,n=10000,dims=2,seed=7` or
    /// `zipf:s=1.2,f0=...,n=...`. `dims` defaults to 1 and `seed` to 0.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("synthetic spec `{s}` lacks a `kind:` prefix")))?;
        let mut exponent = None;
        let (mut distinct, mut rows, mut dims, mut seed) = (None, None, 1usize, 0u64);
        for pair in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("bad synthetic spec entry `{pair}`")))?;
            let bad = || Error::invalid(format!("bad value for `{k}`: `{v}`"));
            match k.trim() {
                "s" => exponent = Some(v.parse::<f64>().map_err(|_| bad())?),
                "f0" => distinct = Some(parse_count(v).ok_or_else(bad)?),
                "n" => rows = Some(parse_count(v).ok_or_else(bad)?),
                "dims" => dims = v.parse().map_err(|_| bad())?,
                "seed" => seed = v.parse().map_err(|_| bad())?,
                other => return Err(Error::invalid(format!("unknown synthetic spec key `{other}`"))),
            }
        }
        let distinct = distinct.ok_or_else(|| Error::invalid("synthetic spec needs f0="))?;
        let rows = rows.unwrap_or(distinct);
        let distribution = match kind {
            "uniform" => Distribution::Uniform,
            "zipf" => Distribution::Zipf {
                exponent: exponent.unwrap_or(1.0),
            },
            other => return Err(Error::invalid(format!("unknown distribution `{other}`"))),
        };
        let spec = SyntheticSpec {
            distribution,
            distinct,
            rows,
            dims,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

// Accepts plain integers and scientific shorthand such as `1e6`.
fn parse_count(v: &str) -> Option<u64> {
    v.parse::<u64>().ok().or_else(|| {
        let x = v.parse::<f64>().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < 1.8e19).then_some(x as u64)
    })
}

/// Streaming generator behind synthetic tables.
///
/// Keys in `0..distinct` are spread over the dimensions in mixed radix with
/// base `ceil(distinct^(1/dims))`, so distinct keys give distinct tuples.
pub struct SyntheticRows {
    distribution: Distribution,
    distinct: u64,
    rows: u64,
    next: u64,
    dims: usize,
    base: u64,
    rng: ChaCha8Rng,
    cdf: Vec<f64>,
}

impl SyntheticRows {
    fn new(spec: &SyntheticSpec) -> Self {
        let cdf = match spec.distribution {
            Distribution::Uniform => Vec::new(),
            Distribution::Zipf { exponent } => {
                let mut acc = 0.0;
                (1..=spec.distinct)
                    .map(|r| {
                        acc += (r as f64).powf(-exponent);
                        acc
                    })
                    .collect()
            }
        };
        SyntheticRows {
            distribution: spec.distribution,
            distinct: spec.distinct,
            rows: spec.rows,
            next: 0,
            dims: spec.dims,
            base: radix_base(spec.distinct, spec.dims),
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            cdf,
        }
    }

    fn key_to_row(&self, mut key: u64) -> Row {
        let mut row = Vec::with_capacity(self.dims);
        for _ in 0..self.dims {
            row.push((key % self.base).to_string());
            key /= self.base;
        }
        row
    }
}

fn radix_base(distinct: u64, dims: usize) -> u64 {
    let mut base = (distinct.max(1) as f64).powf(1.0 / dims as f64).floor().max(1.0) as u64;
    while (base as u128)
        .checked_pow(dims as u32)
        .is_some_and(|v| v < distinct as u128)
    {
        base += 1;
    }
    base.max(1)
}

impl Iterator for SyntheticRows {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        if self.next >= self.rows {
            return None;
        }
        let key = match self.distribution {
            Distribution::Uniform => self.next % self.distinct,
            Distribution::Zipf { .. } => {
                let total = *self.cdf.last().expect("non-empty zipf table");
                let u = self.rng.gen::<f64>() * total;
                (self.cdf.partition_point(|&c| c <= u) as u64).min(self.distinct - 1)
            }
        };
        self.next += 1;
        Some(self.key_to_row(key))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.rows - self.next) as usize;
        (left, Some(left))
    }
}
