//! Sample-based view-size estimation under a multifractal (binomial
//! cascade) model.
//!
//! The tuples of a view are assumed to be the leaves of a depth-`k` binary
//! cascade in which each split sends a fraction `p` of the mass left and
//! `1 - p` right. The depth and bias are fit to a Bernoulli sample, then the
//! expected number of occupied leaves is extrapolated to the full table.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::ingest::{bernoulli_sample, Row, ViewQuery};
use crate::oracle::exact_view_size;
use crate::sketches::Estimate;

/// Deepest cascade the fit will try.
pub const MAX_DEPTH: u32 = 64;

/// Statistics of a sample needed to fit the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSummary {
    /// Distinct tuples in the sample.
    pub distinct: u64,
    /// Rows in the sample (N′).
    pub sample_size: u64,
    /// Rows in the whole table (N).
    pub total: u64,
    /// Occurrences of the most frequent sampled tuple.
    pub max_multiplicity: u64,
}

impl SampleSummary {
    pub fn new(distinct: u64, sample_size: u64, total: u64, max_multiplicity: u64) -> Result<Self> {
        if sample_size == 0 || distinct == 0 {
            return Err(Error::EmptySample);
        }
        if max_multiplicity < 1 || max_multiplicity > sample_size {
            return Err(Error::invalid(format!(
                "max multiplicity {max_multiplicity} outside [1, {sample_size}]"
            )));
        }
        if distinct > sample_size || sample_size > total {
            return Err(Error::invalid(format!(
                "need distinct {distinct} <= sample {sample_size} <= total {total}"
            )));
        }
        if distinct > 1 && max_multiplicity == sample_size {
            return Err(Error::invalid("one tuple holds the whole sample but distinct > 1"));
        }
        Ok(SampleSummary {
            distinct,
            sample_size,
            total,
            max_multiplicity,
        })
    }
}

/// Fitted cascade parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultifractalModel {
    pub depth: u32,
    /// Bias rescaled to the full table.
    pub bias: f64,
}

/// Draws a Bernoulli sample of `rows` at `ratio` and summarizes its
/// projection onto `query`. The whole stream is read so that N is known.
pub fn summarize_sample<I>(rows: I, query: &ViewQuery, ratio: f64, seed: u64) -> Result<SampleSummary>
where
    I: IntoIterator<Item = Result<Row>>,
{
    let mut sample = bernoulli_sample(rows.into_iter(), ratio, seed)?;
    let exact = exact_view_size(sample.by_ref(), query, true)?;
    if exact.rows == 0 {
        return Err(Error::EmptySample);
    }
    SampleSummary::new(exact.distinct, exact.rows, sample.seen(), exact.max_multiplicity())
}

fn binomial(k: u32, a: u32) -> f64 {
    if k <= 20 {
        let a = a.min(k - a) as u64;
        let mut c = 1u64;
        for i in 0..a {
            c = c * (k as u64 - i) / (i + 1);
        }
        c as f64
    } else {
        ln_binomial(k as u64, a as u64).exp()
    }
}

/// Expected number of occupied leaves after `n` draws from a depth-`k`
/// cascade of bias `p`.
pub fn expected_distinct(k: u32, p: f64, n: f64) -> Result<f64> {
    let p_ok = p > 0.0 && p < 1.0;
    let n_ok = n >= 0.0;
    if k == 0 || !p_ok || !n_ok {
        return Err(Error::invalid(format!("expected_distinct(k={k}, p={p}, n={n})")));
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut sum = 0.0;
    for a in 0..=k {
        let ln_leaf = (k - a) as f64 * ln_p + a as f64 * ln_q;
        sum += binomial(k, a) * -(n * ln_leaf).exp_m1();
    }
    Ok(sum)
}

/// Fits the cascade to `summary` and extrapolates the view size to the
/// full table.
pub fn multifractal_estimate(summary: &SampleSummary) -> Result<(Estimate, MultifractalModel)> {
    let SampleSummary {
        distinct,
        sample_size,
        total,
        max_multiplicity,
    } = *summary;
    if distinct == 1 {
        return Ok((Estimate::approximate(1.0), MultifractalModel { depth: 1, bias: 1.0 }));
    }
    let f0 = distinct as f64;
    let n_sample = sample_size as f64;
    let ratio = max_multiplicity as f64 / n_sample;

    let mut k = (f0.log2().ceil() as u32).max(1);
    loop {
        if k > MAX_DEPTH {
            return Err(Error::IterationCap(MAX_DEPTH));
        }
        let p = ratio.powf(1.0 / k as f64);
        let f = expected_distinct(k, p, n_sample)?;
        if f >= f0 {
            break;
        }
        k += 1;
    }

    let p = (max_multiplicity as f64 / total as f64).powf(1.0 / k as f64);
    let value = expected_distinct(k, p, total as f64)?;
    Ok((Estimate::approximate(value), MultifractalModel { depth: k, bias: p }))
}

/// Samples `rows` at `ratio` and estimates the size of `query`.
pub fn multifractal_view_size<I>(rows: I, query: &ViewQuery, ratio: f64, seed: u64) -> Result<Estimate>
where
    I: IntoIterator<Item = Result<Row>>,
{
    let summary = summarize_sample(rows, query, ratio, seed)?;
    multifractal_estimate(&summary).map(|(e, _)| e)
}
