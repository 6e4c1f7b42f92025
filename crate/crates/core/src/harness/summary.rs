use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::RunRecord;
use crate::error::Result;

/// Relative root-mean-square deviation `sqrt(mean((x - c)^2)) / c`.
/// Absent when `c` is zero or there are no estimates.
pub fn standard_error(estimates: &[f64], c: f64) -> Option<f64> {
    if c == 0.0 || estimates.is_empty() {
        return None;
    }
    let mse = estimates.iter().map(|x| (x - c) * (x - c)).sum::<f64>() / estimates.len() as f64;
    Some(mse.sqrt() / c)
}

/// Accuracy of one (view, technique, budget) over its seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSummary {
    pub dataset: String,
    pub query: String,
    pub technique: String,
    pub memory: u64,
    pub sample_ratio: Option<f64>,
    pub bits: u32,
    pub exact_f0: u64,
    /// Successful runs aggregated.
    pub runs: usize,
    pub standard_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub mean_seconds: f64,
}

type GroupKey = (String, String, String, u64, u64, u32);

/// Groups successful records and computes their error statistics.
pub fn summarize(records: &[RunRecord]) -> Vec<ErrorSummary> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok() && r.estimate.is_some()) {
        let key = (
            r.dataset.clone(),
            r.query.clone(),
            r.technique.clone(),
            r.memory,
            r.sample_ratio.map_or(0, f64::to_bits),
            r.bits,
        );
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_values()
        .filter_map(|rs| {
            let first = rs[0];
            let c = first.exact_f0 as f64;
            let est: Vec<f64> = rs.iter().filter_map(|r| r.estimate).collect();
            let se = standard_error(&est, c)?;
            let errs = est.iter().map(|x| (x - c).abs() / c);
            Some(ErrorSummary {
                dataset: first.dataset.clone(),
                query: first.query.clone(),
                technique: first.technique.clone(),
                memory: first.memory,
                sample_ratio: first.sample_ratio,
                bits: first.bits,
                exact_f0: first.exact_f0,
                runs: rs.len(),
                standard_error: se,
                min_error: errs.clone().fold(f64::INFINITY, f64::min),
                max_error: errs.fold(0.0, f64::max),
                mean_seconds: rs.iter().map(|r| r.total_ms()).sum::<f64>() / rs.len() as f64 / 1e3,
            })
        })
        .collect()
}

/// Writes plot-ready tab-separated tables into `dir`, three per technique:
/// `error_vs_size_<t>.tsv`, `error_vs_memory_<t>.tsv` and
/// `time_vs_memory_<t>.tsv`. Returns the files written.
pub fn emit_plot_tables(records: &[RunRecord], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let summaries = summarize(records);
    let mut by_tech: BTreeMap<&str, Vec<&ErrorSummary>> = BTreeMap::new();
    for s in &summaries {
        by_tech.entry(s.technique.as_str()).or_default().push(s);
    }
    let mut written = Vec::new();
    if by_tech.is_empty() {
        return Ok(written);
    }
    std::fs::create_dir_all(dir)?;
    for (tech, mut rows) in by_tech {
        let budget = |s: &ErrorSummary| match s.sample_ratio {
            Some(p) => p.to_string(),
            None => s.memory.to_string(),
        };
        let budget_name = if rows.iter().any(|s| s.sample_ratio.is_some()) {
            "p"
        } else {
            "M"
        };

        rows.sort_by(|a, b| {
            (a.exact_f0, a.memory, a.bits, a.query.as_str())
                .cmp(&(b.exact_f0, b.memory, b.bits, b.query.as_str()))
                .then(a.sample_ratio.partial_cmp(&b.sample_ratio).unwrap())
        });
        let path = dir.join(format!("error_vs_size_{tech}.tsv"));
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "exact_f0\t{budget_name}\tL\tstandard_error")?;
        for s in &rows {
            writeln!(w, "{}\t{}\t{}\t{:.6}", s.exact_f0, budget(s), s.bits, s.standard_error)?;
        }
        w.flush()?;
        written.push(path);

        rows.sort_by(|a, b| {
            (a.dataset.as_str(), a.query.as_str(), a.bits, a.memory)
                .cmp(&(b.dataset.as_str(), b.query.as_str(), b.bits, b.memory))
                .then(a.sample_ratio.partial_cmp(&b.sample_ratio).unwrap())
        });
        let path = dir.join(format!("error_vs_memory_{tech}.tsv"));
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "query\texact_f0\tL\t{budget_name}\tstandard_error")?;
        for s in &rows {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{:.6}",
                s.query,
                s.exact_f0,
                s.bits,
                budget(s),
                s.standard_error
            )?;
        }
        w.flush()?;
        written.push(path);

        let path = dir.join(format!("time_vs_memory_{tech}.tsv"));
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "query\tL\t{budget_name}\tseconds")?;
        for s in &rows {
            writeln!(w, "{}\t{}\t{}\t{:.6}", s.query, s.bits, budget(s), s.mean_seconds)?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}
