//! Experiment driver: runs every (view, technique, budget, seed)
//! combination over a fact table, logs the results and reduces them to
//! standard errors and plot tables.

mod runlog;
mod summary;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{PhaseTimings, ViewEstimator};
use crate::hashing::HashBits;
use crate::ingest::{FactTable, ViewQuery};
use crate::multifractal::{multifractal_estimate, summarize_sample};
use crate::oracle::{exact_view_size, OracleCache};
use crate::sketches::{Estimate, Technique};

pub use self::runlog::{append_records, read_records, RunRecord, LOG_MAGIC};
pub use self::summary::{emit_plot_tables, standard_error, summarize, ErrorSummary};

/// Budgets of the small-memory sweep.
pub const SMALL_BUDGETS: [usize; 4] = [16, 64, 256, 2048];
/// Sampling ratios of the multifractal sweep.
pub const SAMPLE_RATIOS: [f64; 4] = [0.001, 0.003, 0.005, 0.007];
/// Seeds per combination unless configured otherwise.
pub const DEFAULT_SEED_COUNT: usize = 20;

/// `count` seeds derived deterministically from `master`.
pub fn default_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count).map(|_| rng.gen()).collect()
}

/// Budgets `2^lo ..= 2^hi`.
pub fn power_of_two_budgets(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

/// What to run.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub table: FactTable,
    pub queries: Vec<ViewQuery>,
    pub techniques: Vec<Technique>,
    /// Budgets for the sketches.
    pub memories: Vec<usize>,
    /// Ratios for the multifractal technique.
    pub sample_ratios: Vec<f64>,
    pub bits: HashBits,
    pub seeds: Vec<u64>,
    /// Budgets above this are recorded as failed runs.
    pub memory_ceiling: Option<usize>,
    /// Run combinations on the rayon pool.
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(table: FactTable, queries: Vec<ViewQuery>) -> Self {
        SweepConfig {
            table,
            queries,
            techniques: Technique::SKETCHES.to_vec(),
            memories: SMALL_BUDGETS.to_vec(),
            sample_ratios: SAMPLE_RATIOS.to_vec(),
            bits: HashBits::L64,
            seeds: default_seeds(0, DEFAULT_SEED_COUNT),
            memory_ceiling: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Budget {
    Memory(usize),
    Ratio(f64),
    Unbounded,
}

struct Job {
    query: usize,
    technique: Technique,
    budget: Budget,
    seed: u64,
}

/// Runs one estimation and reports its phase timings.
pub fn time_phases(
    table: &FactTable,
    query: &ViewQuery,
    technique: Technique,
    memory: usize,
    bits: HashBits,
    seed: u64,
) -> Result<(Estimate, PhaseTimings)> {
    let mut est = ViewEstimator::new(query.clone(), bits, seed);
    est.add_sketch(technique, memory)?;
    est.consume(table.open_stream()?)?;
    let e = est.estimates()[0];
    Ok((e, est.timings()))
}

fn run_job(config: &SweepConfig, job: &Job) -> Result<(Estimate, PhaseTimings)> {
    let query = &config.queries[job.query];
    match (job.technique, job.budget) {
        (Technique::Mf, Budget::Ratio(p)) => {
            let t0 = Instant::now();
            let summary = summarize_sample(config.table.open_stream()?, query, p, job.seed)?;
            let t1 = Instant::now();
            let (e, _) = multifractal_estimate(&summary)?;
            Ok((
                e,
                PhaseTimings {
                    loading: t1 - t0,
                    counting: t1.elapsed(),
                    ..Default::default()
                },
            ))
        }
        (Technique::Exact, _) => {
            let t0 = Instant::now();
            let r = exact_view_size(config.table.open_stream()?, query, false)?;
            Ok((
                Estimate::exact(r.distinct),
                PhaseTimings {
                    counting: t0.elapsed(),
                    ..Default::default()
                },
            ))
        }
        (t, Budget::Memory(m)) => {
            if let Some(ceiling) = config.memory_ceiling {
                if m > ceiling {
                    return Err(Error::invalid(format!("budget {m} above the ceiling {ceiling}")));
                }
            }
            time_phases(&config.table, query, t, m, config.bits, job.seed)
        }
        (t, b) => Err(Error::invalid(format!("{t} cannot run with budget {b:?}"))),
    }
}

/// Runs every combination of the sweep. Exact counts come from `oracle`
/// (computed on a miss). A failed run yields a record with its error set.
pub fn run_protocol(config: &SweepConfig, oracle: &mut OracleCache) -> Vec<RunRecord> {
    let dataset = config.table.id();
    let truths: Vec<std::result::Result<u64, String>> = config
        .queries
        .iter()
        .map(|q| {
            oracle
                .get_or_compute(&OracleCache::signature(&dataset, q), || {
                    Ok(exact_view_size(config.table.open_stream()?, q, false)?.distinct)
                })
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut jobs = Vec::new();
    for query in 0..config.queries.len() {
        for &technique in &config.techniques {
            let budgets: Vec<Budget> = match technique {
                Technique::Mf => config.sample_ratios.iter().map(|&p| Budget::Ratio(p)).collect(),
                Technique::Exact => vec![Budget::Unbounded],
                _ => config.memories.iter().map(|&m| Budget::Memory(m)).collect(),
            };
            for budget in budgets {
                let seeds: &[u64] = if technique == Technique::Exact {
                    &[0]
                } else {
                    &config.seeds
                };
                for &seed in seeds {
                    jobs.push(Job {
                        query,
                        technique,
                        budget,
                        seed,
                    });
                }
            }
        }
    }

    let run = |job: &Job| {
        let truth = &truths[job.query];
        let outcome = match truth {
            Ok(_) => run_job(config, job).map_err(|e| e.to_string()),
            Err(e) => Err(format!("exact count failed: {e}")),
        };
        let exact_f0 = *truth.as_ref().unwrap_or(&0);
        let (memory, sample_ratio) = match job.budget {
            Budget::Memory(m) => (m as u64, None),
            Budget::Ratio(p) => (0, Some(p)),
            Budget::Unbounded => (0, None),
        };
        let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
        let (estimate, timings, error) = match outcome {
            Ok((e, t)) => (Some(e.value), t, None),
            Err(msg) => {
                log::warn!("run failed: {msg}");
                (None, PhaseTimings::default(), Some(msg))
            }
        };
        RunRecord {
            dataset: dataset.clone(),
            query: config.queries[job.query].to_string(),
            technique: job.technique.to_string(),
            memory,
            bits: config.bits.width(),
            seed: job.seed,
            sample_ratio,
            estimate,
            exact_f0,
            relative_error: estimate.and_then(|e| RunRecord::relative_error_of(e, exact_f0)),
            loading_ms: ms(timings.loading),
            hashing_ms: ms(timings.hashing),
            counting_ms: ms(timings.counting),
            error,
        }
    };
    if config.parallel {
        jobs.par_iter().map(run).collect()
    } else {
        jobs.iter().map(run).collect()
    }
}
