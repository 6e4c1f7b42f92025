//! Run the experiment protocol (views x techniques x budgets x seeds),
//! append the results log, and write plot-ready tables.
//!
//! ```text
//! cargo run --release --example test_protocol [out-dir]
//! ```

use viewsize::harness::{
    append_records, default_seeds, emit_plot_tables, read_records, run_protocol, summarize, SweepConfig,
};
use viewsize::ingest::{SyntheticSpec, ViewQuery};
use viewsize::oracle::OracleCache;
use viewsize::Technique;

fn main() -> viewsize::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("viewsize-protocol"));
    std::fs::create_dir_all(&out)?;

    let table = SyntheticSpec::zipf(0.7, 50_000, 300_000, 3, 8).generate()?;
    let queries = vec![ViewQuery::new(vec![0], 3)?, ViewQuery::new(vec![0, 1, 2], 3)?];
    let mut config = SweepConfig::new(table, queries);
    config.techniques = vec![Technique::Pc, Technique::Ac, Technique::Gt, Technique::Mf];
    config.sample_ratios = vec![0.005];
    config.seeds = default_seeds(1, 10);

    // exact counts are cached across invocations
    let mut oracle = OracleCache::open(out.join("oracle.tsv"))?;
    let records = run_protocol(&config, &mut oracle);
    oracle.save()?;
    append_records(out.join("runs.tsv"), &records)?;
    let all = read_records(out.join("runs.tsv"))?;
    println!("{} runs this time, {} in the log", records.len(), all.len());

    println!("{:<8}{:<6}{:>8}{:>10}{:>12}", "view", "tech", "M", "exact", "std error");
    for s in summarize(&records) {
        let budget = s.sample_ratio.map_or(s.memory.to_string(), |p| format!("p={p}"));
        println!(
            "{:<8}{:<6}{:>8}{:>10}{:>11.2}%",
            s.query,
            s.technique,
            budget,
            s.exact_f0,
            100.0 * s.standard_error
        );
    }
    for f in emit_plot_tables(&all, out.join("tables"))? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
