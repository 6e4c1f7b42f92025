use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use viewsize::bounds::{default_memory_grid, emit_bound_curves};
use viewsize::estimate::ViewEstimator;
use viewsize::harness::{
    append_records, default_seeds, emit_plot_tables, run_protocol, summarize, SweepConfig, DEFAULT_SEED_COUNT,
    SAMPLE_RATIOS, SMALL_BUDGETS,
};
use viewsize::hashing::HashBits;
use viewsize::ingest::{FactTable, FileOptions, SyntheticSpec, ViewQuery};
use viewsize::multifractal::multifractal_view_size;
use viewsize::oracle::{exact_view_size, OracleCache};
use viewsize::Technique;

/// Estimate the number of distinct tuples in group-by views of a fact table.
#[derive(Parser)]
#[command(name = "viewsize", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate view sizes in one pass.
    Estimate(EstimateArgs),
    /// Run the test protocol over views, techniques, budgets and seeds.
    Sweep(SweepArgs),
    /// Write the theoretical error-bound curves.
    Bounds(BoundsArgs),
    /// Write a synthetic fact table.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Delimited fact-table file.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    data: Option<PathBuf>,
    /// Synthetic table, e.g. `uniform:f0=1e5,n=1e6,dims=3,seed=1` or `zipf:s=1.2,f0=1e5,n=1e6,dims=2`.
    #[arg(long)]
    synthetic: Option<SyntheticSpec>,
    /// Field delimiter of --data.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The first line of --data holds dimension names.
    #[arg(long)]
    header: bool,
    /// Fail on malformed rows instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Projected dimensions, comma separated; repeat for several views.
    /// Defaults to all dimensions.
    #[arg(long = "dims", value_name = "I,J,K")]
    dims: Vec<String>,
}

impl DataArgs {
    fn table(&self) -> Result<FactTable> {
        if let Some(path) = &self.data {
            let opts = FileOptions {
                delimiter: self.delimiter,
                has_header: self.header,
                strict: self.strict,
            };
            return FactTable::from_file(path, opts).with_context(|| format!("reading {}", path.display()));
        }
        let spec = self.synthetic.clone().expect("clap enforces a data source");
        Ok(FactTable::from_spec(spec)?)
    }

    fn queries(&self, table: &FactTable) -> Result<Vec<ViewQuery>> {
        if table.arity() == 0 {
            bail!("the fact table has no dimensions");
        }
        if self.dims.is_empty() {
            return Ok(vec![ViewQuery::new((0..table.arity()).collect(), table.arity())?]);
        }
        self.dims
            .iter()
            .map(|d| ViewQuery::parse(d, table.arity()).map_err(Into::into))
            .collect()
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// pc, ll, ac, gc, gt, mf or exact; repeatable.
    #[arg(long, default_value = "gt")]
    technique: Vec<Technique>,
    /// Memory budget M.
    #[arg(long, default_value_t = 2048)]
    memory: usize,
    /// Hash width L.
    #[arg(long, default_value_t = 64, value_parser = parse_bits)]
    bits: u32,
    /// Hashing and sampling seed.
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    /// Sampling ratio for mf.
    #[arg(long, default_value_t = 0.005)]
    sample_ratio: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Techniques to run; repeatable. Defaults to all five sketches.
    #[arg(long)]
    technique: Vec<Technique>,
    /// Memory budgets; repeatable. Defaults to 16, 64, 256 and 2048.
    #[arg(long)]
    memory: Vec<usize>,
    #[arg(long, default_value_t = 64, value_parser = parse_bits)]
    bits: u32,
    /// Number of seeds per combination.
    #[arg(long, default_value_t = DEFAULT_SEED_COUNT)]
    seeds: usize,
    /// Seed from which the per-run seeds are derived.
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    /// Sampling ratios for mf; repeatable. Defaults to 0.1%, 0.3%, 0.5% and 0.7%.
    #[arg(long)]
    sample_ratio: Vec<f64>,
    /// Budgets above this are recorded as failed runs.
    #[arg(long)]
    memory_ceiling: Option<usize>,
    /// Output directory for the results log, oracle cache and plot tables.
    #[arg(long, default_value = "viewsize-out")]
    out: PathBuf,
    /// Run combinations one at a time.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Independence orders; repeatable.
    #[arg(long, default_values_t = [2u32, 4, 8])]
    k: Vec<u32>,
    /// Memory values; repeatable. Defaults to 2^6 through 2^20.
    #[arg(long)]
    memory: Vec<u64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    synthetic: SyntheticSpec,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

fn parse_bits(s: &str) -> std::result::Result<u32, String> {
    match s {
        "32" => Ok(32),
        "64" => Ok(64),
        _ => Err("hash width must be 32 or 64".into()),
    }
}

fn estimate(args: EstimateArgs) -> Result<bool> {
    let table = args.data.table()?;
    let queries = args.data.queries(&table)?;
    let bits = HashBits::from_width(args.bits)?;
    let sketches: Vec<Technique> = args.technique.iter().copied().filter(|t| t.is_sketch()).collect();
    let mut out = io::stdout().lock();
    writeln!(out, "query\ttechnique\tM\testimate\texact")?;
    for q in &queries {
        if !sketches.is_empty() {
            let mut est = ViewEstimator::new(q.clone(), bits, args.master_seed);
            for &t in &sketches {
                est.add_sketch(t, args.memory)?;
            }
            est.consume(table.open_stream()?)?;
            for (t, e) in sketches.iter().zip(est.estimates()) {
                writeln!(out, "{q}\t{t}\t{}\t{}\t{}", args.memory, e.value, e.exact)?;
            }
        }
        for &t in &args.technique {
            match t {
                Technique::Mf => {
                    let e = multifractal_view_size(table.open_stream()?, q, args.sample_ratio, args.master_seed)?;
                    writeln!(out, "{q}\tmf\t-\t{}\t{}", e.value, e.exact)?;
                }
                Technique::Exact => {
                    let r = exact_view_size(table.open_stream()?, q, false)?;
                    writeln!(out, "{q}\texact\t-\t{}\ttrue", r.distinct)?;
                }
                _ => {}
            }
        }
    }
    Ok(true)
}

fn sweep(args: SweepArgs) -> Result<bool> {
    let table = args.data.table()?;
    let queries = args.data.queries(&table)?;
    let mut config = SweepConfig::new(table, queries);
    if !args.technique.is_empty() {
        config.techniques = args.technique;
    }
    config.memories = if args.memory.is_empty() {
        SMALL_BUDGETS.to_vec()
    } else {
        args.memory
    };
    config.sample_ratios = if args.sample_ratio.is_empty() {
        SAMPLE_RATIOS.to_vec()
    } else {
        args.sample_ratio
    };
    config.bits = HashBits::from_width(args.bits)?;
    config.seeds = default_seeds(args.master_seed, args.seeds);
    config.memory_ceiling = args.memory_ceiling;
    config.parallel = !args.sequential;

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut oracle = OracleCache::open(args.out.join("oracle.tsv"))?;
    let records = run_protocol(&config, &mut oracle);
    oracle.save()?;
    append_records(args.out.join("runs.tsv"), &records)?;
    let all_runs: Vec<_> = viewsize::harness::read_records(args.out.join("runs.tsv"))?;
    emit_plot_tables(&all_runs, args.out.join("tables"))?;

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "query\ttechnique\tM\tp\tL\texact_f0\truns\tstandard_error\tmax_error"
    )?;
    for s in summarize(&records) {
        let p = s.sample_ratio.map_or("-".to_string(), |p| p.to_string());
        writeln!(
            out,
            "{}\t{}\t{}\t{p}\t{}\t{}\t{}\t{:.6}\t{:.6}",
            s.query, s.technique, s.memory, s.bits, s.exact_f0, s.runs, s.standard_error, s.max_error
        )?;
    }
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!(
            "{failed} of {} runs failed; see {}",
            records.len(),
            args.out.join("runs.tsv").display()
        );
    }
    Ok(failed == 0)
}

fn bounds(args: BoundsArgs) -> Result<bool> {
    let memories = if args.memory.is_empty() {
        default_memory_grid()
    } else {
        args.memory
    };
    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = sink;
    emit_bound_curves(&memories, &args.k, args.delta, &mut sink)?;
    sink.flush()?;
    Ok(true)
}

fn generate(args: GenerateArgs) -> Result<bool> {
    let rows = args.synthetic.write_to(&args.out, args.delimiter)?;
    eprintln!("wrote {rows} rows to {}", args.out.display());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Sweep(a) => sweep(a),
        Command::Bounds(a) => bounds(a),
        Command::Generate(a) => generate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
