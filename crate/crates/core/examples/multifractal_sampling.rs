//! Fit the multifractal model to Bernoulli samples of uniform and skewed
//! tables and compare the extrapolated view size with the exact one.
//!
//! ```text
//! cargo run --release --example multifractal_sampling
//! ```

use viewsize::ingest::{SyntheticSpec, ViewQuery};
use viewsize::multifractal::{multifractal_estimate, summarize_sample};
use viewsize::oracle::exact_view_size;

fn main() -> viewsize::Result<()> {
    let tables = [
        SyntheticSpec::uniform(100_000, 2_000_000, 2, 1),
        SyntheticSpec::uniform(2_000, 2_000_000, 2, 1),
        SyntheticSpec::zipf(1.2, 100_000, 2_000_000, 2, 1),
    ];
    for spec in tables {
        let table = spec.clone().generate()?;
        let query = ViewQuery::new(vec![0, 1], 2)?;
        let exact = exact_view_size(table.open_stream()?, &query, false)?.distinct;
        println!("\n{spec}: exact view size {exact}");
        for ratio in [0.001, 0.003, 0.005, 0.007] {
            let s = summarize_sample(table.open_stream()?, &query, ratio, 3)?;
            let (est, model) = multifractal_estimate(&s)?;
            println!(
                "  p={:.1}%  sample {:>6} rows, {:>6} distinct, max mult. {:>5} -> depth {:>2}, bias {:.4}, estimate {:>9.0} ({:+.1}%)",
                100.0 * ratio,
                s.sample_size,
                s.distinct,
                s.max_multiplicity,
                model.depth,
                model.bias,
                est.value,
                100.0 * (est.value - exact as f64) / exact as f64
            );
        }
    }
    Ok(())
}
