//! Estimate the size of a few views of a synthetic fact table with every
//! technique and compare against the exact count.
//!
//! ```text
//! cargo run --release --example quick_estimate
//! ```

use viewsize::estimate::ViewEstimator;
use viewsize::hashing::HashBits;
use viewsize::ingest::{SyntheticSpec, ViewQuery};
use viewsize::multifractal::multifractal_view_size;
use viewsize::oracle::exact_view_size;
use viewsize::Technique;

fn main() -> viewsize::Result<()> {
    let table = SyntheticSpec::zipf(0.8, 200_000, 1_000_000, 4, 42).generate()?;
    println!("fact table {} ({} dimensions)", table.id(), table.arity());

    for dims in [vec![0], vec![0, 1], vec![0, 1, 2, 3]] {
        let query = ViewQuery::new(dims, table.arity())?;
        let exact = exact_view_size(table.open_stream()?, &query, false)?.distinct;

        // one pass feeds all five sketches through a shared hasher
        let mut est = ViewEstimator::new(query.clone(), HashBits::L64, 7);
        for t in Technique::SKETCHES {
            est.add_sketch(t, 2048)?;
        }
        est.consume(table.open_stream()?)?;

        println!("\nview ({query}): exact size {exact}");
        for (t, e) in Technique::SKETCHES.iter().zip(est.estimates()) {
            let err = (e.value - exact as f64).abs() / exact as f64;
            let tag = if e.exact { " (exact)" } else { "" };
            println!("  {t:<3} M=2048  {:>12.0}  error {:>6.2}%{tag}", e.value, 100.0 * err);
        }
        let mf = multifractal_view_size(table.open_stream()?, &query, 0.005, 7)?;
        let err = (mf.value - exact as f64).abs() / exact as f64;
        println!("  mf  p=0.5%   {:>12.0}  error {:>6.2}%", mf.value, 100.0 * err);
        let t = est.timings();
        println!(
            "  pass timings: loading {:?}, hashing {:?}, counting {:?}",
            t.loading, t.hashing, t.counting
        );
    }
    Ok(())
}
