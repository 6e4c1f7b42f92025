//! Accuracy and time as the memory budget grows, on one view: the
//! tuple-sampling sketches and Adaptive Counting converge, while plain
//! Probabilistic Counting and LogLog degrade once M approaches the view
//! size.
//!
//! ```text
//! cargo run --release --example memory_sweep [distinct] [seeds]
//! ```

use viewsize::estimate::ViewEstimator;
use viewsize::harness::{default_seeds, standard_error};
use viewsize::hashing::HashBits;
use viewsize::ingest::{SyntheticSpec, ViewQuery};
use viewsize::Technique;

fn main() -> viewsize::Result<()> {
    let mut args = std::env::args().skip(1);
    let f0: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(250_000);
    let n_seeds: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let table = SyntheticSpec::uniform(f0, f0, 1, 0).generate()?;
    let query = ViewQuery::new(vec![0], 1)?;
    let seeds = default_seeds(3, n_seeds);

    for bits in [HashBits::L32, HashBits::L64] {
        println!(
            "\nL={}: standard error (%) and mean seconds per run, F0={f0}, {n_seeds} seeds",
            bits.width()
        );
        print!("{:<9}", "M");
        for t in Technique::SKETCHES {
            print!("{:>18}", t.name());
        }
        println!();
        for e in (10..=20).step_by(2) {
            let m = 1usize << e;
            print!("2^{e:<7}");
            for t in Technique::SKETCHES {
                let mut estimates = Vec::new();
                let mut secs = 0.0;
                for &seed in &seeds {
                    let mut est = ViewEstimator::new(query.clone(), bits, seed);
                    est.add_sketch(t, m)?;
                    est.consume(table.open_stream()?)?;
                    estimates.push(est.estimates()[0].value);
                    secs += est.timings().total().as_secs_f64();
                }
                let se = standard_error(&estimates, f0 as f64).unwrap();
                print!("{:>10.3} {:>6.3}s", 100.0 * se, secs / n_seeds as f64);
            }
            println!();
        }
    }
    Ok(())
}
