//! With a memory budget larger than the view, Probabilistic Counting and
//! LogLog grossly overestimate, while Adaptive Counting falls back to
//! linear counting and Gibbons–Tirthapura counts exactly.
//!
//! ```text
//! cargo run --release --example small_view_overfitting
//! ```

use viewsize::estimate::ViewEstimator;
use viewsize::harness::{default_seeds, standard_error};
use viewsize::hashing::HashBits;
use viewsize::ingest::{SyntheticSpec, ViewQuery};
use viewsize::Technique;

fn main() -> viewsize::Result<()> {
    let f0 = 1_000.0;
    let table = SyntheticSpec::uniform(1_000, 20_000, 2, 3).generate()?;
    let query = ViewQuery::new(vec![0, 1], 2)?;
    let seeds = default_seeds(11, 20);

    println!("view of {f0} distinct tuples, 20 seeds, L=32");
    println!("{:<6}{:>10}{:>10}{:>10}{:>10}{:>10}", "M", "pc", "ll", "ac", "gc", "gt");
    for m in [64usize, 256, 1024, 2048, 8192] {
        let mut per_tech = vec![Vec::new(); 5];
        for &seed in &seeds {
            let mut est = ViewEstimator::new(query.clone(), HashBits::L32, seed);
            for t in Technique::SKETCHES {
                est.add_sketch(t, m)?;
            }
            est.consume(table.open_stream()?)?;
            for (v, e) in per_tech.iter_mut().zip(est.estimates()) {
                v.push(e.value);
            }
        }
        print!("{m:<6}");
        for v in &per_tech {
            print!("{:>9.1}%", 100.0 * standard_error(v, f0).unwrap());
        }
        println!();
    }
    Ok(())
}
