//! Closed-form accuracy bounds: the precision reached 19 times out of 20
//! as a function of memory, and the hash width needed by Generalized
//! Counting.
//!
//! ```text
//! cargo run --release --example theoretical_bounds
//! ```

use viewsize::bounds::{
    emit_bound_curves, gc_delta, gc_min_bits, gt_delta_opt_at, ll_theoretical_stderr, pc_theoretical_stderr,
    DEFAULT_DELTA,
};

fn main() -> viewsize::Result<()> {
    for m in [256.0, 1024.0, 16384.0] {
        println!(
            "M={m:>6}: pc standard error {:.2}%, ll standard error {:.2}%",
            100.0 * pc_theoretical_stderr(m),
            100.0 * ll_theoretical_stderr(m)
        );
    }

    println!(
        "\nGC failure probability at epsilon=0.1, M=10^4, k=2: {:.4}",
        gc_delta(0.1, 1e4, 2)?
    );
    let (delta, alpha) = gt_delta_opt_at(0.05, 1e4, 4)?;
    println!("GT failure probability at epsilon=0.05, M=10^4, k=4: {delta:.4} (best alpha {alpha:.4})");
    println!(
        "hash bits GC needs for 2e21 distinct tuples at epsilon=0.1, M=10^4: {}",
        gc_min_bits(2e21, 0.1, 1e4)
    );

    println!("\nepsilon at delta = {DEFAULT_DELTA}:");
    let grid: Vec<u64> = (6..=20).step_by(2).map(|e| 1u64 << e).collect();
    emit_bound_curves(&grid, &[2, 4, 8], DEFAULT_DELTA, std::io::stdout().lock())?;
    Ok(())
}
