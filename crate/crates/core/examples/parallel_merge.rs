//! Shard a stream across threads, sketch each shard independently, ship
//! the serialized states back and merge them. The merged sketch is
//! bit-identical to one built in a single pass.
//!
//! ```text
//! cargo run --release --example parallel_merge
//! ```

use rayon::prelude::*;

use viewsize::hashing::{HashBits, TupleHasher};
use viewsize::ingest::{encode_projection, SyntheticSpec, ViewQuery};
use viewsize::sketches::{decode, encode, AnySketch, DistinctSketch, SketchParams};
use viewsize::Technique;

fn main() -> viewsize::Result<()> {
    let table = SyntheticSpec::zipf(1.1, 300_000, 1_000_000, 3, 5).generate()?;
    let query = ViewQuery::new(vec![0, 2], 3)?;
    let params = SketchParams::new(4096, HashBits::L64, 99);

    // Look-up tables grow on first sight of a value, so all shards must
    // use words from one hasher: hash once, then distribute.
    let mut hasher = TupleHasher::new(params.bits, params.seed);
    let mut tuples = Vec::new();
    for row in table.open_stream()? {
        let row = row?;
        let mut key = Vec::new();
        encode_projection(&row, &query, &mut key)?;
        tuples.push((key, hasher.hash_row(&row, &query)?));
    }

    for technique in Technique::SKETCHES {
        let shards: Vec<Vec<u8>> = tuples
            .par_chunks(tuples.len().div_ceil(8))
            .map(|chunk| {
                let mut s = AnySketch::new(technique, params).unwrap();
                for (k, h) in chunk {
                    s.insert(k, *h);
                }
                encode(&s)
            })
            .collect();
        let bytes: usize = shards.iter().map(Vec::len).sum();

        let mut merged = decode(&shards[0])?;
        for bytes in &shards[1..] {
            merged.merge(&decode(bytes)?)?;
        }
        let mut single = AnySketch::new(technique, params)?;
        for (k, h) in &tuples {
            single.insert(k, *h);
        }
        assert_eq!(encode(&merged), encode(&single));
        println!(
            "{technique}: 8 shards ({bytes} serialized bytes) merged to estimate {:.0}, identical to one pass",
            merged.estimate().value
        );
    }
    Ok(())
}
