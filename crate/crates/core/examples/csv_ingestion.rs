//! Stream a delimited fact table from disk and size several of its views.
//!
//! ```text
//! cargo run --release --example csv_ingestion [path.csv]
//! ```
//!
//! Without an argument a small sales table with a header line and one
//! malformed row is written to the temporary directory first.

use std::io::Write;

use viewsize::estimate::ViewEstimator;
use viewsize::hashing::HashBits;
use viewsize::ingest::{FactTable, FileOptions, ViewQuery};
use viewsize::oracle::exact_view_size;
use viewsize::Technique;

fn write_demo(path: &std::path::Path) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "store|product|month|channel")?;
    for i in 0..200_000u64 {
        let store = i % 97;
        let product = (i * 31) % 1_013;
        let month = (i / 17) % 12;
        let channel = if i % 5 == 0 { "web" } else { "shop" };
        writeln!(f, "s{store}|p{product}|{month}|{channel}")?;
    }
    writeln!(f, "broken|row")?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let p = std::env::temp_dir().join("viewsize-sales.psv");
            write_demo(&p)?;
            p
        }
    };
    let lenient = FileOptions {
        delimiter: '|',
        has_header: true,
        strict: false,
    };
    let table = FactTable::from_file(&path, lenient.clone())?;
    println!("{}: dimensions {:?}", path.display(), table.dimension_names());

    for dims in ["0", "1,2", "0,1", "0,1,2,3"] {
        let query = ViewQuery::parse(dims, table.arity())?;
        let mut est = ViewEstimator::new(query.clone(), HashBits::L64, 1);
        est.add_sketch(Technique::Gt, 1024)?;
        est.add_sketch(Technique::Ac, 1024)?;
        let mut stream = table.open_stream()?;
        est.consume(&mut stream)?;
        let e = est.estimates();
        let exact = exact_view_size(table.open_stream()?, &query, false)?.distinct;
        println!(
            "view {:<22} exact {exact:>7}  gt {:>9.0}  ac {:>9.0}  ({} malformed rows skipped)",
            query
                .dims()
                .iter()
                .map(|&d| table.dimension_names()[d].as_str())
                .collect::<Vec<_>>()
                .join(","),
            e[0].value,
            e[1].value,
            stream.skipped_rows()
        );
    }

    let strict = FactTable::from_file(
        &path,
        FileOptions {
            strict: true,
            ..lenient
        },
    )?;
    let query = ViewQuery::new(vec![0], strict.arity())?;
    match exact_view_size(strict.open_stream()?, &query, false) {
        Ok(r) => println!("strict mode: {} rows, all well formed", r.rows),
        Err(e) => println!("strict mode stops at the first malformed row: {e}"),
    }
    Ok(())
}
