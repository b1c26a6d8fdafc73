//! A small sweep in the shape of the benchmark tables: exact methods get a
//! time budget and report `*` when it runs out.
//!
//!     cargo run --release --example bench_table

use riskscore::report::{run_bench, write_bench_csv, BenchRow, Method, SweepSpec};

fn main() -> riskscore::Result<()> {
    let mut spec = SweepSpec::grid(&[200], &[1, 2, 3], &[1], &[Method::Bnb, Method::Heuristic], 2.0);
    spec.workers = 2;
    let rows = run_bench(&spec);
    print!("{}", BenchRow::format_table(&rows));

    println!();
    write_bench_csv(&rows, std::io::stdout())?;
    Ok(())
}
