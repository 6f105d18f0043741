//! A short timing sweep written as CSV to stdout.

use piratte::bench::{fit_rows, run_suite, write_csv, BenchOptions};

fn main() -> piratte::Result<()> {
    let opts = BenchOptions::quick();
    let mut rows = Vec::new();
    for suite in ["encrypt", "rekey"] {
        rows.extend(run_suite(suite, &opts)?);
    }
    write_csv(&rows, std::io::stdout())?;
    let fit = fit_rows(&rows, "rekey", "piratte");
    eprintln!("rekey: {fit:?}");
    Ok(())
}
