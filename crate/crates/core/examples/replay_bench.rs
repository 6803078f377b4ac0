//! Runs the shipped 10-task replay corpus end to end in a temporary directory and
//! prints the report. No network; needs `python3` on PATH.
//!
//! cargo run --example replay_bench

use std::path::PathBuf;

use cdd_refactor::pipeline::{cmd_bench, cmd_report, BenchOptions, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay/replay.toml");
    let mut config = RunConfig::load(&corpus)?;
    let out = tempfile::tempdir()?;
    config.output_dir = out.path().to_path_buf();
    let summary = cmd_bench(&config, BenchOptions::default())?;
    eprintln!("{} jobs, {} written", summary.total_jobs, summary.written);
    print!("{}", cmd_report(out.path())?.to_text());
    Ok(())
}
