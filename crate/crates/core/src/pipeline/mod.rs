//! Run configuration, resumable benchmark runs and report generation.

mod bench;
mod config;
mod record;
mod report;

use std::path::Path;
use std::sync::Arc;

pub use bench::{
    load_dataset, run_bench, slug, BenchOptions, BenchSummary, Provenance, JOURNAL_FILE, PROVENANCE_FILE, RECORDS_FILE,
};
pub use config::{DatasetConfig, RunConfig};
pub use record::{load_records, RecordSink, RefactorSummary, RunRecord, SCHEMA_VERSION};
pub use report::{
    build_report, load_labels, ComplexityRow, CorrectnessRow, Metric, ReductionRow, Report, SimilarityRow,
    TaxonomyRow, LABELS_FILE,
};

use crate::metrics::{unit_report, ComplexityReport};
use crate::refactor::{refactor_source, Arm, Client, CompletionError, FixtureError, FixtureStore, RefactorRecord, UreqTransport};
use crate::source::{SourceError, SourceUnit};
use crate::stats::StatsError;
use crate::verify::Verifier;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("records line {line}: {message}")]
    Records { line: usize, message: String },
    #[error("dataset: {0}")]
    Dataset(#[from] StatsError),
    #[error("fixtures: {0}")]
    Fixtures(#[from] FixtureError),
    #[error("parse error: {0}")]
    Parse(#[from] SourceError),
    #[error("no code could be extracted from the response")]
    Extraction,
    #[error("{0}")]
    Completion(#[from] CompletionError),
    #[error("sandbox setup: {0}")]
    Setup(String),
    #[error("run has no records")]
    EmptyRun,
}

impl PipelineError {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(_) => 3,
            PipelineError::Extraction => 4,
            PipelineError::Completion(CompletionError::FixtureMiss { .. }) => 6,
            PipelineError::Completion(_) => 5,
            PipelineError::Setup(_) => 7,
            PipelineError::EmptyRun => 8,
            _ => 1,
        }
    }
}

/// Client for the configured mode. Replay never touches the network.
pub fn build_client(config: &RunConfig) -> Result<Client, PipelineError> {
    config.validate()?;
    let fixtures = || config.fixtures.as_deref().ok_or_else(|| PipelineError::Config("fixtures path missing".into()));
    Ok(if config.replay {
        Client::replay(config.model.clone(), Arc::new(FixtureStore::load(fixtures()?)?))
    } else if config.record {
        Client::record(config.model.clone(), Arc::new(UreqTransport), Arc::new(FixtureStore::open_for_recording(fixtures()?)?))
    } else {
        Client::live(config.model.clone(), Arc::new(UreqTransport))
    })
}

fn read_source(path: &Path) -> Result<SourceUnit, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    Ok(SourceUnit::original(path.display().to_string(), text))
}

pub fn cmd_analyze(path: &Path) -> Result<ComplexityReport, PipelineError> {
    Ok(unit_report(&read_source(path)?)?)
}

/// Refactors one file. The record carries violations; the caller decides how to show them.
pub fn cmd_refactor(
    path: &Path,
    arm: Arm,
    entry_point: Option<&str>,
    client: &Client,
) -> Result<(String, RefactorRecord), PipelineError> {
    let unit = read_source(path)?;
    crate::source::parse(&unit)?;
    let out = refactor_source(client, &unit, arm, entry_point);
    if let Some(e) = out.error {
        return Err(e.into());
    }
    match out.record.extracted_code.clone() {
        Some(code) => Ok((code, out.record)),
        None => Err(PipelineError::Extraction),
    }
}

pub fn cmd_bench(config: &RunConfig, options: BenchOptions) -> Result<BenchSummary, PipelineError> {
    let client = build_client(config)?;
    let verifier = Verifier::from_env(config.max_children.unwrap_or(config.workers))
        .map_err(|e| PipelineError::Setup(e.to_string()))?;
    run_bench(config, &client, &verifier, options)
}

/// Builds the report from a run directory and writes `report.txt` and `report.csv` into it.
pub fn cmd_report(run_dir: &Path) -> Result<Report, PipelineError> {
    let records = load_records(&run_dir.join(RECORDS_FILE))?;
    let provenance = match std::fs::read_to_string(run_dir.join(PROVENANCE_FILE)) {
        Ok(text) => Some(serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("provenance: {e}")))?),
        Err(_) => None,
    };
    let labels = load_labels(&run_dir.join(LABELS_FILE))?;
    let report = build_report(&records, provenance.as_ref(), &labels)?;
    let write = |name: &str, text: String| {
        std::fs::write(run_dir.join(name), text).map_err(|e| PipelineError::Io(format!("{name}: {e}")))
    };
    write("report.txt", report.to_text())?;
    write("report.csv", report.to_csv())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            PipelineError::Parse(SourceError::Parse { line: 1, column: 1, message: String::new() }).exit_code(),
            PipelineError::Extraction.exit_code(),
            PipelineError::Completion(CompletionError::Transport("x".into())).exit_code(),
            PipelineError::Completion(CompletionError::FixtureMiss { digest: "d".into() }).exit_code(),
            PipelineError::Setup("s".into()).exit_code(),
            PipelineError::EmptyRun.exit_code(),
        ];
        assert_eq!(codes, [3, 4, 5, 6, 7, 8]);
    }
}
