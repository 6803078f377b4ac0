use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::metrics::unit_report;
use crate::refactor::{refactor_source, Arm, Client, PromptTemplate};
use crate::similarity::{codebleu, SimilarityScore};
use crate::source::SourceUnit;
use crate::stats::{load_apps_introductory, load_mbpp, validate_references, DatasetRecord, DatasetTag};
use crate::verify::{classify_failure, TestOutcome, TestSpec, Verdict, Verifier};

use super::config::{DatasetConfig, RunConfig};
use super::record::{load_records, RecordSink, RefactorSummary, RunRecord, SCHEMA_VERSION};
use super::PipelineError;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const JOURNAL_FILE: &str = "journal.log";
pub const PROVENANCE_FILE: &str = "provenance.json";

/// What a run was made from. Written once per run directory; no wall-clock data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub schema_version: u32,
    pub dataset: DatasetTag,
    pub dataset_file: String,
    pub sample_size: Option<usize>,
    pub limit: Option<usize>,
    pub seed: u64,
    pub model: String,
    pub sampling: String,
    pub arms: Vec<Arm>,
    pub templates: Vec<String>,
    pub mode: String,
}

impl Provenance {
    pub fn from_config(config: &RunConfig, dataset: &DatasetConfig) -> Self {
        Provenance {
            schema_version: SCHEMA_VERSION,
            dataset: dataset.tag,
            dataset_file: dataset.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sample_size: dataset.sample_size,
            limit: dataset.limit,
            seed: config.seed,
            model: config.model.model.clone(),
            sampling: serde_json::to_string(&config.model.sampling).unwrap_or_default(),
            arms: config.arms.clone(),
            templates: config
                .arms
                .iter()
                .map(|a| format!("{a}.{}", PromptTemplate::builtin(*a).version))
                .collect(),
            mode: if config.replay { "replay" } else if config.record { "record" } else { "live" }.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchOptions {
    /// Stop after writing this many new records, as if interrupted.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchSummary {
    pub run_dir: PathBuf,
    pub total_jobs: usize,
    pub already_done: usize,
    pub written: usize,
    /// Dataset records dropped because the reference failed its own tests.
    pub flagged: Vec<String>,
}

pub fn load_dataset(d: &DatasetConfig, seed: u64) -> Result<Vec<DatasetRecord>, PipelineError> {
    let mut records = match d.tag {
        DatasetTag::Mbpp => load_mbpp(&d.path)?,
        DatasetTag::AppsIntroductory => {
            let n = d
                .sample_size
                .ok_or_else(|| PipelineError::Config("apps_introductory needs dataset.sample_size".into()))?;
            load_apps_introductory(&d.path, n, seed)?
        }
    };
    if let Some(limit) = d.limit {
        records.truncate(limit);
    }
    Ok(records)
}

/// File-name-safe form of an origin id.
pub fn slug(origin_id: &str) -> String {
    origin_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn preflight(verifier: &Verifier, config: &RunConfig) -> Result<(), PipelineError> {
    let probe = SourceUnit::original("preflight", "def probe():\n    return 1\n");
    let spec = TestSpec::assert_list(vec!["assert probe() == 1".into()], Some("probe".into()));
    let o = verifier.verify(&probe, &spec, &config.sandbox);
    if o.passed() {
        Ok(())
    } else {
        Err(PipelineError::Setup(format!(
            "sandbox preflight with {} failed ({:?}): {} {}",
            verifier.python().display(),
            o.verdict,
            o.detail,
            o.stderr_excerpt
        )))
    }
}

struct Shared<'a> {
    config: &'a RunConfig,
    client: &'a Client,
    verifier: &'a Verifier,
    run_dir: &'a Path,
    sink: RecordSink,
    journal: Mutex<std::fs::File>,
}

impl Shared<'_> {
    fn journal(&self, line: &str) {
        let mut j = self.journal.lock().unwrap();
        let _ = writeln!(j, "{line}").and_then(|_| j.flush());
    }

    fn run_job(&self, task: &DatasetRecord, arm: Arm) -> Result<RunRecord, PipelineError> {
        let original = SourceUnit::original(task.origin_id.clone(), task.reference.clone());
        let entry = task.spec.entry_point.as_deref();
        let out = refactor_source(self.client, &original, arm, entry);
        let rec = &out.record;
        let stem = format!("{}.{arm}.txt", slug(&task.origin_id));
        write_file(&self.run_dir.join("prompts").join(&stem), &rec.prompt)?;
        if let Some(raw) = &rec.raw_response {
            write_file(&self.run_dir.join("raw").join(&stem), raw)?;
        }

        let before = unit_report(&original).ok();
        let (outcome, after, similarity) = match &rec.extracted_code {
            Some(code) => {
                let refactored = SourceUnit::refactored(task.origin_id.clone(), code.clone());
                let mut outcome = self.verifier.verify(&refactored, &task.spec, &self.config.sandbox);
                if outcome.verdict == Verdict::SetupError {
                    // Either the candidate took the shim down or the sandbox itself broke.
                    preflight(self.verifier, self.config)?;
                    outcome.detail = format!("shim did not report a verdict: {}", outcome.detail);
                }
                let similarity = codebleu(&original, &refactored, &self.config.weights).ok();
                (Some(outcome), unit_report(&refactored).ok(), similarity)
            }
            None if rec.raw_response.is_some() => (None, None, Some(SimilarityScore::default())),
            None => (None, None, None),
        };

        let mut record = RunRecord {
            schema_version: SCHEMA_VERSION,
            origin_id: task.origin_id.clone(),
            arm,
            refactor: RefactorSummary::from(rec),
            outcome,
            before,
            after,
            similarity,
            category: None,
        };
        if record.failed() {
            let o = record.outcome.clone().unwrap_or_else(|| TestOutcome::setup_error("no code extracted"));
            record.category = Some(classify_failure(&task.reference, rec, &o));
        }
        Ok(record)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))
}

fn status(r: &RunRecord) -> String {
    match (&r.outcome, &r.refactor.completion_error) {
        (Some(o), _) => format!("{:?}", o.verdict),
        (None, Some(e)) => format!("no-response: {e}"),
        (None, None) => "no-code".into(),
    }
}

/// Refactors, verifies and measures every (task, arm) pair not already in the run
/// directory. Per-job failures are recorded; a broken sandbox aborts the run.
pub fn run_bench(
    config: &RunConfig,
    client: &Client,
    verifier: &Verifier,
    options: BenchOptions,
) -> Result<BenchSummary, PipelineError> {
    config.validate()?;
    let dataset_cfg = config.dataset.as_ref().ok_or_else(|| PipelineError::Config("no [dataset] section".into()))?;
    let mut tasks = load_dataset(dataset_cfg, config.seed)?;

    let run_dir = config.output_dir.clone();
    for sub in ["", "prompts", "raw"] {
        std::fs::create_dir_all(run_dir.join(sub)).map_err(|e| PipelineError::Io(format!("{}: {e}", run_dir.display())))?;
    }
    let provenance = Provenance::from_config(config, dataset_cfg);
    let prov_path = run_dir.join(PROVENANCE_FILE);
    let prov_text = serde_json::to_string_pretty(&provenance).expect("provenance serializes") + "\n";
    match std::fs::read_to_string(&prov_path) {
        Ok(existing) if existing != prov_text => {
            return Err(PipelineError::Config(format!(
                "{} belongs to a different run configuration",
                run_dir.display()
            )))
        }
        Ok(_) => {}
        Err(_) => write_file(&prov_path, &prov_text)?,
    }

    preflight(verifier, config)?;

    let mut flagged = Vec::new();
    if config.check_references {
        validate_references(&mut tasks, verifier, &config.sandbox);
        tasks.retain(|t| match &t.flagged {
            Some(why) => {
                log::warn!("skipping {}: reference fails its tests ({why})", t.origin_id);
                flagged.push(t.origin_id.clone());
                false
            }
            None => true,
        });
    }

    let records_path = run_dir.join(RECORDS_FILE);
    let done: BTreeSet<(String, Arm)> = load_records(&records_path)?.iter().map(RunRecord::key).collect();
    let mut jobs: Vec<(usize, Arm)> = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        for arm in &config.arms {
            if !done.contains(&(t.origin_id.clone(), *arm)) {
                jobs.push((i, *arm));
            }
        }
    }
    let total_jobs = tasks.len() * config.arms.len();
    let already_done = total_jobs - jobs.len();

    let journal = OpenOptions::new()
        .create(true)
        .append(true)
        .open(run_dir.join(JOURNAL_FILE))
        .map_err(|e| PipelineError::Io(e.to_string()))?;
    let shared = Shared {
        config,
        client,
        verifier,
        run_dir: &run_dir,
        sink: RecordSink::open(&records_path)?,
        journal: Mutex::new(journal),
    };
    let next = AtomicUsize::new(0);
    let written = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let first_error: Mutex<Option<PipelineError>> = Mutex::new(None);
    let budget = options.stop_after.unwrap_or(usize::MAX);

    thread::scope(|s| {
        for _ in 0..config.workers {
            s.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= jobs.len() || k >= budget {
                    break;
                }
                let (ti, arm) = jobs[k];
                let task = &tasks[ti];
                let result = shared.run_job(task, arm).and_then(|r| {
                    shared.sink.append(&r)?;
                    Ok(r)
                });
                match result {
                    Ok(r) => {
                        written.fetch_add(1, Ordering::SeqCst);
                        shared.journal(&format!("{}\t{arm}\t{}", r.origin_id, status(&r)));
                    }
                    Err(e) => {
                        shared.journal(&format!("{}\t{arm}\tabort: {e}", task.origin_id));
                        abort.store(true, Ordering::SeqCst);
                        first_error.lock().unwrap().get_or_insert(e);
                        break;
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    Ok(BenchSummary { run_dir, total_jobs, already_done, written: written.into_inner(), flagged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("apps/12:0"), "apps_12_0");
        assert_eq!(slug("mbpp/7"), "mbpp_7");
    }
}
