use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::metrics::ComplexityReport;
use crate::refactor::{prompt_digest, Arm, ConstraintViolation, RefactorRecord};
use crate::similarity::SimilarityScore;
use crate::verify::{ErrorCategory, TestOutcome, Verdict};

use super::PipelineError;

/// Bumped whenever a field changes meaning. Readers accept any version up to this one.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefactorSummary {
    pub model: String,
    pub template_version: String,
    pub prompt_digest: String,
    pub responded: bool,
    pub extracted: bool,
    pub violations: Vec<ConstraintViolation>,
    pub completion_error: Option<String>,
    pub attempts: usize,
    pub requested_at_ms: u64,
    pub responded_at_ms: u64,
}

impl From<&RefactorRecord> for RefactorSummary {
    fn from(r: &RefactorRecord) -> Self {
        RefactorSummary {
            model: r.model.clone(),
            template_version: r.template_version.clone(),
            prompt_digest: prompt_digest(&r.prompt, &r.model),
            responded: r.raw_response.is_some(),
            extracted: r.extracted_code.is_some(),
            violations: r.violations.clone(),
            completion_error: r.completion_error.clone(),
            attempts: r.attempt_count(),
            requested_at_ms: r.requested_at_ms,
            responded_at_ms: r.responded_at_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub origin_id: String,
    pub arm: Arm,
    pub refactor: RefactorSummary,
    /// Absent when there was no response or no code could be extracted.
    pub outcome: Option<TestOutcome>,
    pub before: Option<ComplexityReport>,
    /// Absent when the refactoring does not parse.
    pub after: Option<ComplexityReport>,
    pub similarity: Option<SimilarityScore>,
    pub category: Option<ErrorCategory>,
}

impl RunRecord {
    pub fn key(&self) -> (String, Arm) {
        (self.origin_id.clone(), self.arm)
    }

    /// A response came back.
    pub fn responded(&self) -> bool {
        self.refactor.responded
    }

    /// Responded, but the refactoring does not pass every test.
    pub fn failed(&self) -> bool {
        self.responded() && !self.outcome.as_ref().is_some_and(|o| o.verdict == Verdict::Pass)
    }

    /// Copy with wall-clock fields zeroed, for comparing runs.
    pub fn without_timing(&self) -> RunRecord {
        let mut r = self.clone();
        r.refactor.requested_at_ms = 0;
        r.refactor.responded_at_ms = 0;
        if let Some(o) = r.outcome.as_mut() {
            o.duration_ms = 0;
        }
        r
    }
}

/// Line-per-record appender; each call writes one whole line and flushes it.
pub struct RecordSink {
    file: Mutex<File>,
}

impl RecordSink {
    pub fn open(path: &Path) -> Result<Self, PipelineError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        // A crash mid-write can leave a partial last line; drop it so the job reruns.
        let text = std::fs::read(path).map_err(|e| PipelineError::Io(e.to_string()))?;
        if text.last().is_some_and(|b| *b != b'\n') {
            let keep = text.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
            file.set_len(keep as u64).map_err(|e| PipelineError::Io(e.to_string()))?;
        }
        Ok(RecordSink { file: Mutex::new(file) })
    }

    pub fn append(&self, record: &RunRecord) -> Result<(), PipelineError> {
        let mut line = serde_json::to_string(record).map_err(|e| PipelineError::Io(e.to_string()))?;
        line.push('\n');
        let mut f = self.file.lock().unwrap();
        f.write_all(line.as_bytes()).and_then(|_| f.flush()).map_err(|e| PipelineError::Io(e.to_string()))
    }
}

/// Reads a records file. An unparseable final line is treated as an interrupted
/// write and skipped; damage anywhere else is an error. Later duplicates of a
/// key are ignored.
pub fn load_records(path: &Path) -> Result<Vec<RunRecord>, PipelineError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(PipelineError::Io(format!("{}: {e}", path.display()))),
    };
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    let last_content = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(_) if Some(i) == last_content => {
                log::warn!("{}: ignoring truncated final line {}", path.display(), i + 1);
                continue;
            }
            Err(e) => {
                return Err(PipelineError::Records { line: i + 1, message: e.to_string() });
            }
        };
        if record.schema_version > SCHEMA_VERSION {
            return Err(PipelineError::Records {
                line: i + 1,
                message: format!("schema version {} is newer than {SCHEMA_VERSION}", record.schema_version),
            });
        }
        if seen.insert(record.key()) {
            out.push(record);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample(id: &str, arm: Arm) -> RunRecord {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            origin_id: id.into(),
            arm,
            refactor: RefactorSummary {
                model: "m".into(),
                template_version: "v1".into(),
                prompt_digest: "d".into(),
                responded: true,
                extracted: true,
                violations: vec![],
                completion_error: None,
                attempts: 1,
                requested_at_ms: 5,
                responded_at_ms: 6,
            },
            outcome: Some(TestOutcome::setup_error("x")),
            before: None,
            after: None,
            similarity: None,
            category: None,
        }
    }

    #[test]
    fn truncated_tail_is_tolerated_and_resumed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let sink = RecordSink::open(&path).unwrap();
        sink.append(&sample("a", Arm::Baseline)).unwrap();
        drop(sink);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"schema_version\":1,\"origin").unwrap();
        drop(f);
        assert_eq!(load_records(&path).unwrap().len(), 1);

        let sink = RecordSink::open(&path).unwrap();
        sink.append(&sample("b", Arm::Cdd)).unwrap();
        assert_eq!(load_records(&path).unwrap().len(), 2);

        std::fs::write(&path, "not json\n{}\n").unwrap();
        assert!(matches!(load_records(&path), Err(PipelineError::Records { line: 1, .. })));
    }

    #[test]
    fn duplicates_keep_first_and_missing_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        assert!(load_records(&path).unwrap().is_empty());
        let sink = RecordSink::open(&path).unwrap();
        sink.append(&sample("a", Arm::Cdd)).unwrap();
        let mut second = sample("a", Arm::Cdd);
        second.refactor.attempts = 9;
        sink.append(&second).unwrap();
        let got = load_records(&path).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].refactor.attempts, 1);
        assert_eq!(got[0].without_timing().refactor.requested_at_ms, 0);
    }
}
