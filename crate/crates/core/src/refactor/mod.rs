//! Prompt construction, model access, code extraction and constraint checks.

mod client;
mod constraints;
mod extract;
mod prompt;

use serde::{Deserialize, Serialize};

pub use client::{
    now_ms, parse_response, prompt_digest, AttemptLog, Client, CompletionError, FixtureEntry, FixtureError,
    FixtureStore, HttpResponse, Mode, ModelConfig, RateLimiter, Transport, UreqTransport,
};
pub use constraints::{check_constraints, string_inner, ConstraintViolation, ViolationKind};
pub use extract::extract_code;
pub use prompt::{build_prompt, Arm, PromptTemplate, SOURCE_SLOT};

use crate::source::SourceUnit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefactorRecord {
    pub origin_id: String,
    pub arm: Arm,
    pub model: String,
    pub template_version: String,
    pub prompt: String,
    /// `None` when the completion itself failed.
    pub raw_response: Option<String>,
    /// `None` exactly when extraction failed (or there was no response).
    pub extracted_code: Option<String>,
    pub violations: Vec<ConstraintViolation>,
    pub completion_error: Option<String>,
    pub requested_at_ms: u64,
    pub responded_at_ms: u64,
    pub attempts: Vec<AttemptLog>,
}

impl RefactorRecord {
    pub fn attempt_count(&self) -> usize {
        self.attempts.len()
    }
}

/// Result of one refactoring, keeping the typed error for callers that map it to exit codes.
pub struct RefactorOutcome {
    pub record: RefactorRecord,
    pub error: Option<CompletionError>,
}

/// Prompt, complete, extract and check one program. Never fails: problems land in the record.
pub fn refactor_source(client: &Client, original: &SourceUnit, arm: Arm, entry_point: Option<&str>) -> RefactorOutcome {
    let template = PromptTemplate::builtin(arm);
    let prompt = template.render(&original.text);
    let mut attempts = Vec::new();
    let requested_at_ms = now_ms();
    let result = client.complete(&prompt, &mut attempts);
    let responded_at_ms = now_ms();
    let (raw_response, error) = match result {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e)),
    };
    let extracted_code = raw_response.as_deref().and_then(extract_code);
    let violations = match &extracted_code {
        Some(code) => {
            let refactored = SourceUnit::refactored(original.origin_id.clone(), code.clone());
            check_constraints(original, &refactored, entry_point).unwrap_or_default()
        }
        None => Vec::new(),
    };
    let record = RefactorRecord {
        origin_id: original.origin_id.clone(),
        arm,
        model: client.config.model.clone(),
        template_version: template.version,
        prompt,
        raw_response,
        extracted_code,
        violations,
        completion_error: error.as_ref().map(|e| e.to_string()),
        requested_at_ms,
        responded_at_ms,
        attempts,
    };
    RefactorOutcome { record, error }
}
