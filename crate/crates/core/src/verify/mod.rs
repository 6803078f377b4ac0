//! Sandboxed execution of candidates against dataset tests, and failure pre-labelling.

mod classify;
mod sandbox;

use serde::{Deserialize, Serialize};

pub use classify::{classify_failure, ErrorCategory, ErrorLabel, LabelSource};
pub use sandbox::{Verifier, EMBEDDED_SHIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestStyle {
    AssertList,
    StdinStdout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoCase {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSpec {
    pub style: TestStyle,
    #[serde(default)]
    pub assertions: Vec<String>,
    /// Code run before the candidate in assert-list mode (MBPP `test_setup_code`).
    #[serde(default)]
    pub setup: String,
    #[serde(default)]
    pub io_cases: Vec<IoCase>,
    pub entry_point: Option<String>,
}

impl TestSpec {
    pub fn assert_list(assertions: Vec<String>, entry_point: Option<String>) -> Self {
        TestSpec { style: TestStyle::AssertList, assertions, setup: String::new(), io_cases: Vec::new(), entry_point }
    }

    pub fn stdin_stdout(io_cases: Vec<IoCase>) -> Self {
        TestSpec { style: TestStyle::StdinStdout, assertions: Vec::new(), setup: String::new(), io_cases, entry_point: None }
    }

    pub fn case_count(&self) -> usize {
        match self.style {
            TestStyle::AssertList => self.assertions.len(),
            TestStyle::StdinStdout => self.io_cases.len(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.style {
            TestStyle::AssertList if !self.io_cases.is_empty() => Err("assert_list spec carries io cases".into()),
            TestStyle::StdinStdout if !self.assertions.is_empty() => Err("stdin_stdout spec carries assertions".into()),
            _ if self.case_count() == 0 => Err("test spec has no cases".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SandboxPolicy {
    pub timeout_secs: f64,
    pub output_cap_bytes: usize,
    /// Always false; a policy asking for network is rejected.
    pub network_allowed: bool,
}

impl Default for SandboxPolicy {
    fn default() -> Self {
        SandboxPolicy { timeout_secs: 10.0, output_cap_bytes: 1 << 20, network_allowed: false }
    }
}

impl SandboxPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.timeout_secs > 0.0) {
            return Err("sandbox timeout must be > 0".into());
        }
        if self.network_allowed {
            return Err("network access cannot be enabled for candidate execution".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    RuntimeError,
    Timeout,
    SetupError,
}

/// Both sides of a failing numeric comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericMismatch {
    pub expected: f64,
    pub observed: f64,
}

impl NumericMismatch {
    pub fn relative_error(&self) -> f64 {
        (self.observed - self.expected).abs() / self.expected.abs().max(1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub verdict: Verdict,
    /// Present exactly when the verdict is `Fail`.
    pub failed_case_index: Option<usize>,
    /// Case being run when an error or timeout happened, if any.
    #[serde(default)]
    pub error_case_index: Option<usize>,
    pub exception_type: Option<String>,
    pub detail: String,
    pub stderr_excerpt: String,
    pub duration_ms: u64,
    #[serde(default)]
    pub numeric: Option<NumericMismatch>,
}

impl TestOutcome {
    pub fn setup_error(detail: impl Into<String>) -> Self {
        TestOutcome {
            verdict: Verdict::SetupError,
            failed_case_index: None,
            error_case_index: None,
            exception_type: None,
            detail: detail.into(),
            stderr_excerpt: String::new(),
            duration_ms: 0,
            numeric: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Trailing whitespace per line and trailing newlines are not significant.
pub fn normalize_output(s: &str) -> String {
    let lines: Vec<&str> = s.lines().map(str::trim_end).collect();
    lines.join("\n").trim_end_matches('\n').to_string()
}
