use std::io::{Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{normalize_output, NumericMismatch, SandboxPolicy, TestOutcome, TestSpec, TestStyle, Verdict};
use crate::source::SourceUnit;

pub const EMBEDDED_SHIM: &str = include_str!("../../shim/run_manifest.py");

#[derive(Debug, Serialize)]
struct ShimManifest<'a> {
    source: &'a str,
    style: TestStyle,
    assertions: &'a [String],
    setup: &'a str,
    io_cases: Vec<ShimIoCase<'a>>,
    entry_point: Option<&'a str>,
    case_timeout: f64,
}

#[derive(Debug, Serialize)]
struct ShimIoCase<'a> {
    input: &'a str,
}

#[derive(Debug, Deserialize)]
struct ShimVerdict {
    verdict: String,
    failed_case_index: Option<usize>,
    exception: Option<String>,
    exception_type: Option<String>,
    #[serde(default)]
    outputs: Vec<String>,
    #[serde(default)]
    values: Option<NumericMismatch>,
}

#[derive(Debug)]
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Runs candidates through the shim, one interpreter process per call.
#[derive(Debug, Clone)]
pub struct Verifier {
    python: PathBuf,
    shim: PathBuf,
    slots: Arc<Slots>,
    _shim_dir: Option<Arc<tempfile::TempDir>>,
}

impl Verifier {
    /// Interpreter from `CDDR_PYTHON` (default `python3`), shim from `CDDR_SHIM`
    /// (default: the bundled script).
    pub fn from_env(max_children: usize) -> std::io::Result<Self> {
        let python = std::env::var_os("CDDR_PYTHON").map(PathBuf::from).unwrap_or_else(|| "python3".into());
        match std::env::var_os("CDDR_SHIM") {
            Some(shim) => Ok(Self::new(python, PathBuf::from(shim), max_children)),
            None => Self::with_embedded_shim(python, max_children),
        }
    }

    pub fn new(python: PathBuf, shim: PathBuf, max_children: usize) -> Self {
        Verifier {
            python,
            shim,
            slots: Arc::new(Slots { free: Mutex::new(max_children.max(1)), cv: Condvar::new() }),
            _shim_dir: None,
        }
    }

    pub fn with_embedded_shim(python: PathBuf, max_children: usize) -> std::io::Result<Self> {
        let dir = tempfile::Builder::new().prefix("cddr-shim").tempdir()?;
        let shim = dir.path().join("run_manifest.py");
        std::fs::write(&shim, EMBEDDED_SHIM)?;
        let mut v = Self::new(python, shim, max_children);
        v._shim_dir = Some(Arc::new(dir));
        Ok(v)
    }

    pub fn python(&self) -> &Path {
        &self.python
    }

    pub fn shim(&self) -> &Path {
        &self.shim
    }

    pub fn verify(&self, candidate: &SourceUnit, spec: &TestSpec, policy: &SandboxPolicy) -> TestOutcome {
        if let Err(e) = spec.validate().and_then(|_| policy.validate()) {
            return TestOutcome::setup_error(e);
        }
        let _slot = self.slots.acquire();
        let start = Instant::now();
        let mut outcome = match self.run(candidate, spec, policy) {
            Ok(o) => o,
            Err(e) => TestOutcome::setup_error(e),
        };
        outcome.duration_ms = start.elapsed().as_millis() as u64;
        outcome
    }

    fn run(&self, candidate: &SourceUnit, spec: &TestSpec, policy: &SandboxPolicy) -> Result<TestOutcome, String> {
        let workdir = tempfile::Builder::new().prefix("cddr-run").tempdir().map_err(|e| format!("tempdir: {e}"))?;
        let manifest = ShimManifest {
            source: &candidate.text,
            style: spec.style,
            assertions: &spec.assertions,
            setup: &spec.setup,
            io_cases: spec.io_cases.iter().map(|c| ShimIoCase { input: &c.input }).collect(),
            entry_point: spec.entry_point.as_deref(),
            case_timeout: 0.0,
        };
        let payload = serde_json::to_vec(&manifest).map_err(|e| e.to_string())?;
        let mut child = Command::new(&self.python)
            .arg("-I")
            .arg(&self.shim)
            .current_dir(workdir.path())
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .env("PYTHONHASHSEED", "0")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0)
            .spawn()
            .map_err(|e| format!("cannot start {}: {e}", self.python.display()))?;

        let mut stdin = child.stdin.take().unwrap();
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(&payload);
        });
        let cap = policy.output_cap_bytes;
        let out_reader = capped_reader(child.stdout.take().unwrap(), cap);
        let err_reader = capped_reader(child.stderr.take().unwrap(), cap);

        let timeout = Duration::from_secs_f64(policy.timeout_secs);
        let timed_out = wait_or_kill(&mut child, timeout)?;
        let _ = writer.join();
        let (stdout, _) = out_reader.join().unwrap_or_default();
        let (stderr, _) = err_reader.join().unwrap_or_default();
        let stderr_excerpt = excerpt(&String::from_utf8_lossy(&stderr), 2000);

        let base = TestOutcome {
            verdict: Verdict::Timeout,
            failed_case_index: None,
            error_case_index: None,
            exception_type: None,
            detail: String::new(),
            stderr_excerpt,
            duration_ms: 0,
            numeric: None,
        };
        if timed_out {
            return Ok(TestOutcome { detail: format!("killed after {:.1}s", policy.timeout_secs), ..base });
        }
        let stdout = String::from_utf8_lossy(&stdout);
        let line = stdout.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        let verdict: ShimVerdict = serde_json::from_str(line).map_err(|e| {
            format!("shim produced no verdict ({e}); stderr: {}", base.stderr_excerpt)
        })?;
        Ok(interpret(verdict, spec, base))
    }
}

fn interpret(v: ShimVerdict, spec: &TestSpec, base: TestOutcome) -> TestOutcome {
    let detail = v.exception.clone().unwrap_or_default();
    if spec.style == TestStyle::StdinStdout {
        for (i, got) in v.outputs.iter().enumerate() {
            let Some(case) = spec.io_cases.get(i) else { break };
            if v.verdict != "pass" && i + 1 == v.outputs.len() && v.failed_case_index == Some(i) {
                break;
            }
            if normalize_output(got) != normalize_output(&case.output) {
                let numeric = match (case.output.trim().parse::<f64>(), got.trim().parse::<f64>()) {
                    (Ok(expected), Ok(observed)) => Some(NumericMismatch { expected, observed }),
                    _ => None,
                };
                return TestOutcome {
                    verdict: Verdict::Fail,
                    failed_case_index: Some(i),
                    detail: format!("case {i}: expected {:?}, got {:?}", excerpt(&case.output, 200), excerpt(got, 200)),
                    numeric,
                    ..base
                };
            }
        }
    }
    match v.verdict.as_str() {
        "pass" => TestOutcome { verdict: Verdict::Pass, ..base },
        "fail" => TestOutcome {
            verdict: Verdict::Fail,
            failed_case_index: Some(v.failed_case_index.unwrap_or(0)),
            exception_type: v.exception_type,
            detail: match v.failed_case_index.and_then(|i| spec.assertions.get(i)) {
                Some(a) => format!("{}: {}", a.trim(), detail),
                None => detail,
            },
            numeric: v.values,
            ..base
        },
        "error" => TestOutcome {
            verdict: Verdict::RuntimeError,
            error_case_index: v.failed_case_index,
            exception_type: v.exception_type,
            detail,
            ..base
        },
        "timeout" => TestOutcome { verdict: Verdict::Timeout, error_case_index: v.failed_case_index, detail, ..base },
        other => TestOutcome { verdict: Verdict::SetupError, detail: format!("unknown shim verdict {other:?}"), ..base },
    }
}

fn capped_reader<R: Read + Send + 'static>(mut r: R, cap: usize) -> thread::JoinHandle<(Vec<u8>, bool)> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let mut truncated = false;
        let mut buf = [0u8; 8192];
        loop {
            match r.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let room = cap.saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                    truncated |= n > room;
                }
            }
        }
        (kept, truncated)
    })
}

/// Returns whether the process group had to be killed. Non-zero exits are setup errors.
fn wait_or_kill(child: &mut Child, timeout: Duration) -> Result<bool, String> {
    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait().map_err(|e| e.to_string())? {
            Some(status) => {
                if status.success() {
                    return Ok(false);
                }
                return Err(match status.signal() {
                    Some(sig) => format!("shim killed by signal {sig}"),
                    None => format!("shim exited with {status}"),
                });
            }
            None if Instant::now() >= deadline => {
                kill_group(child);
                let _ = child.wait();
                return Ok(true);
            }
            None => thread::sleep(Duration::from_millis(5)),
        }
    }
}

fn kill_group(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: signalling our own child's process group; no memory is shared.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = child.kill();
}

fn excerpt(s: &str, max: usize) -> String {
    if s.len() <= max {
        return s.to_string();
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}
