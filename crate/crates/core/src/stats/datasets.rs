//! MBPP and APPS ingestion.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::StatsError;
use crate::verify::{IoCase, SandboxPolicy, TestSpec, Verifier};
use crate::source::SourceUnit;

const ADAPTERS: &str = include_str!("../../data/adapters.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct MbppAdapter {
    pub id: String,
    pub problem: String,
    pub code: String,
    pub tests: String,
    pub setup: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AppsAdapter {
    pub id: String,
    pub problem: String,
    pub solutions: String,
    pub input_output: String,
    pub difficulty: String,
    pub introductory: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Adapters {
    pub mbpp: MbppAdapter,
    pub apps: AppsAdapter,
}

impl Adapters {
    pub fn builtin() -> Self {
        toml::from_str(ADAPTERS).expect("shipped adapter table parses")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetTag {
    Mbpp,
    AppsIntroductory,
}

impl DatasetTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetTag::Mbpp => "mbpp",
            DatasetTag::AppsIntroductory => "apps_introductory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub origin_id: String,
    pub problem: String,
    pub reference: String,
    pub spec: TestSpec,
    pub tag: DatasetTag,
    /// Why the reference solution failed its own tests, when it did.
    #[serde(default)]
    pub flagged: Option<String>,
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>, StatsError> {
    let file = File::open(path).map_err(|e| StatsError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| StatsError::Io(format!("{}: {e}", path.display())))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn format_err(line: usize, message: impl Into<String>) -> StatsError {
    StatsError::Format { line, message: message.into() }
}

fn field<'a>(obj: &'a Value, name: &str, line: usize) -> Result<&'a Value, StatsError> {
    obj.get(name).ok_or_else(|| format_err(line, format!("missing field `{name}`")))
}

fn id_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn str_field(obj: &Value, name: &str, line: usize) -> Result<String, StatsError> {
    field(obj, name, line)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| format_err(line, format!("field `{name}` is not a string")))
}

/// Name of the function the tests call: the first defined function mentioned in
/// the first test, else the first called name in it.
fn entry_point(code: &str, first_test: &str) -> Option<String> {
    let defined = crate::source::parse_text(code)
        .map(|p| p.functions.into_iter().filter(|f| !f.is_synthetic_toplevel).map(|f| f.name).collect::<Vec<_>>())
        .unwrap_or_default();
    if let Some(name) = defined.iter().find(|n| mentions_call(first_test, n)) {
        return Some(name.clone());
    }
    let rest = first_test.trim_start().strip_prefix("assert")?.trim_start();
    let name: String = rest.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
    (!name.is_empty() && rest[name.len()..].trim_start().starts_with('(')).then_some(name)
}

fn mentions_call(test: &str, name: &str) -> bool {
    let bytes = test.as_bytes();
    test.match_indices(name).any(|(i, _)| {
        let before_ok = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_');
        before_ok && test[i + name.len()..].trim_start().starts_with('(')
    })
}

/// Reads MBPP-layout JSON lines. References are not executed here; see [`validate_references`].
pub fn load_mbpp(path: &Path) -> Result<Vec<DatasetRecord>, StatsError> {
    let a = Adapters::builtin().mbpp;
    let mut out = Vec::new();
    for (line, text) in read_lines(path)? {
        let obj: Value = serde_json::from_str(&text).map_err(|e| format_err(line, e.to_string()))?;
        let id = id_string(field(&obj, &a.id, line)?);
        let code = str_field(&obj, &a.code, line)?;
        let tests: Vec<String> = field(&obj, &a.tests, line)?
            .as_array()
            .ok_or_else(|| format_err(line, format!("field `{}` is not a list", a.tests)))?
            .iter()
            .map(|t| t.as_str().map(str::to_string).ok_or_else(|| format_err(line, "test entry is not a string")))
            .collect::<Result<_, _>>()?;
        if tests.is_empty() {
            return Err(format_err(line, "empty test list"));
        }
        let setup = obj.get(&a.setup).and_then(Value::as_str).unwrap_or("").to_string();
        let entry = entry_point(&code, &tests[0]);
        let mut spec = TestSpec::assert_list(tests, entry);
        spec.setup = setup;
        out.push(DatasetRecord {
            origin_id: format!("mbpp/{id}"),
            problem: obj.get(&a.problem).and_then(Value::as_str).unwrap_or("").to_string(),
            reference: code,
            spec,
            tag: DatasetTag::Mbpp,
            flagged: None,
        });
    }
    Ok(out)
}

/// Python literal for a JSON value.
pub fn py_literal(v: &Value) -> String {
    match v {
        Value::Null => "None".into(),
        Value::Bool(true) => "True".into(),
        Value::Bool(false) => "False".into(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => serde_json::to_string(s).expect("strings serialize"),
        Value::Array(items) => format!("[{}]", items.iter().map(py_literal).collect::<Vec<_>>().join(", ")),
        Value::Object(map) => format!(
            "{{{}}}",
            map.iter().map(|(k, v)| format!("{}: {}", py_literal(&Value::String(k.clone())), py_literal(v))).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn io_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(lines) => lines.iter().map(|l| l.as_str().map(str::to_string).unwrap_or_else(|| l.to_string())).collect::<Vec<_>>().join("\n"),
        other => other.to_string(),
    }
}

fn apps_spec(io: &Value, reference: &str, line: usize) -> Result<TestSpec, StatsError> {
    let inputs = io.get("inputs").and_then(Value::as_array).ok_or_else(|| format_err(line, "input_output lacks inputs"))?;
    let outputs = io.get("outputs").and_then(Value::as_array).ok_or_else(|| format_err(line, "input_output lacks outputs"))?;
    if inputs.len() != outputs.len() || inputs.is_empty() {
        return Err(format_err(line, "inputs and outputs differ in length or are empty"));
    }
    match io.get("fn_name").and_then(Value::as_str) {
        Some(fn_name) => {
            let callee = if reference.contains("class Solution") { format!("Solution().{fn_name}") } else { fn_name.to_string() };
            let assertions = inputs
                .iter()
                .zip(outputs)
                .map(|(i, o)| {
                    let args = match i {
                        Value::Array(_) => py_literal(i),
                        other => format!("[{}]", py_literal(other)),
                    };
                    let expected = py_literal(o);
                    format!(
                        "assert (lambda r, e: r == e or (isinstance(e, list) and len(e) > 0 and r == e[0]))({callee}(*{args}), {expected})"
                    )
                })
                .collect();
            Ok(TestSpec::assert_list(assertions, Some(fn_name.to_string())))
        }
        None => Ok(TestSpec::stdin_stdout(
            inputs.iter().zip(outputs).map(|(i, o)| IoCase { input: io_text(i), output: io_text(o) }).collect(),
        )),
    }
}

/// Deterministic sample of `n` introductory (problem, solution) pairs under `seed`.
pub fn load_apps_introductory(path: &Path, n: usize, seed: u64) -> Result<Vec<DatasetRecord>, StatsError> {
    let a = Adapters::builtin().apps;
    let mut pool = Vec::new();
    for (line, text) in read_lines(path)? {
        let obj: Value = serde_json::from_str(&text).map_err(|e| format_err(line, e.to_string()))?;
        if obj.get(&a.difficulty).and_then(Value::as_str) != Some(a.introductory.as_str()) {
            continue;
        }
        let id = id_string(field(&obj, &a.id, line)?);
        let solutions: Vec<String> = match field(&obj, &a.solutions, line)? {
            Value::String(s) if s.trim().is_empty() => Vec::new(),
            Value::String(s) => serde_json::from_str(s).map_err(|e| format_err(line, format!("solutions: {e}")))?,
            Value::Array(items) => items.iter().filter_map(|v| v.as_str().map(str::to_string)).collect(),
            _ => return Err(format_err(line, "solutions is neither a JSON string nor a list")),
        };
        let io: Value = match field(&obj, &a.input_output, line)? {
            Value::String(s) if s.trim().is_empty() => continue,
            Value::String(s) => serde_json::from_str(s).map_err(|e| format_err(line, format!("input_output: {e}")))?,
            other => other.clone(),
        };
        let problem = obj.get(&a.problem).and_then(Value::as_str).unwrap_or("").to_string();
        for (idx, solution) in solutions.into_iter().enumerate() {
            let spec = apps_spec(&io, &solution, line)?;
            pool.push(DatasetRecord {
                origin_id: format!("apps/{id}:{idx}"),
                problem: problem.clone(),
                reference: solution,
                spec,
                tag: DatasetTag::AppsIntroductory,
                flagged: None,
            });
        }
    }
    if n > pool.len() {
        return Err(StatsError::InsufficientRecords { wanted: n, available: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, pool.len(), n).into_vec();
    picked.sort_unstable();
    let mut slots: Vec<Option<DatasetRecord>> = pool.into_iter().map(Some).collect();
    Ok(picked.into_iter().map(|i| slots[i].take().expect("indices are distinct")).collect())
}

/// Runs every reference against its own tests and records failures in `flagged`.
pub fn validate_references(records: &mut [DatasetRecord], verifier: &Verifier, policy: &SandboxPolicy) {
    for r in records.iter_mut() {
        let outcome = verifier.verify(&SourceUnit::original(r.origin_id.clone(), r.reference.clone()), &r.spec, policy);
        r.flagged = (!outcome.passed()).then(|| format!("{:?}: {}", outcome.verdict, outcome.detail));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn mbpp_fields_and_entry_point() {
        let f = file(r#"{"task_id": 7, "text": "Add.", "code": "def helper(x):\n    return x\n\ndef add(a, b):\n    return helper(a) + b", "test_list": ["assert add(1, 2) == 3"], "test_setup_code": ""}"#);
        let recs = load_mbpp(f.path()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].origin_id, "mbpp/7");
        assert_eq!(recs[0].spec.entry_point.as_deref(), Some("add"));
    }

    #[test]
    fn mbpp_empty_and_malformed() {
        assert!(load_mbpp(file("").path()).unwrap().is_empty());
        let good = r#"{"task_id": 1, "text": "", "code": "def f():\n    return 1", "test_list": ["assert f() == 1"]}"#;
        let err = load_mbpp(file(&format!("{good}\n{{broken\n")).path()).unwrap_err();
        assert!(matches!(err, StatsError::Format { line: 2, .. }));
    }

    fn apps_line(id: u32, difficulty: &str, n_solutions: usize) -> String {
        let sols: Vec<String> = (0..n_solutions).map(|i| format!("print(int(input()) + {i})")).collect();
        let io = serde_json::json!({"inputs": ["1\n"], "outputs": ["1\n"]});
        serde_json::json!({
            "problem_id": id,
            "question": "q",
            "solutions": serde_json::to_string(&sols).unwrap(),
            "input_output": io.to_string(),
            "difficulty": difficulty,
        })
        .to_string()
    }

    #[test]
    fn apps_sampling_is_seeded_and_filtered() {
        let lines: Vec<String> = (0..6).map(|i| apps_line(i, if i % 3 == 0 { "interview" } else { "introductory" }, 3)).collect();
        let f = file(&lines.join("\n"));
        let a = load_apps_introductory(f.path(), 5, 42).unwrap();
        let b = load_apps_introductory(f.path(), 5, 42).unwrap();
        assert_eq!(a.iter().map(|r| &r.origin_id).collect::<Vec<_>>(), b.iter().map(|r| &r.origin_id).collect::<Vec<_>>());
        assert!(a.iter().all(|r| r.tag == DatasetTag::AppsIntroductory && !r.origin_id.starts_with("apps/0:")));
        assert!(load_apps_introductory(f.path(), 0, 1).unwrap().is_empty());
        assert!(matches!(
            load_apps_introductory(f.path(), 13, 1),
            Err(StatsError::InsufficientRecords { wanted: 13, available: 12 })
        ));
    }

    #[test]
    fn call_based_apps_become_asserts() {
        let io = serde_json::json!({"fn_name": "add", "inputs": [[1, 2]], "outputs": [[3]]});
        let spec = apps_spec(&io, "def add(a, b):\n    return a + b\n", 1).unwrap();
        assert_eq!(spec.assertions.len(), 1);
        assert!(spec.assertions[0].contains("add(*[1, 2]), [3])"));
    }

    #[test]
    fn python_literals() {
        let v = serde_json::json!([null, true, 1.5, "a\"b", {"k": [1]}]);
        assert_eq!(py_literal(&v), r#"[None, True, 1.5, "a\"b", {"k": [1]}]"#);
    }
}
