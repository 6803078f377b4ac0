mod common;

use std::path::Path;
use std::process::{Command, Output};

use cdd_refactor::refactor::{build_prompt, prompt_digest, Arm, FixtureEntry, ModelConfig};

const NTH_EVEN: &str = "def nth_even(n):\n    if n==1:\n        return 0\n    if n==2:\n        return 2\n    if n==3:\n        return 4\n    else:\n        return n*2-2\n";

fn cddr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cddr"))
        .args(args)
        .current_dir(cwd)
        .env_remove("OPENAI_API_KEY")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_prints_rows_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f6.py"), NTH_EVEN).unwrap();
    std::fs::write(dir.path().join("empty.py"), "").unwrap();
    std::fs::write(dir.path().join("bad.py"), "def f(:\n").unwrap();

    let o = cddr(&["analyze", "f6.py"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let row: Vec<String> = stdout(&o).lines().nth(1).unwrap().split_whitespace().map(String::from).collect();
    assert_eq!(row, ["nth_even", "4", "4", "4"]);

    let o = cddr(&["analyze", "empty.py"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 2);

    assert_eq!(cddr(&["analyze", "bad.py"], dir.path()).status.code(), Some(3));
}

#[test]
fn refactor_in_replay_mode() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f6.py"), NTH_EVEN).unwrap();
    let model = ModelConfig::default().model;
    let entries = [
        FixtureEntry {
            digest: prompt_digest(&build_prompt(Arm::Cdd, NTH_EVEN), &model),
            model: model.clone(),
            response: "```python\ndef nth_even(n):\n    return (n - 1) * 2\n```\n".into(),
        },
        FixtureEntry {
            digest: prompt_digest(&build_prompt(Arm::Baseline, NTH_EVEN), &model),
            model: model.clone(),
            response: "Sorry, I can't help with that.".into(),
        },
    ];
    let lines: String = entries.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
    std::fs::write(dir.path().join("r.jsonl"), lines).unwrap();

    let o = cddr(&["refactor", "f6.py", "--arm", "cdd", "--replay", "--fixtures", "r.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "def nth_even(n):\n    return (n - 1) * 2\n");

    let o = cddr(&["refactor", "f6.py", "--arm", "baseline", "--replay", "--fixtures", "r.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(4));

    std::fs::write(dir.path().join("other.py"), "def g():\n    return 1\n").unwrap();
    let o = cddr(&["refactor", "other.py", "--replay", "--fixtures", "r.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn live_refactor_without_token_fails_before_network() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.py"), "def g():\n    return 1\n").unwrap();
    std::fs::write(dir.path().join("c.toml"), "[model]\nendpoint = \"http://127.0.0.1:9\"\nauth_env = \"CDDR_TEST_UNSET_TOKEN\"\n").unwrap();
    let o = cddr(&["refactor", "f.py", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CDDR_TEST_UNSET_TOKEN"));
}

#[test]
fn bench_then_report_on_the_replay_corpus() {
    let out = tempfile::tempdir().unwrap();
    let config = common::replay_dir().join("replay.toml");
    let run = out.path().join("run");
    let o = cddr(
        &["bench", "--config", config.to_str().unwrap(), "--out", run.to_str().unwrap(), "--workers", "4"],
        out.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = cddr(&["report", run.to_str().unwrap()], out.path());
    assert_eq!(o.status.code(), Some(0));
    let golden = std::fs::read_to_string(common::replay_dir().join("golden/report.txt")).unwrap();
    assert_eq!(stdout(&o), golden);

    let empty = out.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(cddr(&["report", empty.to_str().unwrap()], out.path()).status.code(), Some(8));
}

#[test]
fn token_is_not_a_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = cddr(&["refactor", "x.py", "--token", "abc"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
