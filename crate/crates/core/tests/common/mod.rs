#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use cdd_refactor::pipeline::{RunConfig, RunRecord};
use cdd_refactor::refactor::{Client, FixtureStore, HttpResponse, Transport};

pub fn replay_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay")
}

pub fn replay_config(out: &std::path::Path) -> RunConfig {
    let dir = replay_dir();
    let mut c = RunConfig::load(&dir.join("replay.toml")).expect("shipped config loads");
    c.output_dir = out.to_path_buf();
    c
}

/// Transport that only counts calls and always fails.
#[derive(Default)]
pub struct CountingTransport(pub AtomicUsize);

impl Transport for CountingTransport {
    fn post_json(&self, _: &str, _: &[(String, String)], _: &serde_json::Value, _: Duration) -> Result<HttpResponse, String> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Err("network disabled in tests".into())
    }
}

/// Replay client whose transport records any attempt to use it.
pub fn replay_client(config: &RunConfig) -> (Client, Arc<CountingTransport>) {
    let store = FixtureStore::load(config.fixtures.as_deref().unwrap()).expect("fixtures load");
    let counter = Arc::new(CountingTransport::default());
    let client = Client::replay(config.model.clone(), Arc::new(store)).with_transport(counter.clone());
    (client, counter)
}

/// Records with wall-clock fields cleared, in key order.
pub fn normalized(records: &[RunRecord]) -> Vec<RunRecord> {
    let mut v: Vec<RunRecord> = records.iter().map(RunRecord::without_timing).collect();
    v.sort_by_key(RunRecord::key);
    v
}

pub mod pyprog;
