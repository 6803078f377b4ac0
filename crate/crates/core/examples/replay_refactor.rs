//! Refactors one program against a recorded response, so no network or token is needed.
//! The response deliberately changes the signature to show the constraint report.
//!
//! cargo run --example replay_refactor

use std::sync::Arc;

use cdd_refactor::refactor::{build_prompt, prompt_digest, refactor_source, Arm, Client, FixtureEntry, FixtureStore, ModelConfig};
use cdd_refactor::source::SourceUnit;

const ORIGINAL: &str = "def avg(a, b):\n    return a + b\n";
const RESPONSE: &str = "Here is a cleaner version:\n\n```python\ndef avg(a, b, precision=2):\n    return round((a + b) / 2, precision)\n```\n\nIt now computes a real average.";

fn main() {
    let model = ModelConfig::default();
    let entry = FixtureEntry {
        digest: prompt_digest(&build_prompt(Arm::Baseline, ORIGINAL), &model.model),
        model: model.model.clone(),
        response: RESPONSE.into(),
    };
    let client = Client::replay(model, Arc::new(FixtureStore::from_entries([entry])));
    let out = refactor_source(&client, &SourceUnit::original("avg", ORIGINAL), Arm::Baseline, Some("avg"));
    if let Some(e) = out.error {
        eprintln!("completion failed: {e}");
        std::process::exit(1);
    }
    println!("--- extracted ---\n{}", out.record.extracted_code.as_deref().unwrap_or("<none>"));
    println!("--- violations ---");
    for v in &out.record.violations {
        println!("{v}");
    }
}
