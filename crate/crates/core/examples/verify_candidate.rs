//! Executes an original and a mutated program against the same asserts in the
//! sandbox, then labels the failure. Needs `python3` on PATH.
//!
//! cargo run --example verify_candidate

use cdd_refactor::refactor::{build_prompt, check_constraints, Arm, RefactorRecord};
use cdd_refactor::source::SourceUnit;
use cdd_refactor::verify::{classify_failure, SandboxPolicy, TestSpec, Verdict, Verifier};

const ORIGINAL: &str = "def avg(a, b):\n    return a + b\n";
const MUTATED: &str = "def avg(a, b):\n    \"\"\"Return the average of a and b.\"\"\"\n    return (a + b) / 2\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let verifier = Verifier::from_env(2)?;
    let policy = SandboxPolicy::default();
    let spec = TestSpec::assert_list(vec!["assert avg(2, 3) == 5".into(), "assert avg(-1, 1) == 0".into()], Some("avg".into()));

    for (label, code) in [("original", ORIGINAL), ("mutated", MUTATED)] {
        let o = verifier.verify(&SourceUnit::refactored(label, code), &spec, &policy);
        println!("{label}: {:?} (case {:?}) {}", o.verdict, o.failed_case_index, o.detail);
        if o.verdict != Verdict::Pass {
            let record = RefactorRecord {
                origin_id: "avg".into(),
                arm: Arm::Baseline,
                model: "none".into(),
                template_version: String::new(),
                prompt: build_prompt(Arm::Baseline, ORIGINAL),
                raw_response: Some(code.into()),
                extracted_code: Some(code.into()),
                violations: check_constraints(&SourceUnit::original("avg", ORIGINAL), &SourceUnit::refactored(label, code), Some("avg"))?,
                completion_error: None,
                requested_at_ms: 0,
                responded_at_ms: 0,
                attempts: Vec::new(),
            };
            let category = classify_failure(ORIGINAL, &record, &o);
            println!("  category: {:?}", category.label);
        }
    }
    Ok(())
}
