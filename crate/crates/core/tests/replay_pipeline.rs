mod common;

use std::io::Write;
use std::sync::atomic::Ordering;

use cdd_refactor::pipeline::{
    cmd_report, load_records, run_bench, BenchOptions, RECORDS_FILE,
};
use cdd_refactor::refactor::Arm;
use cdd_refactor::verify::{ErrorLabel, Verdict, Verifier};

use common::{normalized, replay_client, replay_config, replay_dir};

fn verifier() -> Verifier {
    Verifier::from_env(4).expect("shim can be written")
}

#[test]
fn full_replay_matches_golden_files_without_network() {
    let out = tempfile::tempdir().unwrap();
    let config = replay_config(out.path());
    let (client, net) = replay_client(&config);
    let summary = run_bench(&config, &client, &verifier(), BenchOptions::default()).unwrap();
    assert_eq!((summary.total_jobs, summary.written), (20, 20));
    assert_eq!(net.0.load(Ordering::SeqCst), 0);

    let records = load_records(&out.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(records.len(), 20);
    let failed: Vec<(String, Arm)> = normalized(&records).iter().filter(|r| r.failed()).map(|r| r.key()).collect();
    assert_eq!(
        failed,
        [
            ("mbpp/3".to_string(), Arm::Baseline),
            ("mbpp/4".to_string(), Arm::Baseline),
            ("mbpp/5".to_string(), Arm::Baseline),
            ("mbpp/6".to_string(), Arm::Baseline),
            ("mbpp/7".to_string(), Arm::Cdd),
            ("mbpp/9".to_string(), Arm::Baseline),
        ]
    );

    cmd_report(out.path()).unwrap();
    let golden = replay_dir().join("golden");
    for name in ["report.txt", "report.csv"] {
        let got = std::fs::read_to_string(out.path().join(name)).unwrap();
        let want = std::fs::read_to_string(golden.join(name)).unwrap();
        assert_eq!(got, want, "{name} differs from golden");
    }
    // Regenerating from the same records is byte-identical.
    let again = cmd_report(out.path()).unwrap();
    assert_eq!(again.to_text(), std::fs::read_to_string(golden.join("report.txt")).unwrap());
}

#[test]
fn interrupted_and_resumed_run_gives_the_same_records() {
    let full_dir = tempfile::tempdir().unwrap();
    let full_cfg = replay_config(full_dir.path());
    let (client, _) = replay_client(&full_cfg);
    run_bench(&full_cfg, &client, &verifier(), BenchOptions::default()).unwrap();
    let full = load_records(&full_dir.path().join(RECORDS_FILE)).unwrap();

    let part_dir = tempfile::tempdir().unwrap();
    let mut cfg = replay_config(part_dir.path());
    cfg.workers = 3;
    let (client, net) = replay_client(&cfg);
    let first = run_bench(&cfg, &client, &verifier(), BenchOptions { stop_after: Some(7) }).unwrap();
    assert_eq!(first.written, 7);
    // Simulate a crash in the middle of writing the next record.
    let mut f = std::fs::OpenOptions::new().append(true).open(part_dir.path().join(RECORDS_FILE)).unwrap();
    f.write_all(b"{\"schema_version\":1,\"origin_id\":\"mbp").unwrap();
    drop(f);

    let second = run_bench(&cfg, &client, &verifier(), BenchOptions::default()).unwrap();
    assert_eq!((second.already_done, second.written), (7, 13));
    let third = run_bench(&cfg, &client, &verifier(), BenchOptions::default()).unwrap();
    assert_eq!(third.written, 0);
    assert_eq!(net.0.load(Ordering::SeqCst), 0);

    let resumed = load_records(&part_dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(normalized(&resumed), normalized(&full));
    assert_eq!(
        cmd_report(part_dir.path()).unwrap().to_csv(),
        cmd_report(full_dir.path()).unwrap().to_csv()
    );
}

#[test]
fn slope_rewrite_crashes_and_is_labelled_logic() {
    let out = tempfile::tempdir().unwrap();
    let mut config = replay_config(out.path());
    config.arms = vec![Arm::Baseline];
    let (client, _) = replay_client(&config);
    run_bench(&config, &client, &verifier(), BenchOptions::default()).unwrap();
    let records = load_records(&out.path().join(RECORDS_FILE)).unwrap();
    let r = records.iter().find(|r| r.origin_id == "mbpp/3").unwrap();
    let o = r.outcome.as_ref().unwrap();
    assert_eq!(o.verdict, Verdict::RuntimeError);
    assert_eq!(o.exception_type.as_deref(), Some("ValueError"));
    assert_eq!(o.error_case_index, Some(0));
    assert_eq!(r.category.unwrap().label, ErrorLabel::LogicAlteration);
}

#[test]
fn replay_fixture_miss_is_recorded_not_fatal() {
    let out = tempfile::tempdir().unwrap();
    let mut config = replay_config(out.path());
    config.model.model = "some-other-model".into();
    let (client, net) = replay_client(&config);
    let s = run_bench(&config, &client, &verifier(), BenchOptions::default()).unwrap();
    assert_eq!(s.written, 20);
    assert_eq!(net.0.load(Ordering::SeqCst), 0);
    let records = load_records(&out.path().join(RECORDS_FILE)).unwrap();
    assert!(records.iter().all(|r| !r.responded() && !r.failed()));
    assert!(records[0].refactor.completion_error.as_deref().unwrap().contains("no recorded response"));
}

#[test]
fn resuming_with_a_different_configuration_is_refused() {
    let out = tempfile::tempdir().unwrap();
    let config = replay_config(out.path());
    let (client, _) = replay_client(&config);
    run_bench(&config, &client, &verifier(), BenchOptions { stop_after: Some(1) }).unwrap();
    let mut other = config.clone();
    other.seed = 99;
    assert!(run_bench(&other, &client, &verifier(), BenchOptions::default()).is_err());
}
