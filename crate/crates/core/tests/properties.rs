mod common;

use proptest::prelude::*;

use cdd_refactor::metrics::{cognitive, cyclomatic, cyclomatic_via_cfg, icp, unit_report, ComplexityReport, ControlFlowGraph, IcpCostTable};
use cdd_refactor::refactor::extract_code;
use cdd_refactor::similarity::{codebleu, CodeBleuWeights};
use cdd_refactor::source::{parse_text, FunctionUnit, SourceUnit};
use cdd_refactor::stats::{cliffs_delta, wilcoxon_with_cutoff, PairedSample};

use common::pyprog::{decisions, function, render, G, PLAIN, RENAMED};

fn only_function(src: &str) -> FunctionUnit {
    let parsed = parse_text(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let mut fs: Vec<FunctionUnit> = parsed.functions.into_iter().filter(|f| !f.is_synthetic_toplevel).collect();
    assert_eq!(fs.len(), 1, "{src}");
    fs.pop().unwrap()
}

fn metrics(f: &FunctionUnit) -> (u32, u32, u32) {
    (cyclomatic(f), cognitive(f), icp(f, &IcpCostTable::default()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decision_count_matches_graph_formula(body in function()) {
        let src = render(&body, PLAIN);
        let f = only_function(&src);
        let want = 1 + decisions(&body) as i64;
        prop_assert_eq!(cyclomatic(&f) as i64, want, "{}", src);
        let g = ControlFlowGraph::build(&f);
        prop_assert_eq!(cyclomatic_via_cfg(&g).unwrap(), want, "{}", src);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_ignore_identifier_names(body in function()) {
        let a = only_function(&render(&body, PLAIN));
        let b = only_function(&render(&body, RENAMED));
        prop_assert_eq!(metrics(&a), metrics(&b));
    }

    #[test]
    fn renaming_keeps_syntax_and_dataflow_scores(reference in function(), hyp in function()) {
        let w = CodeBleuWeights::default();
        let r = SourceUnit::original("r", render(&reference, PLAIN));
        let plain = codebleu(&r, &SourceUnit::refactored("h", render(&hyp, PLAIN)), &w).unwrap();
        let renamed = codebleu(&r, &SourceUnit::refactored("h", render(&hyp, RENAMED)), &w).unwrap();
        prop_assert!((plain.components.syntax - renamed.components.syntax).abs() < 1e-12);
        prop_assert!((plain.components.dataflow - renamed.components.dataflow).abs() < 1e-12);
    }

    #[test]
    fn codebleu_is_bounded_and_one_on_identity(a in function(), b in function()) {
        let w = CodeBleuWeights::default();
        let ua = SourceUnit::original("a", render(&a, PLAIN));
        let s = codebleu(&ua, &SourceUnit::refactored("b", render(&b, RENAMED)), &w).unwrap();
        let c = s.components;
        for v in [s.total, c.ngram, c.weighted_ngram, c.syntax, c.dataflow] {
            prop_assert!((0.0..=1.0).contains(&v), "{:?}", s);
        }
        let same = codebleu(&ua, &SourceUnit::refactored("a", render(&a, PLAIN)), &w).unwrap();
        prop_assert!((same.total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_more_level_of_nesting(body in function()) {
        let inner = only_function(&render(&body, PLAIN));
        let wrapped = vec![G::If { body: body.clone(), elifs: vec![], orelse: None }];
        let outer = only_function(&render(&wrapped, PLAIN));
        let (cc, cogc, icp0) = metrics(&inner);
        let (cc2, cogc2, icp2) = metrics(&outer);
        prop_assert_eq!(cc2, cc + 1);
        prop_assert_eq!(icp2, icp0 + 1);
        prop_assert!(cogc2 > cogc);
        prop_assert!(cogc2 >= cogc + 1 + inner.constructs.len() as u32);
    }

    #[test]
    fn fenced_code_round_trips(body in function(), prose in "[A-Za-z ,.]{0,40}") {
        let src = render(&body, PLAIN);
        let response = format!("{prose}\n```python\n{src}```\n{prose}\n");
        prop_assert_eq!(extract_code(&response), Some(src));
    }

    #[test]
    fn complexity_report_serde_round_trip(body in function()) {
        let unit = SourceUnit::original("x", render(&body, PLAIN));
        let report = unit_report(&unit).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: ComplexityReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, report);
    }

    #[test]
    fn cliffs_delta_is_antisymmetric(
        a in prop::collection::vec(-50i32..50, 1..30),
        b in prop::collection::vec(-50i32..50, 1..30),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let ab = cliffs_delta(&a, &b).unwrap();
        let ba = cliffs_delta(&b, &a).unwrap();
        prop_assert!((ab.delta + ba.delta).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab.delta));
        prop_assert_eq!(ab.magnitude, ba.magnitude);
    }

    #[test]
    fn exact_and_normal_wilcoxon_agree_at_twenty(
        diffs in prop::collection::vec((1u32..1000, any::<bool>()), 20),
    ) {
        // Distinct magnitudes so neither path has to deal with ties.
        let mut seen = std::collections::BTreeSet::new();
        let pairs: Vec<(f64, f64)> = diffs
            .iter()
            .map(|&(m, pos)| {
                let mut m = m;
                while !seen.insert(m) {
                    m += 1000;
                }
                (0.0, if pos { f64::from(m) } else { -f64::from(m) })
            })
            .collect();
        let sample = PairedSample::new(pairs);
        let exact = wilcoxon_with_cutoff(&sample, 25).unwrap();
        let normal = wilcoxon_with_cutoff(&sample, 0).unwrap();
        prop_assert!((exact.p - normal.p).abs() < 0.02, "exact {} normal {}", exact.p, normal.p);
    }
}
