use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metrics::{delta_class, Delta, Totals};
use crate::refactor::Arm;
use crate::stats::{
    cliffs_delta, format_pct, net_effect, quartile_summary, reduction_rate, wilcoxon_signed_rank, CliffsDelta,
    NetEffect, PairedSample, Quartiles, WilcoxonMethod,
};
use crate::verify::{ErrorCategory, ErrorLabel, LabelSource};

use super::bench::Provenance;
use super::record::RunRecord;
use super::PipelineError;

pub const LABELS_FILE: &str = "labels.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    CogC,
    CC,
}

impl Metric {
    fn of(self, t: &Totals) -> u32 {
        match self {
            Metric::CogC => t.cogc,
            Metric::CC => t.cc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectnessRow {
    pub model: String,
    pub arm: Arm,
    pub tasks: usize,
    pub responded: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionRow {
    pub model: String,
    pub baseline_failures: usize,
    pub cdd_failures: usize,
    /// `None` when the baseline had no failures.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub model: String,
    pub arm: Arm,
    pub metric: Metric,
    /// Records where both sides could be measured.
    pub measured: usize,
    pub unchanged: usize,
    pub net: NetEffect,
    pub p: Option<f64>,
    pub method: Option<WilcoxonMethod>,
    /// Cliff's delta of before against after; positive means lower after.
    pub delta: Option<CliffsDelta>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityRow {
    pub model: String,
    pub arm: Arm,
    pub n: usize,
    pub quartiles: Option<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomyRow {
    pub model: String,
    pub arm: Arm,
    pub label: ErrorLabel,
    pub count: usize,
    pub human: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub provenance: Option<Provenance>,
    pub records: usize,
    pub correctness: Vec<CorrectnessRow>,
    pub reductions: Vec<ReductionRow>,
    pub complexity: Vec<ComplexityRow>,
    pub similarity: Vec<SimilarityRow>,
    pub taxonomy: Vec<TaxonomyRow>,
}

/// Reads `origin_id,arm,label` rows of reviewed failure labels.
pub fn load_labels(path: &Path) -> Result<HashMap<(String, Arm), ErrorLabel>, PipelineError> {
    #[derive(Deserialize)]
    struct Row {
        origin_id: String,
        arm: Arm,
        label: ErrorLabel,
    }
    let mut out = HashMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| PipelineError::Records { line: i + 2, message: e.to_string() })?;
        out.insert((row.origin_id, row.arm), row.label);
    }
    Ok(out)
}

pub fn build_report(
    records: &[RunRecord],
    provenance: Option<&Provenance>,
    human: &HashMap<(String, Arm), ErrorLabel>,
) -> Result<Report, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyRun);
    }
    let mut sorted: Vec<RunRecord> = records.to_vec();
    sorted.sort_by(|a, b| (&a.origin_id, a.arm).cmp(&(&b.origin_id, b.arm)));
    for r in sorted.iter_mut() {
        if let Some(label) = human.get(&r.key()) {
            if r.failed() {
                r.category = Some(ErrorCategory { label: *label, source: LabelSource::Human });
            }
        }
    }

    let mut groups: BTreeMap<(String, Arm), Vec<&RunRecord>> = BTreeMap::new();
    for r in &sorted {
        groups.entry((r.refactor.model.clone(), r.arm)).or_default().push(r);
    }

    let mut report = Report {
        provenance: provenance.cloned(),
        records: sorted.len(),
        correctness: Vec::new(),
        reductions: Vec::new(),
        complexity: Vec::new(),
        similarity: Vec::new(),
        taxonomy: Vec::new(),
    };

    for ((model, arm), rs) in &groups {
        let responded = rs.iter().filter(|r| r.responded()).count();
        let failed = rs.iter().filter(|r| r.failed()).count();
        report.correctness.push(CorrectnessRow {
            model: model.clone(),
            arm: *arm,
            tasks: rs.len(),
            responded,
            passed: responded - failed,
            failed,
        });

        for metric in [Metric::CogC, Metric::CC] {
            let pairs: Vec<(u32, u32)> = rs
                .iter()
                .filter_map(|r| Some((metric.of(&r.before.as_ref()?.unit_totals), metric.of(&r.after.as_ref()?.unit_totals))))
                .collect();
            let count = |d: Delta| pairs.iter().filter(|(b, a)| delta_class(*b, *a) == d).count() as u64;
            let net = net_effect(count(Delta::Decrease), count(Delta::Increase), rs.len() as u64);
            let sample: PairedSample = pairs.iter().map(|(b, a)| (*b as f64, *a as f64)).collect();
            let (p, method, delta) = if sample.is_empty() {
                (None, None, None)
            } else {
                let w = wilcoxon_signed_rank(&sample)?;
                (Some(w.p), Some(w.method), Some(cliffs_delta(&sample.before(), &sample.after())?))
            };
            report.complexity.push(ComplexityRow {
                model: model.clone(),
                arm: *arm,
                metric,
                measured: pairs.len(),
                unchanged: count(Delta::NoChange) as usize,
                net,
                p,
                method,
                delta,
            });
        }

        let scores: Vec<f64> = rs.iter().filter_map(|r| r.similarity.map(|s| s.total)).collect();
        report.similarity.push(SimilarityRow {
            model: model.clone(),
            arm: *arm,
            n: scores.len(),
            quartiles: quartile_summary(&scores).ok(),
        });

        for label in ErrorLabel::ALL {
            let with: Vec<&&RunRecord> = rs.iter().filter(|r| r.failed() && r.category.map(|c| c.label) == Some(label)).collect();
            report.taxonomy.push(TaxonomyRow {
                model: model.clone(),
                arm: *arm,
                label,
                count: with.len(),
                human: with.iter().filter(|r| r.category.map(|c| c.source) == Some(LabelSource::Human)).count(),
            });
        }
    }

    let models: Vec<&String> = groups.keys().map(|(m, _)| m).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    for model in models {
        let failures = |arm: Arm| report.correctness.iter().find(|c| &c.model == model && c.arm == arm).map(|c| c.failed);
        if let (Some(b), Some(c)) = (failures(Arm::Baseline), failures(Arm::Cdd)) {
            report.reductions.push(ReductionRow {
                model: model.clone(),
                baseline_failures: b,
                cdd_failures: c,
                rate: reduction_rate(b as u64, c as u64).ok(),
            });
        }
    }
    Ok(report)
}

fn fmt_p(p: Option<f64>) -> String {
    match p {
        None => "n/a".into(),
        Some(p) if p != 0.0 && p < 1e-4 => format!("{p:.2e}"),
        Some(p) => format!("{p:.4}"),
    }
}

fn fmt_count(n: u64, pct_of: usize) -> String {
    let pct = if pct_of == 0 { 0.0 } else { n as f64 / pct_of as f64 * 100.0 };
    format!("{n} ({})", format_pct(pct))
}

fn fmt_opt3(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.3}"))
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# cddr report");
        if let Some(p) = &self.provenance {
            let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(
                s,
                "# dataset: {} ({}), sample_size {}, limit {}, seed {}",
                p.dataset.as_str(),
                p.dataset_file,
                opt(p.sample_size),
                opt(p.limit),
                p.seed
            );
            let _ = writeln!(s, "# model: {}, sampling {}, mode {}", p.model, p.sampling, p.mode);
            let _ = writeln!(s, "# templates: {}, schema {}", p.templates.join(" "), p.schema_version);
        }
        let _ = writeln!(s, "# records: {}", self.records);

        let _ = writeln!(s, "\n== Correctness ==");
        let _ = writeln!(s, "{:<16} {:<9} {:>6} {:>9} {:>6} {:>6}", "model", "arm", "tasks", "responded", "passed", "failed");
        for c in &self.correctness {
            let _ = writeln!(s, "{:<16} {:<9} {:>6} {:>9} {:>6} {:>6}", c.model, c.arm.as_str(), c.tasks, c.responded, c.passed, c.failed);
        }
        for r in &self.reductions {
            let rate = r.rate.map_or("n/a".to_string(), format_pct);
            let _ = writeln!(s, "reduction {}: {} -> {} failures, {}", r.model, r.baseline_failures, r.cdd_failures, rate);
        }

        let _ = writeln!(s, "\n== Complexity ==");
        let _ = writeln!(
            s,
            "{:<16} {:<9} {:<5} {:>8} {:>16} {:>16} {:>9} {:>16} {:>10} {:>8} {:>7} magnitude",
            "model", "arm", "metric", "measured", "decrease", "increase", "unchanged", "NET", "p", "method", "delta"
        );
        for c in &self.complexity {
            let corpus = self.correctness.iter().find(|k| k.model == c.model && k.arm == c.arm).map_or(0, |k| k.tasks);
            let _ = writeln!(
                s,
                "{:<16} {:<9} {:<5} {:>8} {:>16} {:>16} {:>9} {:>16} {:>10} {:>8} {:>7} {}",
                c.model,
                c.arm.as_str(),
                format!("{:?}", c.metric),
                c.measured,
                fmt_count(c.net.decreases, corpus),
                fmt_count(c.net.increases, corpus),
                c.unchanged,
                format!("{} ({})", c.net.net, format_pct(c.net.net_pct)),
                fmt_p(c.p),
                c.method.map_or("n/a".to_string(), |m| format!("{m:?}").to_lowercase()),
                fmt_opt3(c.delta.map(|d| d.delta)),
                c.delta.map_or("n/a".to_string(), |d| d.magnitude.to_string()),
            );
        }

        let _ = writeln!(s, "\n== Similarity (CodeBLEU) ==");
        let _ = writeln!(s, "{:<16} {:<9} {:>4} {:>7} {:>7} {:>7}", "model", "arm", "n", "q1", "median", "q3");
        for r in &self.similarity {
            let q = r.quartiles;
            let _ = writeln!(
                s,
                "{:<16} {:<9} {:>4} {:>7} {:>7} {:>7}",
                r.model,
                r.arm.as_str(),
                r.n,
                fmt_opt3(q.map(|q| q.q1)),
                fmt_opt3(q.map(|q| q.median)),
                fmt_opt3(q.map(|q| q.q3))
            );
        }

        let _ = writeln!(s, "\n== Error categories (failed refactorings) ==");
        let _ = writeln!(s, "{:<16} {:<9} {:<24} {:>5} {:>5}", "model", "arm", "category", "count", "human");
        for t in &self.taxonomy {
            let _ = writeln!(s, "{:<16} {:<9} {:<24} {:>5} {:>5}", t.model, t.arm.as_str(), t.label.to_string(), t.count, t.human);
        }
        s
    }

    /// Long format: one number per row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |section: &str, model: &str, arm: &str, metric: &str, field: &str, value: String| {
            w.write_record([section, model, arm, metric, field, value.as_str()]).expect("in-memory csv");
        };
        row("section", "model", "arm", "metric", "field", "value".into());
        for c in &self.correctness {
            let arm = c.arm.as_str();
            row("correctness", &c.model, arm, "", "tasks", c.tasks.to_string());
            row("correctness", &c.model, arm, "", "responded", c.responded.to_string());
            row("correctness", &c.model, arm, "", "passed", c.passed.to_string());
            row("correctness", &c.model, arm, "", "failed", c.failed.to_string());
        }
        for r in &self.reductions {
            row("reduction", &r.model, "", "", "rate_pct", r.rate.map_or("".into(), |v| format!("{v:.2}")));
        }
        for c in &self.complexity {
            let (arm, metric) = (c.arm.as_str(), format!("{:?}", c.metric));
            row("complexity", &c.model, arm, &metric, "measured", c.measured.to_string());
            row("complexity", &c.model, arm, &metric, "decrease", c.net.decreases.to_string());
            row("complexity", &c.model, arm, &metric, "increase", c.net.increases.to_string());
            row("complexity", &c.model, arm, &metric, "unchanged", c.unchanged.to_string());
            row("complexity", &c.model, arm, &metric, "net", c.net.net.to_string());
            row("complexity", &c.model, arm, &metric, "net_pct", format!("{:.2}", c.net.net_pct));
            row("complexity", &c.model, arm, &metric, "p", c.p.map_or("".into(), |p| format!("{p:.6}")));
            row("complexity", &c.model, arm, &metric, "delta", c.delta.map_or("".into(), |d| format!("{:.6}", d.delta)));
            row("complexity", &c.model, arm, &metric, "magnitude", c.delta.map_or("".into(), |d| d.magnitude.to_string()));
        }
        for r in &self.similarity {
            let arm = r.arm.as_str();
            row("similarity", &r.model, arm, "codebleu", "n", r.n.to_string());
            for (field, v) in [
                ("q1", r.quartiles.map(|q| q.q1)),
                ("median", r.quartiles.map(|q| q.median)),
                ("q3", r.quartiles.map(|q| q.q3)),
            ] {
                row("similarity", &r.model, arm, "codebleu", field, v.map_or("".into(), |v| format!("{v:.6}")));
            }
        }
        for t in &self.taxonomy {
            row("taxonomy", &t.model, t.arm.as_str(), &t.label.to_string(), "count", t.count.to_string());
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}
