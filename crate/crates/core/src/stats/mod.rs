//! Dataset loading and paired before/after statistics.

mod datasets;
mod effect;
mod wilcoxon;

use serde::{Deserialize, Serialize};

pub use datasets::{
    load_apps_introductory, load_mbpp, py_literal, validate_references, Adapters, DatasetRecord, DatasetTag,
};
pub use effect::{
    cliffs_delta, format_pct, magnitude, net_effect, quantile, quartile_summary, reduction_rate, CliffsDelta,
    Magnitude, NetEffect, Quartiles, LARGE_AT, MEDIUM_AT, SMALL_AT,
};
pub use wilcoxon::{midranks, wilcoxon_signed_rank, wilcoxon_with_cutoff, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("reduction rate undefined: baseline has no failures")]
    UndefinedRate,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("requested {wanted} records but only {available} are available")]
    InsufficientRecords { wanted: usize, available: usize },
    #[error("{0}")]
    Io(String),
}

/// `(before, after)` per program.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub pairs: Vec<(f64, f64)>,
}

impl PairedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        PairedSample { pairs }
    }

    pub fn before(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn after(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl FromIterator<(f64, f64)> for PairedSample {
    fn from_iter<I: IntoIterator<Item = (f64, f64)>>(iter: I) -> Self {
        PairedSample { pairs: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub n_pairs: usize,
    pub wilcoxon: WilcoxonResult,
    /// Cliff's delta of `before` against `after`: positive when values went down.
    pub cliffs: CliffsDelta,
    pub before: Quartiles,
    pub after: Quartiles,
}

pub fn paired_summary(sample: &PairedSample) -> Result<StatSummary, StatsError> {
    let before = sample.before();
    let after = sample.after();
    Ok(StatSummary {
        n_pairs: sample.len(),
        wilcoxon: wilcoxon_signed_rank(sample)?,
        cliffs: cliffs_delta(&before, &after)?,
        before: quartile_summary(&before)?,
        after: quartile_summary(&after)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn five_positive_shifts_exact() {
        let s: PairedSample = (1..=5).map(|i| (0.0, i as f64)).collect();
        let r = wilcoxon_signed_rank(&s).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_relative_eq!(r.p, 0.0625, epsilon = 1e-12);
        assert_eq!((r.w_plus, r.w_minus), (15.0, 0.0));
    }

    /// Enumerates every sign vector directly.
    fn brute_force_p(diffs: &[f64]) -> f64 {
        let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
        let mut abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
        abs.sort_by(f64::total_cmp);
        let rank_of = |x: f64| {
            let lo = abs.iter().position(|a| *a == x).unwrap();
            let hi = abs.iter().rposition(|a| *a == x).unwrap();
            (lo + hi) as f64 / 2.0 + 1.0
        };
        let ranks: Vec<f64> = nz.iter().map(|d| rank_of(d.abs())).collect();
        let observed: f64 = nz.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let n = ranks.len();
        let (mut le, mut ge) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            le += (w <= observed + 1e-9) as u64;
            ge += (w >= observed - 1e-9) as u64;
        }
        (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
    }

    #[test]
    fn exact_matches_enumeration_with_ties_and_zeros() {
        let before = [5.0, 3.0, 4.0, 7.0, 2.0, 6.0, 3.0, 9.0, 4.0, 4.0];
        let after = [3.0, 3.0, 2.0, 4.0, 3.0, 4.0, 1.0, 5.0, 4.0, 3.0];
        let s: PairedSample = before.iter().copied().zip(after.iter().copied()).collect();
        let diffs: Vec<f64> = s.pairs.iter().map(|(b, a)| a - b).collect();
        let r = wilcoxon_signed_rank(&s).unwrap();
        assert_eq!(r.n_effective, 8);
        assert_relative_eq!(r.p, brute_force_p(&diffs), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_and_empty() {
        let s: PairedSample = (0..4).map(|i| (i as f64, i as f64)).collect();
        let r = wilcoxon_signed_rank(&s).unwrap();
        assert_eq!((r.method, r.p), (WilcoxonMethod::Degenerate, 1.0));
        assert_eq!(wilcoxon_signed_rank(&PairedSample::default()), Err(StatsError::EmptySample));
    }

    #[test]
    fn cliffs_hand_values() {
        let d = cliffs_delta(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(d.delta, -5.0 / 9.0, epsilon = 1e-12);
        assert_eq!(d.magnitude, Magnitude::Large);
        assert_eq!(magnitude(0.146), Magnitude::Negligible);
        assert_eq!(magnitude(-0.147), Magnitude::Small);
        assert_eq!(magnitude(0.33), Magnitude::Medium);
        assert_eq!(magnitude(0.474), Magnitude::Large);
        assert_eq!(cliffs_delta(&[], &[1.0]), Err(StatsError::EmptySample));
    }

    #[test]
    fn quartiles_inclusive() {
        let q = quartile_summary(&[7.0, 1.0, 3.0, 5.0]).unwrap();
        // h = 3p: 0.75 -> 1 + 0.75*2, 1.5 -> 3 + 0.5*2, 2.25 -> 5 + 0.25*2
        assert_eq!((q.q1, q.median, q.q3), (2.5, 4.0, 5.5));
        let one = quartile_summary(&[4.0]).unwrap();
        assert_eq!((one.q1, one.median, one.q3), (4.0, 4.0, 4.0));
    }

    #[test]
    fn rates_and_net_effect() {
        assert_eq!(format_pct(reduction_rate(39, 11).unwrap()), "71.79%");
        assert_eq!(reduction_rate(0, 0), Err(StatsError::UndefinedRate));
        assert_eq!(format_pct(reduction_rate(5, 5).unwrap()), "0.00%");
        assert_eq!(format_pct(-0.001), "0.00%");
        let e = net_effect(30, 10, 200);
        assert_eq!((e.net, e.net_pct), (20, 10.0));
        assert_eq!(net_effect(1, 3, 10).net, -2);
    }

    #[test]
    fn summary_reports_reductions_as_positive_delta() {
        let s: PairedSample = [(4.0, 1.0), (5.0, 2.0), (3.0, 3.0), (6.0, 2.0)].into_iter().collect();
        let sum = paired_summary(&s).unwrap();
        assert!(sum.cliffs.delta > 0.0);
        assert_eq!(sum.n_pairs, 4);
        assert_eq!(sum.wilcoxon.w_plus, 0.0);
    }
}
