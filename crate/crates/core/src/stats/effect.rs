use std::fmt;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        })
    }
}

pub const SMALL_AT: f64 = 0.147;
pub const MEDIUM_AT: f64 = 0.33;
pub const LARGE_AT: f64 = 0.474;

pub fn magnitude(delta: f64) -> Magnitude {
    let d = delta.abs();
    if d < SMALL_AT {
        Magnitude::Negligible
    } else if d < MEDIUM_AT {
        Magnitude::Small
    } else if d < LARGE_AT {
        Magnitude::Medium
    } else {
        Magnitude::Large
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffsDelta {
    pub delta: f64,
    pub magnitude: Magnitude,
}

/// `(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)`.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<CliffsDelta, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted_b = b.to_vec();
    sorted_b.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for x in a {
        let less = sorted_b.partition_point(|y| y < x) as i64;
        let not_greater = sorted_b.partition_point(|y| y <= x) as i64;
        let greater = sorted_b.len() as i64 - not_greater;
        dominance += less - greater;
    }
    let delta = dominance as f64 / (a.len() as f64 * b.len() as f64);
    Ok(CliffsDelta { delta, magnitude: magnitude(delta) })
}

/// Relative drop in failures, in percent.
pub fn reduction_rate(baseline_failures: u64, treated_failures: u64) -> Result<f64, StatsError> {
    if baseline_failures == 0 {
        return Err(StatsError::UndefinedRate);
    }
    Ok((baseline_failures as f64 - treated_failures as f64) / baseline_failures as f64 * 100.0)
}

/// Two-decimal percentage, e.g. `71.79%`.
pub fn format_pct(value: f64) -> String {
    let s = format!("{value:.2}");
    // Avoid printing "-0.00".
    if s == "-0.00" {
        "0.00%".into()
    } else {
        format!("{s}%")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetEffect {
    pub decreases: u64,
    pub increases: u64,
    pub net: i64,
    /// Percent of the corpus.
    pub net_pct: f64,
}

pub fn net_effect(decreases: u64, increases: u64, corpus_size: u64) -> NetEffect {
    debug_assert!(decreases + increases <= corpus_size, "more changes than corpus entries");
    let net = decreases as i64 - increases as i64;
    let net_pct = if corpus_size == 0 { 0.0 } else { net as f64 / corpus_size as f64 * 100.0 };
    NetEffect { decreases, increases, net, net_pct }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Inclusive linear-interpolation quantile (`h = (n - 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quartile_summary(values: &[f64]) -> Result<Quartiles, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(Quartiles { q1: quantile(&v, 0.25), median: quantile(&v, 0.5), q3: quantile(&v, 0.75) })
}
