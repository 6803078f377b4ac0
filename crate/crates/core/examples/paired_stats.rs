//! Paired before/after complexity scores through the Wilcoxon signed-rank test,
//! Cliff's delta and quartiles.
//!
//! cargo run --example paired_stats

use cdd_refactor::stats::{format_pct, net_effect, paired_summary, PairedSample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let before = [4.0, 5.0, 2.0, 7.0, 3.0, 6.0, 1.0, 4.0, 9.0, 2.0];
    let after = [0.0, 2.0, 2.0, 3.0, 3.0, 4.0, 1.0, 1.0, 5.0, 3.0];
    let sample: PairedSample = before.iter().copied().zip(after.iter().copied()).collect();
    let s = paired_summary(&sample)?;
    println!("pairs      {}", s.n_pairs);
    println!("wilcoxon   p = {:.4} ({:?}, n = {})", s.wilcoxon.p, s.wilcoxon.method, s.wilcoxon.n_effective);
    println!("cliff      {:.3} ({})", s.cliffs.delta, s.cliffs.magnitude);
    println!("before     q1 {} median {} q3 {}", s.before.q1, s.before.median, s.before.q3);
    println!("after      q1 {} median {} q3 {}", s.after.q1, s.after.median, s.after.q3);

    let down = sample.pairs.iter().filter(|(b, a)| a < b).count() as u64;
    let up = sample.pairs.iter().filter(|(b, a)| a > b).count() as u64;
    let net = net_effect(down, up, sample.len() as u64);
    println!("net        {} ({})", net.net, format_pct(net.net_pct));
    Ok(())
}
