//! Scores a refactoring against its original with CodeBLEU and prints each component.
//!
//! cargo run --example codebleu

use cdd_refactor::similarity::{codebleu, CodeBleuWeights};
use cdd_refactor::source::SourceUnit;

const ORIGINAL: &str = "def nth_even(n):\n    if n==1:\n        return 0\n    if n==2:\n        return 2\n    if n==3:\n        return 4\n    else:\n        return n*2-2\n";

const CANDIDATES: &[(&str, &str)] = &[
    ("identical", ORIGINAL),
    ("closed form", "def nth_even(n):\n    return (n - 1) * 2\n"),
    ("renamed", "def nth_even(k):\n    if k==1:\n        return 0\n    if k==2:\n        return 2\n    if k==3:\n        return 4\n    else:\n        return k*2-2\n"),
    ("empty", ""),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weights = CodeBleuWeights::default();
    let original = SourceUnit::original("nth_even", ORIGINAL);
    println!("{:<12} {:>6} {:>6} {:>8} {:>6} {:>8}", "candidate", "total", "ngram", "weighted", "syntax", "dataflow");
    for (label, text) in CANDIDATES {
        let s = codebleu(&original, &SourceUnit::refactored(*label, *text), &weights)?;
        let c = s.components;
        println!(
            "{label:<12} {:>6.3} {:>6.3} {:>8.3} {:>6.3} {:>8.3}",
            s.total, c.ngram, c.weighted_ngram, c.syntax, c.dataflow
        );
    }
    Ok(())
}
