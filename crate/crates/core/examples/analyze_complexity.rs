//! Prints ICP, CC and CogC for every function in a Python file, plus the
//! control constructs each one was scored from.
//!
//! cargo run --example analyze_complexity -- [file.py]

use cdd_refactor::metrics::unit_report;
use cdd_refactor::source::{parse_functions, SourceUnit};

const NESTED_IS_PRIME: &str = "\
def is_prime(n):
    if n <= 1:
        return False
    else:
        i = 2
        while i < n:
            if n % i == 0:
                return False
            else:
                i += 1
        return True
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (name, text) = match std::env::args().nth(1) {
        Some(path) => (path.clone(), std::fs::read_to_string(&path)?),
        None => ("is_prime".to_string(), NESTED_IS_PRIME.to_string()),
    };
    let unit = SourceUnit::original(name, text);
    print!("{}", unit_report(&unit)?);
    for f in parse_functions(&unit)? {
        println!("\n{}:", f.name);
        for c in &f.constructs {
            println!("  {:<16} depth {}", format!("{:?}", c.kind), c.depth);
        }
    }
    Ok(())
}
