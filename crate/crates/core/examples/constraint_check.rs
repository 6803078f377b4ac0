//! Runs the signature, number and string checks over a few typical model edits.
//!
//! cargo run --example constraint_check

use cdd_refactor::refactor::check_constraints;
use cdd_refactor::source::SourceUnit;

const CASES: &[(&str, &str, &str)] = &[
    ("avg", "def avg(a, b):\n    return a + b\n", "def avg(a, b, precision=0):\n    return round(a + b, precision)\n"),
    (
        "circle_area",
        "def circle_area(r):\n    return 3.14 * r * r\n",
        "import math\n\ndef circle_area(r):\n    return math.pi * r ** 2\n",
    ),
    (
        "fizzbuzz",
        "def fizzbuzz(n):\n    if n % 15 == 0:\n        return \"fizzbuzz\"\n    return str(n)\n",
        "def fizzbuzz(n):\n    if n % 15 == 0:\n        return \"FizzBuzz\"\n    return str(n)\n",
    ),
    ("nth_even", "def nth_even(n):\n    return (n - 1) * 2\n", "def get_nth_even(n):\n    return 2 * (n - 1)\n"),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (entry, before, after) in CASES {
        let violations = check_constraints(&SourceUnit::original(*entry, *before), &SourceUnit::refactored(*entry, *after), Some(entry))?;
        println!("{entry}:");
        if violations.is_empty() {
            println!("  ok");
        }
        for v in violations {
            println!("  {v}");
        }
    }
    Ok(())
}
