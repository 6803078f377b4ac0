//! Writes the 10-task replay corpus: `tasks.jsonl` (MBPP layout), `responses.jsonl`
//! (recorded responses keyed by prompt digest) and `replay.toml`.
//!
//! cargo run --example build_replay_fixtures -- [out_dir]
//!
//! Known outcomes: the baseline arm fails on parallel_lines, circle_area, avg,
//! fizzbuzz and sum_digits; the cdd arm fails on count_vowels. Everything else passes.

use std::fs;
use std::path::PathBuf;

use cdd_refactor::refactor::{build_prompt, prompt_digest, Arm, FixtureEntry, ModelConfig};

struct Task {
    id: u32,
    text: &'static str,
    code: &'static str,
    tests: &'static [&'static str],
    baseline: &'static str,
    cdd: &'static str,
}

const TASKS: &[Task] = &[
    Task {
        id: 1,
        text: "Write a function to find the n-th even number.",
        code: "def nth_even(n):\n    if n==1:\n        return 0\n    if n==2:\n        return 2\n    if n==3:\n        return 4\n    else:\n        return n*2-2\n",
        tests: &["assert nth_even(1) == 0", "assert nth_even(3) == 4", "assert nth_even(10) == 18"],
        baseline: "def nth_even(n):\n    \"\"\"Return the n-th even number, starting from 0.\"\"\"\n    if n < 1:\n        raise ValueError(\"n must be a positive number\")\n    return (n - 1) * 2\n",
        cdd: "def nth_even(n):\n    return (n - 1) * 2\n",
    },
    Task {
        id: 2,
        text: "Write a function to check whether a number is prime.",
        code: "def is_prime(n):\n    if n <= 1:\n        return False\n    else:\n        i = 2\n        while i < n:\n            if n % i == 0:\n                return False\n            else:\n                i += 1\n        return True\n",
        tests: &["assert is_prime(1) == False", "assert is_prime(2) == True", "assert is_prime(9) == False", "assert is_prime(13) == True"],
        baseline: "def is_prime(n):\n    if n <= 1:\n        return False\n    return all(n % i != 0 for i in range(2, n))\n",
        cdd: "def is_prime(n):\n    if n <= 1:\n        return False\n    i = 2\n    while i < n:\n        if n % i == 0:\n            return False\n        i += 1\n    return True\n",
    },
    Task {
        id: 3,
        text: "Write a python function to check whether two given lines are parallel or not.",
        code: "def parallel_lines(line1, line2):\n    return line1[0]/line1[1] == line2[0]/line2[1]\n",
        tests: &[
            "assert parallel_lines([2,3,4], [2,3,8]) == True",
            "assert parallel_lines([2,3,4], [4,-3,8]) == False",
            "assert parallel_lines([3,3],[5,5]) == True",
        ],
        baseline: "def parallel_lines(line1, line2):\n    n1, d1 = line1\n    n2, d2 = line2\n    # Both lines have vertical slope ( undefined ): considered parallel\n    if d1 == 0 and d2 == 0:\n        return True\n    # One vertical, the other not: not parallel\n    if d1 == 0 or d2 == 0:\n        return False\n    # Compare slopes without floating point precision issues : n1/d1 == n2/d2\n    return n1 * d2 == n2 * d1\n",
        cdd: "def parallel_lines(line1, line2):\n    return line1[0]/line1[1] == line2[0]/line2[1]\n",
    },
    Task {
        id: 4,
        text: "Write a function to find the area of a circle.",
        code: "def circle_area(r):\n    area = 3.14 * r * r\n    return area\n",
        tests: &["assert circle_area(2) == 12.56", "assert circle_area(1) == 3.14", "assert circle_area(0) == 0"],
        baseline: "import math\n\n\ndef circle_area(r):\n    return math.pi * r ** 2\n",
        cdd: "def circle_area(r):\n    return 3.14 * r * r\n",
    },
    Task {
        id: 5,
        text: "Write a function named avg that adds two numbers.",
        code: "def avg(a, b):\n    return a + b\n",
        tests: &["assert avg(2, 3) == 5", "assert avg(-1, 1) == 0"],
        baseline: "def avg(a, b):\n    \"\"\"Return the average of a and b.\"\"\"\n    return (a + b) / 2\n",
        cdd: "def avg(a, b):\n    return a + b\n",
    },
    Task {
        id: 6,
        text: "Write a function that returns Fizz, Buzz, FizzBuzz or the number itself.",
        code: "def fizzbuzz(n):\n    if n % 15 == 0:\n        return \"FizzBuzz\"\n    elif n % 3 == 0:\n        return \"Fizz\"\n    elif n % 5 == 0:\n        return \"Buzz\"\n    else:\n        return str(n)\n",
        tests: &["assert fizzbuzz(15) == \"FizzBuzz\"", "assert fizzbuzz(9) == \"Fizz\"", "assert fizzbuzz(7) == \"7\""],
        baseline: "def fizz_buzz(number):\n    if number % 15 == 0:\n        return \"FizzBuzz\"\n    if number % 3 == 0:\n        return \"Fizz\"\n    if number % 5 == 0:\n        return \"Buzz\"\n    return str(number)\n",
        cdd: "def fizzbuzz(n):\n    if n % 15 == 0:\n        return \"FizzBuzz\"\n    if n % 3 == 0:\n        return \"Fizz\"\n    if n % 5 == 0:\n        return \"Buzz\"\n    return str(n)\n",
    },
    Task {
        id: 7,
        text: "Write a function to count the vowels in a string.",
        code: "def count_vowels(s):\n    count = 0\n    for ch in s.lower():\n        if ch in \"aeiou\":\n            count += 1\n    return count\n",
        tests: &["assert count_vowels(\"Hello\") == 2", "assert count_vowels(\"AEIOU xyz\") == 5", "assert count_vowels(\"\") == 0"],
        baseline: "def count_vowels(s):\n    return sum(1 for ch in s.lower() if ch in \"aeiou\")\n",
        cdd: "def count_vowels(s):\n    count = 0\n    for ch in s:\n        if ch in \"aeiou\":\n            count += 1\n    return count\n",
    },
    Task {
        id: 8,
        text: "Write a function to find the maximum of three numbers.",
        code: "def max_of_three(a, b, c):\n    if a >= b:\n        if a >= c:\n            return a\n        else:\n            return c\n    else:\n        if b >= c:\n            return b\n        else:\n            return c\n",
        tests: &["assert max_of_three(1, 2, 3) == 3", "assert max_of_three(5, 2, 3) == 5", "assert max_of_three(1, 9, 3) == 9"],
        baseline: "def max_of_three(a, b, c):\n    return max(a, b, c)\n",
        cdd: "def max_of_three(a, b, c):\n    largest = a\n    if b > largest:\n        largest = b\n    if c > largest:\n        largest = c\n    return largest\n",
    },
    Task {
        id: 9,
        text: "Write a function to get the sum of the digits of a non-negative integer.",
        code: "def sum_digits(n):\n    total = 0\n    while n > 0:\n        total += n % 10\n        n = n // 10\n    return total\n",
        tests: &["assert sum_digits(345) == 12", "assert sum_digits(10) == 1", "assert sum_digits(-5) == 0"],
        baseline: "def sum_digits(n):\n    if n < 0:\n        raise ValueError(\"n must be non-negative\")\n    total = 0\n    while n > 0:\n        total += n % 10\n        n //= 10\n    return total\n",
        cdd: "def sum_digits(n):\n    total = 0\n    while n > 0:\n        total += n % 10\n        n = n // 10\n    return total\n",
    },
    Task {
        id: 10,
        text: "Write a function to convert a score to a letter grade.",
        code: "def grade(score):\n    if score >= 90:\n        return \"A\"\n    elif score >= 80:\n        return \"B\"\n    elif score >= 70:\n        return \"C\"\n    else:\n        return \"F\"\n",
        tests: &["assert grade(95) == \"A\"", "assert grade(85) == \"B\"", "assert grade(72) == \"C\"", "assert grade(10) == \"F\""],
        baseline: "def grade(score):\n    \"\"\"Map a numeric score to a letter grade.\"\"\"\n    for threshold, letter in ((90, \"A\"), (80, \"B\"), (70, \"C\")):\n        if score >= threshold:\n            return letter\n    return \"F\"\n",
        cdd: "def grade(score):\n    if score >= 90:\n        return \"A\"\n    if score >= 80:\n        return \"B\"\n    if score >= 70:\n        return \"C\"\n    return \"F\"\n",
    },
];

/// Wraps code the way chat models usually answer; a few answers skip the fence.
fn response(code: &str, i: usize) -> String {
    match i % 3 {
        0 => format!("Here is the refactored code:\n\n```python\n{code}```\n\nThe behavior is unchanged."),
        1 => format!("```python\n{code}```"),
        _ => format!("Refactored version:\n\n{code}"),
    }
}

fn main() -> std::io::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay")
    });
    fs::create_dir_all(&out)?;
    let model = ModelConfig::default().model;

    let mut tasks = String::new();
    let mut responses = String::new();
    for (i, t) in TASKS.iter().enumerate() {
        let row = serde_json::json!({
            "task_id": t.id,
            "text": t.text,
            "code": t.code,
            "test_list": t.tests,
            "test_setup_code": "",
        });
        tasks.push_str(&row.to_string());
        tasks.push('\n');
        for (arm, code) in [(Arm::Baseline, t.baseline), (Arm::Cdd, t.cdd)] {
            let prompt = build_prompt(arm, t.code);
            let entry = FixtureEntry { digest: prompt_digest(&prompt, &model), model: model.clone(), response: response(code, i) };
            responses.push_str(&serde_json::to_string(&entry).expect("entries serialize"));
            responses.push('\n');
        }
    }
    fs::write(out.join("tasks.jsonl"), tasks)?;
    fs::write(out.join("responses.jsonl"), responses)?;
    fs::write(
        out.join("replay.toml"),
        "replay = true\nfixtures = \"responses.jsonl\"\noutput_dir = \"run\"\nworkers = 2\nseed = 0\n\n[dataset]\ntag = \"mbpp\"\npath = \"tasks.jsonl\"\n\n[sandbox]\ntimeout_secs = 10.0\n",
    )?;
    println!("wrote {} tasks and {} responses to {}", TASKS.len(), TASKS.len() * 2, out.display());
    Ok(())
}
