use crate::source::looks_like_source;

/// Pulls the refactored program out of a model response: the last fenced block,
/// else the longest run of lines that parses as source, else `None`.
pub fn extract_code(response: &str) -> Option<String> {
    if let Some(block) = fenced_blocks(response).into_iter().rev().find(|b| !b.trim().is_empty()) {
        return Some(finish(&dedent(&block)));
    }
    longest_source_run(response).map(|s| finish(&s))
}

fn fenced_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<(String, String)> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        match current.take() {
            None => {
                if trimmed.starts_with("```") {
                    current = Some((line[..line.len() - trimmed.len()].to_string(), String::new()));
                }
            }
            Some((indent, mut body)) => {
                if trimmed.starts_with("```") && trimmed.trim_end().trim_start_matches('`').is_empty() {
                    blocks.push(body);
                } else {
                    body.push_str(line.strip_prefix(indent.as_str()).unwrap_or(line));
                    body.push('\n');
                    current = Some((indent, body));
                }
            }
        }
    }
    if let Some((_, body)) = current {
        blocks.push(body);
    }
    blocks
}

fn dedent(text: &str) -> String {
    let margin = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.len() - l.trim_start().len())
        .min()
        .unwrap_or(0);
    text.lines()
        .map(|l| l.get(margin..).unwrap_or_else(|| l.trim_start()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn finish(code: &str) -> String {
    let trimmed = code.trim_matches('\n');
    format!("{}\n", trimmed.trim_end())
}

fn longest_source_run(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let starts: Vec<usize> =
        (0..lines.len()).filter(|&i| !lines[i].trim().is_empty() && !lines[i].starts_with([' ', '\t'])).collect();
    let mut best: Option<(usize, String)> = None;
    for &s in &starts {
        for e in (s..lines.len()).rev() {
            if lines[e].trim().is_empty() {
                continue;
            }
            let len = e - s + 1;
            if best.as_ref().is_some_and(|(l, _)| *l >= len) {
                break;
            }
            let candidate = lines[s..=e].join("\n") + "\n";
            if looks_like_source(&candidate) {
                best = Some((len, candidate));
                break;
            }
        }
    }
    best.map(|(_, s)| s)
}
