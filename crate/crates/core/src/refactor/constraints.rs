use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::source::ast::{Block, Span, Stmt, StmtKind};
use crate::source::{extract_signature, parse, tokenize, ParsedUnit, SourceError, SourceUnit, TokenClass, TokenStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    SignatureChanged,
    EntryFunctionRenamed,
    NumericLiteralDrift,
    StringCaseDrift,
    StringLiteralDrift,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintViolation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

/// Checks the exact-signature, exact-number and exact-string rules.
///
/// Only the original must parse. An unparseable refactoring skips the
/// signature checks, and one that cannot even be tokenized skips the literal checks.
pub fn check_constraints(
    original: &SourceUnit,
    refactored: &SourceUnit,
    entry_point: Option<&str>,
) -> Result<Vec<ConstraintViolation>, SourceError> {
    let orig = parse(original)?;
    let mut out = Vec::new();
    if let Ok(refd) = parse(refactored) {
        check_signatures(&orig, &refd, entry_point, &mut out);
    }
    if let Ok(ref_tokens) = tokenize(refactored) {
        let refd_docs = parse(refactored).map(|p| docstring_spans(&p.module.body)).unwrap_or_default();
        check_numbers(orig.tokens(), &ref_tokens, &mut out);
        check_strings(
            &string_contents(orig.tokens(), &docstring_spans(&orig.module.body)),
            &string_contents(&ref_tokens, &refd_docs),
            &mut out,
        );
    }
    Ok(out)
}

fn check_signatures(orig: &ParsedUnit, refd: &ParsedUnit, entry: Option<&str>, out: &mut Vec<ConstraintViolation>) {
    if let Some(entry) = entry {
        if refd.function(entry).is_none() {
            let names: Vec<&str> = refd.functions.iter().filter(|f| !f.is_synthetic_toplevel).map(|f| f.name.as_str()).collect();
            out.push(ConstraintViolation {
                kind: ViolationKind::EntryFunctionRenamed,
                detail: format!("entry point `{entry}` is missing; refactored defines {names:?}"),
            });
        }
    }
    for f in orig.functions.iter().filter(|f| !f.is_synthetic_toplevel) {
        let want = extract_signature(f);
        let same_named: Vec<_> = refd.functions.iter().filter(|g| g.name == f.name).map(extract_signature).collect();
        if same_named.is_empty() {
            if Some(f.name.as_str()) != entry {
                out.push(ConstraintViolation {
                    kind: ViolationKind::SignatureChanged,
                    detail: format!("original `{want}` has no function of that name in the refactored code"),
                });
            }
        } else if !same_named.contains(&want) {
            let got: Vec<String> = same_named.iter().map(|s| s.to_string()).collect();
            out.push(ConstraintViolation {
                kind: ViolationKind::SignatureChanged,
                detail: format!("original `{want}` became `{}`", got.join("`, `")),
            });
        }
    }
}

fn check_numbers(orig: &TokenStream, refd: &TokenStream, out: &mut Vec<ConstraintViolation>) {
    let count = |ts: &TokenStream| {
        let mut m: BTreeMap<String, usize> = BTreeMap::new();
        for t in ts.tokens.iter().filter(|t| t.class == TokenClass::LiteralNumber) {
            *m.entry(t.lexeme.clone()).or_default() += 1;
        }
        m
    };
    let (a, b) = (count(orig), count(refd));
    for (lexeme, n) in &a {
        let have = b.get(lexeme).copied().unwrap_or(0);
        if have < *n {
            let refactored: Vec<&String> = b.keys().collect();
            out.push(ConstraintViolation {
                kind: ViolationKind::NumericLiteralDrift,
                detail: format!(
                    "original literal {lexeme} occurs {n}x, refactored {have}x; refactored numeric literals: {refactored:?}"
                ),
            });
        }
    }
}

fn check_strings(orig: &BTreeSet<String>, refd: &BTreeSet<String>, out: &mut Vec<ConstraintViolation>) {
    for s in orig {
        if refd.contains(s) {
            continue;
        }
        let lower = s.to_lowercase();
        match refd.iter().find(|r| r.to_lowercase() == lower) {
            Some(r) => out.push(ConstraintViolation {
                kind: ViolationKind::StringCaseDrift,
                detail: format!("original string {s:?} appears as {r:?} in the refactored code"),
            }),
            None => out.push(ConstraintViolation {
                kind: ViolationKind::StringLiteralDrift,
                detail: format!("original string {s:?} does not appear in the refactored code"),
            }),
        }
    }
}

/// Spans of leading string statements of the module, classes and functions.
fn docstring_spans(body: &Block) -> Vec<Span> {
    fn scope(block: &Block, spans: &mut Vec<Span>) {
        if let Some(first) = block.first().filter(|s| s.is_docstring()) {
            spans.push(first.span.clone());
        }
        block.iter().for_each(|s| visit(s, spans));
    }
    fn visit(stmt: &Stmt, spans: &mut Vec<Span>) {
        match &stmt.kind {
            StmtKind::FunctionDef(def) => scope(&def.body, spans),
            StmtKind::ClassDef { body, .. } => scope(body, spans),
            _ => stmt.blocks().into_iter().flatten().for_each(|s| visit(s, spans)),
        }
    }
    let mut spans = Vec::new();
    scope(body, &mut spans);
    spans
}

/// Inner text of every non-docstring string literal.
fn string_contents(ts: &TokenStream, docstrings: &[Span]) -> BTreeSet<String> {
    ts.tokens
        .iter()
        .filter(|t| t.class == TokenClass::LiteralString)
        .filter(|t| !docstrings.iter().any(|s| s.contains(&t.start)))
        .map(|t| string_inner(&t.lexeme).to_string())
        .collect()
}

pub fn string_inner(lexeme: &str) -> &str {
    let body = lexeme.trim_start_matches(|c: char| c.is_ascii_alphabetic());
    for q in ["\"\"\"", "'''", "\"", "'"] {
        if body.len() >= 2 * q.len() && body.starts_with(q) && body.ends_with(q) {
            return &body[q.len()..body.len() - q.len()];
        }
    }
    body
}
