use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{TestOutcome, Verdict};
use crate::refactor::{RefactorRecord, ViolationKind};
use crate::source::ast::{Block, Expr, ExprKind, Stmt, StmtKind};
use crate::source::parse_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorLabel {
    LogicAlteration,
    SmallValueDiscrepancy,
    FunctionSignatureChange,
    ConditionalLogicIssue,
    Miscellaneous,
}

impl ErrorLabel {
    pub const ALL: [ErrorLabel; 5] = [
        ErrorLabel::LogicAlteration,
        ErrorLabel::SmallValueDiscrepancy,
        ErrorLabel::FunctionSignatureChange,
        ErrorLabel::ConditionalLogicIssue,
        ErrorLabel::Miscellaneous,
    ];
}

impl fmt::Display for ErrorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Heuristic,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorCategory {
    pub label: ErrorLabel,
    pub source: LabelSource,
}

impl ErrorCategory {
    fn heuristic(label: ErrorLabel) -> Self {
        ErrorCategory { label, source: LabelSource::Heuristic }
    }
}

const SMALL_RELATIVE_ERROR: f64 = 1e-2;

const MISC_EXCEPTIONS: [&str; 6] =
    ["NameError", "UnboundLocalError", "SyntaxError", "IndentationError", "ImportError", "ModuleNotFoundError"];

/// Heuristic label for a refactoring that did not pass. Rules apply in order:
/// unusable output, signature, small value, added guard, interpreter-level error, logic.
/// A numeric-literal violation counts as a small value only when the tests got a wrong answer.
pub fn classify_failure(original: &str, record: &RefactorRecord, outcome: &TestOutcome) -> ErrorCategory {
    use ErrorLabel::*;
    let Some(code) = record.extracted_code.as_deref() else {
        return ErrorCategory::heuristic(Miscellaneous);
    };
    let Ok(refactored) = parse_text(code) else {
        return ErrorCategory::heuristic(Miscellaneous);
    };
    if outcome.verdict == Verdict::SetupError {
        return ErrorCategory::heuristic(Miscellaneous);
    }
    let has = |k: ViolationKind| record.violations.iter().any(|v| v.kind == k);
    if has(ViolationKind::SignatureChanged) || has(ViolationKind::EntryFunctionRenamed) {
        return ErrorCategory::heuristic(FunctionSignatureChange);
    }
    // Literal drift only explains wrong values, not a crash.
    let drift = has(ViolationKind::NumericLiteralDrift) && outcome.verdict == Verdict::Fail;
    let small = outcome.numeric.is_some_and(|m| m.relative_error() < SMALL_RELATIVE_ERROR);
    if drift || small {
        return ErrorCategory::heuristic(SmallValueDiscrepancy);
    }
    if let Some(exc) = &outcome.exception_type {
        let before = parse_text(original).map(|p| raised_types(&p.module.body)).unwrap_or_default();
        let after = raised_types(&refactored.module.body);
        let added = after.get(exc).copied().unwrap_or(0) > before.get(exc).copied().unwrap_or(0);
        if added {
            return ErrorCategory::heuristic(ConditionalLogicIssue);
        }
        if MISC_EXCEPTIONS.contains(&exc.as_str()) {
            return ErrorCategory::heuristic(Miscellaneous);
        }
    }
    ErrorCategory::heuristic(LogicAlteration)
}

/// Exception class name -> number of `raise` statements naming it.
fn raised_types(body: &Block) -> BTreeMap<String, usize> {
    fn class_name(e: &Expr) -> Option<String> {
        match &e.kind {
            ExprKind::Name(n) => Some(n.clone()),
            ExprKind::Attribute { attr, .. } => Some(attr.clone()),
            ExprKind::Call { func, .. } => class_name(func),
            _ => None,
        }
    }
    fn walk(stmts: &[Stmt], out: &mut BTreeMap<String, usize>) {
        for s in stmts {
            if let StmtKind::Raise { exc: Some(e), .. } = &s.kind {
                if let Some(name) = class_name(e) {
                    *out.entry(name).or_default() += 1;
                }
            }
            for b in s.blocks() {
                walk(b, out);
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(body, &mut out);
    out
}
