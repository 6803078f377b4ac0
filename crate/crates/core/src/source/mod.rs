//! Structural representation of object-language (Python) source.
//!
//! [`parse`] turns a [`SourceUnit`] into a [`ParsedUnit`]: the token stream, the
//! syntax tree, and one [`FunctionUnit`] per function. Statements outside any
//! function are gathered into a synthetic top-level unit so script-style
//! programs still get metrics.

pub mod ast;
mod defuse;
mod fingerprint;
pub mod lexer;
mod parser;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use defuse::{extract_def_use, normalized_pairs, DefUsePair, NormalizedPair};
pub use fingerprint::{subtree_multiset, syntax_tree, unit_subtree_multiset, SubtreeMultiset, SyntaxNode, SUBTREE_DEPTH};
pub use lexer::{Token, TokenClass, TokenStream};
pub use parser::Module;

use ast::{Block, Param, Stmt, StmtKind};

/// Name given to the synthetic function that holds top-level statements.
pub const TOPLEVEL_NAME: &str = "<module>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("lex error at {line}:{column}: {message}")]
    Lex { line: usize, column: usize, message: String },
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Original,
    Refactored,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub origin_id: String,
    pub text: String,
    pub kind: UnitKind,
}

impl SourceUnit {
    pub fn new(origin_id: impl Into<String>, text: impl Into<String>, kind: UnitKind) -> Self {
        Self { origin_id: origin_id.into(), text: text.into(), kind }
    }

    pub fn original(origin_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self::new(origin_id, text, UnitKind::Original)
    }

    pub fn refactored(origin_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self::new(origin_id, text, UnitKind::Refactored)
    }

    pub fn is_blank(&self) -> bool {
        self.text.trim().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    BranchIf,
    BranchElif,
    BranchElse,
    LoopFor,
    LoopWhile,
    ExceptionHandler,
}

impl ControlKind {
    pub const ALL: [ControlKind; 6] = [
        ControlKind::BranchIf,
        ControlKind::BranchElif,
        ControlKind::BranchElse,
        ControlKind::LoopFor,
        ControlKind::LoopWhile,
        ControlKind::ExceptionHandler,
    ];

    /// Whether the construct adds a decision point to the control-flow graph.
    pub fn is_decision(self) -> bool {
        self != ControlKind::BranchElse
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlConstruct {
    pub kind: ControlKind,
    /// Number of enclosing control constructs.
    pub depth: usize,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamSig {
    pub name: String,
    pub has_default: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub name: String,
    pub params: Vec<ParamSig>,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&p.name)?;
            if p.has_default {
                f.write_str("=…")?;
            }
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionUnit {
    pub name: String,
    pub params: Vec<ParamSig>,
    /// Byte range of the body statements in the unit text.
    pub body_span: Range<usize>,
    pub constructs: Vec<ControlConstruct>,
    pub is_synthetic_toplevel: bool,
    pub body: Block,
    pub(crate) param_nodes: Vec<Param>,
}

#[derive(Debug, Clone)]
pub struct ParsedUnit {
    pub module: Module,
    pub functions: Vec<FunctionUnit>,
}

impl ParsedUnit {
    pub fn tokens(&self) -> &TokenStream {
        &self.module.tokens
    }

    /// True when every statement went through the full grammar.
    pub fn is_clean(&self) -> bool {
        self.module.recoveries == 0
    }

    pub fn function(&self, name: &str) -> Option<&FunctionUnit> {
        self.functions.iter().find(|f| f.name == name)
    }
}

pub fn tokenize(unit: &SourceUnit) -> Result<TokenStream, SourceError> {
    lexer::tokenize_str(&unit.text)
}

pub fn parse(unit: &SourceUnit) -> Result<ParsedUnit, SourceError> {
    parse_text(&unit.text)
}

pub fn parse_text(text: &str) -> Result<ParsedUnit, SourceError> {
    let module = parser::parse_module(lexer::tokenize_str(text)?)?;
    let functions = collect_functions(&module.body);
    Ok(ParsedUnit { module, functions })
}

pub fn parse_functions(unit: &SourceUnit) -> Result<Vec<FunctionUnit>, SourceError> {
    Ok(parse(unit)?.functions)
}

/// Strict check used when hunting for code inside free-form text: the text must
/// parse without recovery and contain at least one statement that is more than
/// a bare name or literal.
pub fn looks_like_source(text: &str) -> bool {
    let Ok(parsed) = parse_text(text) else { return false };
    parsed.is_clean() && parsed.module.body.iter().any(is_substantive)
}

fn is_substantive(stmt: &Stmt) -> bool {
    use ast::ExprKind;
    match &stmt.kind {
        StmtKind::Expr(e) => !matches!(
            e.kind,
            ExprKind::Name(_) | ExprKind::Number(_) | ExprKind::Str(_) | ExprKind::Constant(_)
        ),
        StmtKind::Opaque(_) => false,
        _ => true,
    }
}

fn function_unit(name: String, def: &ast::FunctionDef) -> FunctionUnit {
    let mut f = FunctionUnit {
        name,
        params: def
            .params
            .iter()
            .map(|p| ParamSig { name: p.name.clone(), has_default: p.has_default() })
            .collect(),
        body_span: def.body_span.clone(),
        constructs: Vec::new(),
        is_synthetic_toplevel: false,
        body: def.body.clone(),
        param_nodes: def.params.clone(),
    };
    f.constructs = extract_constructs(&f);
    f
}

fn collect_functions(body: &Block) -> Vec<FunctionUnit> {
    let mut out = Vec::new();
    let mut toplevel: Block = Vec::new();
    for stmt in body {
        match &stmt.kind {
            StmtKind::FunctionDef(def) => out.push(function_unit(def.name.clone(), def)),
            StmtKind::ClassDef { name, body, .. } => {
                for inner in body {
                    match &inner.kind {
                        StmtKind::FunctionDef(def) => out.push(function_unit(format!("{name}.{}", def.name), def)),
                        StmtKind::Pass => {}
                        _ if inner.is_docstring() => {}
                        _ => toplevel.push(inner.clone()),
                    }
                }
            }
            StmtKind::Import(_) | StmtKind::Pass => {}
            _ if stmt.is_docstring() && toplevel.is_empty() && out.is_empty() => {}
            _ => toplevel.push(stmt.clone()),
        }
    }
    if !toplevel.is_empty() {
        let span = toplevel[0].span.start..toplevel.last().unwrap().span.end;
        let mut f = FunctionUnit {
            name: TOPLEVEL_NAME.to_string(),
            params: Vec::new(),
            body_span: span,
            constructs: Vec::new(),
            is_synthetic_toplevel: true,
            body: toplevel,
            param_nodes: Vec::new(),
        };
        f.constructs = extract_constructs(&f);
        out.push(f);
    }
    out
}

/// Lists every branch arm, loop, loop `else` and exception handler with its nesting depth.
pub fn extract_constructs(f: &FunctionUnit) -> Vec<ControlConstruct> {
    let mut out = Vec::new();
    walk_constructs(&f.body, 0, &mut out);
    out
}

fn walk_constructs(block: &Block, depth: usize, out: &mut Vec<ControlConstruct>) {
    for stmt in block {
        match &stmt.kind {
            StmtKind::If { arms } => {
                for arm in arms {
                    let kind = match arm.kind {
                        ast::ArmKind::If => ControlKind::BranchIf,
                        ast::ArmKind::Elif => ControlKind::BranchElif,
                        ast::ArmKind::Else => ControlKind::BranchElse,
                    };
                    out.push(ControlConstruct { kind, depth, span: arm.span.clone() });
                    walk_constructs(&arm.body, depth + 1, out);
                }
            }
            StmtKind::For { body, header, orelse, .. } | StmtKind::While { body, header, orelse, .. } => {
                let kind = if matches!(stmt.kind, StmtKind::For { .. }) { ControlKind::LoopFor } else { ControlKind::LoopWhile };
                out.push(ControlConstruct { kind, depth, span: header.clone() });
                walk_constructs(body, depth + 1, out);
                if let Some(arm) = orelse {
                    out.push(ControlConstruct { kind: ControlKind::BranchElse, depth, span: arm.span.clone() });
                    walk_constructs(&arm.body, depth + 1, out);
                }
            }
            StmtKind::Try { body, handlers, orelse, finalbody } => {
                walk_constructs(body, depth, out);
                for h in handlers {
                    out.push(ControlConstruct { kind: ControlKind::ExceptionHandler, depth, span: h.span.clone() });
                    walk_constructs(&h.body, depth + 1, out);
                }
                if let Some(b) = orelse {
                    walk_constructs(b, depth, out);
                }
                if let Some(b) = finalbody {
                    walk_constructs(b, depth, out);
                }
            }
            StmtKind::FunctionDef(def) => walk_constructs(&def.body, depth, out),
            StmtKind::ClassDef { body, .. } | StmtKind::With { body, .. } | StmtKind::Block { body, .. } => {
                walk_constructs(body, depth, out)
            }
            _ => {}
        }
    }
}

pub fn extract_signature(f: &FunctionUnit) -> Signature {
    Signature { name: f.name.clone(), params: f.params.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const NESTED_IS_PRIME: &str = "\
def is_prime(n):
    if n <= 1: # +1 ICP (branch)
        return False
    else: # +1 ICP (branch)
        i = 2
        while i < n: # +1 ICP (loop)
            if n % i == 0: # +1 ICP (nested branch)
                return False
            else: # +1 ICP (nested branch)
                i += 1
        return True
";

    pub(crate) const SIMPLE_IS_PRIME: &str = "\
def is_prime(n):
    if n <= 1: # +1 ICP (branch)
        return False
    while i < n: # +1 ICP (loop)
        if n % i == 0:
            return False
        i += 1
    return True
";

    pub(crate) const NTH_EVEN: &str = "\
def nth_even(n):
    if n==1:
        return 0
    if n==2:
        return 2
    if n==3:
        return 4
    else:
        return n*2-2
";

    fn shape(src: &str) -> Vec<(ControlKind, usize)> {
        let fns = parse_functions(&SourceUnit::original("t", src)).unwrap();
        assert_eq!(fns.len(), 1);
        fns[0].constructs.iter().map(|c| (c.kind, c.depth)).collect()
    }

    #[test]
    fn nested_is_prime_constructs() {
        use ControlKind::*;
        assert_eq!(
            shape(NESTED_IS_PRIME),
            [(BranchIf, 0), (BranchElse, 0), (LoopWhile, 1), (BranchIf, 2), (BranchElse, 2)]
        );
    }

    #[test]
    fn simplified_is_prime_constructs() {
        use ControlKind::*;
        assert_eq!(shape(SIMPLE_IS_PRIME), [(BranchIf, 0), (LoopWhile, 0), (BranchIf, 1)]);
    }

    #[test]
    fn nth_even_has_four_constructs() {
        let fns = parse_functions(&SourceUnit::original("t", NTH_EVEN)).unwrap();
        assert_eq!(fns.len(), 1);
        assert_eq!(fns[0].name, "nth_even");
        assert_eq!(fns[0].constructs.len(), 4);
        assert!(fns[0].constructs.iter().all(|c| c.depth == 0));
    }

    #[test]
    fn empty_source_has_no_functions() {
        assert!(parse_functions(&SourceUnit::original("t", "")).unwrap().is_empty());
        assert!(parse_functions(&SourceUnit::original("t", "\n  \n# only a comment\n")).unwrap().is_empty());
    }

    #[test]
    fn top_level_statements_form_a_synthetic_unit() {
        // `import` does not count; `x = ...` and `print(...)` go to `<module>`,
        // both straight-line.
        let src = "import sys\n\ndef add(a, b):\n    return a + b\n\nx = int(input())\nprint(add(x, 1))\n";
        let fns = parse_functions(&SourceUnit::original("t", src)).unwrap();
        assert_eq!(fns.len(), 2);
        assert_eq!(fns[0].name, "add");
        assert!(!fns[0].is_synthetic_toplevel);
        assert_eq!(fns[1].name, TOPLEVEL_NAME);
        assert!(fns[1].is_synthetic_toplevel);
        assert_eq!(fns[1].body.len(), 2);
        assert!(fns[1].constructs.is_empty());
        assert_eq!(&src[fns[0].body_span.clone()], "return a + b");
    }

    #[test]
    fn nested_defs_attach_to_the_enclosing_function() {
        let src = "def outer(xs):\n    if xs:\n        def inner(y):\n            for z in y:\n                pass\n        return inner(xs)\n    return 0\n";
        let fns = parse_functions(&SourceUnit::original("t", src)).unwrap();
        assert_eq!(fns.len(), 1);
        let shape: Vec<_> = fns[0].constructs.iter().map(|c| (c.kind, c.depth)).collect();
        assert_eq!(shape, [(ControlKind::BranchIf, 0), (ControlKind::LoopFor, 1)]);
    }

    #[test]
    fn handlers_and_loop_else_are_constructs() {
        use ControlKind::*;
        let src = "def f(xs):\n    try:\n        for x in xs:\n            pass\n        else:\n            pass\n    except ValueError:\n        pass\n    except:\n        pass\n";
        assert_eq!(shape(src), [(LoopFor, 0), (BranchElse, 0), (ExceptionHandler, 0), (ExceptionHandler, 0)]);
    }

    #[test]
    fn comprehensions_and_boolean_operators_are_straight_line() {
        let src = "def f(xs):\n    return [x for x in xs if x and not x > 3] or (1 if xs else 2)\n";
        assert!(shape(src).is_empty());
    }

    #[test]
    fn methods_are_qualified() {
        let src = "class Pair:\n    def __init__(self, a, b):\n        self.a = a\n    def max(self):\n        return self.a\n";
        let names: Vec<_> = parse_functions(&SourceUnit::original("t", src)).unwrap().into_iter().map(|f| f.name).collect();
        assert_eq!(names, ["Pair.__init__", "Pair.max"]);
    }

    #[test]
    fn signatures() {
        let fns = parse_functions(&SourceUnit::original("t", "def avg(a, b):\n    return a + b\ndef z():\n    pass\ndef d(x, y=2):\n    pass\n")).unwrap();
        let sigs: Vec<_> = fns.iter().map(extract_signature).collect();
        assert_eq!(sigs[0].name, "avg");
        assert_eq!(sigs[0].params, [ParamSig { name: "a".into(), has_default: false }, ParamSig { name: "b".into(), has_default: false }]);
        assert!(sigs[1].params.is_empty());
        assert!(sigs[2].params[1].has_default);
        assert!(!sigs[2].params[0].has_default);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_functions(&SourceUnit::original("t", "def f():\n  x = 1\n\ty = 2\n")).unwrap_err();
        assert!(matches!(err, SourceError::Parse { line: 3, .. }));
    }

    #[test]
    fn looks_like_source_rejects_prose() {
        assert!(!looks_like_source("This function computes the sum of two numbers."));
        assert!(!looks_like_source("Sure"));
        assert!(!looks_like_source("Here is the refactored code:"));
        assert!(looks_like_source("def f(x):\n    return x\n"));
        assert!(looks_like_source("x = 1"));
    }
}
