//! Depth-bounded subtree fingerprints used by the syntax-match component.
//!
//! The tree is labelled with node kinds only. Identifiers and literal values are
//! dropped, operators are kept as part of the label.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::ast::{Block, Expr, ExprKind, Stmt, StmtKind};
use super::ParsedUnit;

pub const SUBTREE_DEPTH: usize = 3;

/// Fingerprint string -> occurrence count.
pub type SubtreeMultiset = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub label: String,
    pub children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    fn leaf(label: impl Into<String>) -> Self {
        SyntaxNode { label: label.into(), children: vec![] }
    }

    fn node(label: impl Into<String>, children: Vec<SyntaxNode>) -> Self {
        SyntaxNode { label: label.into(), children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(SyntaxNode::size).sum::<usize>()
    }

    fn render(&self, depth: usize, out: &mut String) {
        if self.children.is_empty() || depth == 1 {
            out.push_str(&self.label);
            return;
        }
        let _ = write!(out, "({}", self.label);
        for c in &self.children {
            out.push(' ');
            c.render(depth - 1, out);
        }
        out.push(')');
    }

    /// S-expression truncated to `depth` levels.
    pub fn fingerprint(&self, depth: usize) -> String {
        let mut s = String::new();
        self.render(depth.max(1), &mut s);
        s
    }
}

fn block_node(label: &str, block: &Block) -> SyntaxNode {
    SyntaxNode::node(label, block.iter().map(stmt_node).collect())
}

fn exprs(items: &[Expr]) -> Vec<SyntaxNode> {
    items.iter().map(expr_node).collect()
}

fn stmt_node(s: &Stmt) -> SyntaxNode {
    match &s.kind {
        StmtKind::FunctionDef(f) => {
            let params = SyntaxNode::node(
                "Params",
                f.params
                    .iter()
                    .map(|p| match &p.default {
                        Some(d) => SyntaxNode::node("Param", vec![expr_node(d)]),
                        None => SyntaxNode::leaf("Param"),
                    })
                    .collect(),
            );
            let mut children: Vec<SyntaxNode> = exprs(&f.decorators);
            children.push(params);
            children.push(block_node("Body", &f.body));
            SyntaxNode::node("FunctionDef", children)
        }
        StmtKind::ClassDef { bases, body, .. } => {
            let mut children = exprs(bases);
            children.push(block_node("Body", body));
            SyntaxNode::node("ClassDef", children)
        }
        StmtKind::If { arms } => SyntaxNode::node(
            "If",
            arms.iter()
                .map(|a| {
                    let label = format!("{:?}", a.kind);
                    let mut ch: Vec<SyntaxNode> = a.test.iter().map(expr_node).collect();
                    ch.push(block_node("Body", &a.body));
                    SyntaxNode::node(label, ch)
                })
                .collect(),
        ),
        StmtKind::For { target, iter, body, orelse, .. } => {
            let mut ch = vec![expr_node(target), expr_node(iter), block_node("Body", body)];
            if let Some(a) = orelse {
                ch.push(block_node("Else", &a.body));
            }
            SyntaxNode::node("For", ch)
        }
        StmtKind::While { test, body, orelse, .. } => {
            let mut ch = vec![expr_node(test), block_node("Body", body)];
            if let Some(a) = orelse {
                ch.push(block_node("Else", &a.body));
            }
            SyntaxNode::node("While", ch)
        }
        StmtKind::Try { body, handlers, orelse, finalbody } => {
            let mut ch = vec![block_node("Body", body)];
            for h in handlers {
                let mut hc: Vec<SyntaxNode> = h.exc_type.iter().map(expr_node).collect();
                hc.push(block_node("Body", &h.body));
                ch.push(SyntaxNode::node("Handler", hc));
            }
            if let Some(b) = orelse {
                ch.push(block_node("Else", b));
            }
            if let Some(b) = finalbody {
                ch.push(block_node("Finally", b));
            }
            SyntaxNode::node("Try", ch)
        }
        StmtKind::With { items, body } => {
            let mut ch = Vec::new();
            for (e, t) in items {
                let mut ic = vec![expr_node(e)];
                ic.extend(t.iter().map(expr_node));
                ch.push(SyntaxNode::node("WithItem", ic));
            }
            ch.push(block_node("Body", body));
            SyntaxNode::node("With", ch)
        }
        StmtKind::Block { keyword, head, body } => {
            let mut ch = exprs(head);
            ch.push(block_node("Body", body));
            SyntaxNode::node(format!("Block({keyword})"), ch)
        }
        StmtKind::Return(v) => SyntaxNode::node("Return", v.iter().map(expr_node).collect()),
        StmtKind::Raise { exc, cause } => {
            SyntaxNode::node("Raise", exc.iter().chain(cause.iter()).map(expr_node).collect())
        }
        StmtKind::Assign { targets, value } => {
            let mut ch = exprs(targets);
            ch.push(expr_node(value));
            SyntaxNode::node("Assign", ch)
        }
        StmtKind::AugAssign { target, op, value } => {
            SyntaxNode::node(format!("AugAssign({op})"), vec![expr_node(target), expr_node(value)])
        }
        StmtKind::AnnAssign { target, annotation, value } => {
            let mut ch = vec![expr_node(target), expr_node(annotation)];
            ch.extend(value.iter().map(expr_node));
            SyntaxNode::node("AnnAssign", ch)
        }
        StmtKind::Expr(e) => SyntaxNode::node("ExprStmt", vec![expr_node(e)]),
        StmtKind::Pass => SyntaxNode::leaf("Pass"),
        StmtKind::Break => SyntaxNode::leaf("Break"),
        StmtKind::Continue => SyntaxNode::leaf("Continue"),
        StmtKind::Import(names) => SyntaxNode::node("Import", names.iter().map(|_| SyntaxNode::leaf("Alias")).collect()),
        StmtKind::Global(names) => SyntaxNode::node("Global", names.iter().map(|_| SyntaxNode::leaf("Name")).collect()),
        StmtKind::Del(items) => SyntaxNode::node("Delete", exprs(items)),
        StmtKind::Assert { test, msg } => {
            let mut ch = vec![expr_node(test)];
            ch.extend(msg.iter().map(expr_node));
            SyntaxNode::node("Assert", ch)
        }
        StmtKind::Opaque(items) => SyntaxNode::node("Opaque", exprs(items)),
    }
}

fn expr_node(e: &Expr) -> SyntaxNode {
    let label = match &e.kind {
        ExprKind::Name(_) => "Name".to_string(),
        ExprKind::Number(_) => "Number".to_string(),
        ExprKind::Str(_) => "Str".to_string(),
        ExprKind::Constant(c) => format!("Constant({c})"),
        ExprKind::BinOp { op, .. } => format!("BinOp({op})"),
        ExprKind::BoolOp { op, .. } => format!("BoolOp({op})"),
        ExprKind::UnaryOp { op, .. } => format!("UnaryOp({op})"),
        ExprKind::Compare { ops, .. } => format!("Compare({})", ops.join(",")),
        ExprKind::IfExp { .. } => "IfExp".to_string(),
        ExprKind::Lambda { .. } => "Lambda".to_string(),
        ExprKind::Call { .. } => "Call".to_string(),
        ExprKind::Keyword { .. } => "Keyword".to_string(),
        ExprKind::Attribute { .. } => "Attribute".to_string(),
        ExprKind::Subscript { .. } => "Subscript".to_string(),
        ExprKind::Slice { .. } => "Slice".to_string(),
        ExprKind::Tuple(_) => "Tuple".to_string(),
        ExprKind::List(_) => "List".to_string(),
        ExprKind::Set(_) => "Set".to_string(),
        ExprKind::Dict(_) => "Dict".to_string(),
        ExprKind::KeyValue { .. } => "KeyValue".to_string(),
        ExprKind::Comprehension { kind, .. } => format!("Comp({kind:?})"),
        ExprKind::Starred { op, .. } => format!("Starred({op})"),
        ExprKind::NamedExpr { .. } => "NamedExpr".to_string(),
        ExprKind::Yield { from, .. } => if *from { "YieldFrom" } else { "Yield" }.to_string(),
        ExprKind::Await(_) => "Await".to_string(),
        ExprKind::Opaque(_) => "Opaque".to_string(),
    };
    SyntaxNode::node(label, e.children().into_iter().map(expr_node).collect())
}

/// Kind-labelled tree of a module body.
pub fn syntax_tree(body: &Block) -> SyntaxNode {
    block_node("Module", body)
}

/// Fingerprints of every internal node's depth-bounded subtree.
pub fn subtree_multiset(tree: &SyntaxNode) -> SubtreeMultiset {
    fn walk(n: &SyntaxNode, out: &mut SubtreeMultiset) {
        if n.children.is_empty() {
            return;
        }
        *out.entry(n.fingerprint(SUBTREE_DEPTH)).or_default() += 1;
        for c in &n.children {
            walk(c, out);
        }
    }
    let mut out = SubtreeMultiset::new();
    walk(tree, &mut out);
    out
}

pub fn unit_subtree_multiset(parsed: &ParsedUnit) -> SubtreeMultiset {
    subtree_multiset(&syntax_tree(&parsed.module.body))
}
