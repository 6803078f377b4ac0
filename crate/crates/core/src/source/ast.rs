//! Syntax tree for the supported Python subset.
//!
//! Every node keeps its byte span in the original text; expressions also keep
//! the index of their first token so data-flow sites can be reported in token
//! coordinates.

use std::ops::Range;

pub type Span = Range<usize>;
pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    /// Name as written, with `*`/`**` prefixes kept; bare `*` and `/` markers are params too.
    pub name: String,
    pub default: Option<Expr>,
    pub annotation: Option<Expr>,
    /// Token index of the parameter name.
    pub token: usize,
}

impl Param {
    pub fn has_default(&self) -> bool {
        self.default.is_some()
    }

    /// Name without star prefixes, `None` for the `*` and `/` markers.
    pub fn binding(&self) -> Option<&str> {
        let bare = self.name.trim_start_matches('*');
        (!bare.is_empty() && bare != "/").then_some(bare)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub returns: Option<Expr>,
    pub decorators: Vec<Expr>,
    pub body: Block,
    /// Span of the body statements only.
    pub body_span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmKind {
    If,
    Elif,
    Else,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub kind: ArmKind,
    pub test: Option<Expr>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Handler {
    pub exc_type: Option<Expr>,
    pub name: Option<(String, usize)>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef(FunctionDef),
    ClassDef { name: String, bases: Vec<Expr>, decorators: Vec<Expr>, body: Block },
    If { arms: Vec<Arm> },
    For { target: Expr, iter: Expr, body: Block, header: Span, orelse: Option<Arm> },
    While { test: Expr, body: Block, header: Span, orelse: Option<Arm> },
    Try { body: Block, handlers: Vec<Handler>, orelse: Option<Block>, finalbody: Option<Block> },
    With { items: Vec<(Expr, Option<Expr>)>, body: Block },
    /// Any other compound statement (`match`, `case`, ...); its body is walked as-is.
    Block { keyword: String, head: Vec<Expr>, body: Block },
    Return(Option<Expr>),
    Raise { exc: Option<Expr>, cause: Option<Expr> },
    Assign { targets: Vec<Expr>, value: Expr },
    AugAssign { target: Expr, op: String, value: Expr },
    AnnAssign { target: Expr, annotation: Expr, value: Option<Expr> },
    Expr(Expr),
    Pass,
    Break,
    Continue,
    Import(Vec<String>),
    Global(Vec<String>),
    Del(Vec<Expr>),
    Assert { test: Expr, msg: Option<Expr> },
    /// A simple statement the expression grammar could not handle.
    Opaque(Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompKind {
    List,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    Number(String),
    Str(String),
    /// `True`, `False`, `None`, `...`
    Constant(String),
    BinOp { op: String, left: Box<Expr>, right: Box<Expr> },
    BoolOp { op: String, values: Vec<Expr> },
    UnaryOp { op: String, operand: Box<Expr> },
    Compare { left: Box<Expr>, ops: Vec<String>, comparators: Vec<Expr> },
    IfExp { test: Box<Expr>, body: Box<Expr>, orelse: Box<Expr> },
    Lambda { params: Vec<Param>, body: Box<Expr> },
    Call { func: Box<Expr>, args: Vec<Expr> },
    Keyword { name: String, value: Box<Expr> },
    Attribute { value: Box<Expr>, attr: String },
    Subscript { value: Box<Expr>, index: Box<Expr> },
    Slice { lower: Option<Box<Expr>>, upper: Option<Box<Expr>>, step: Option<Box<Expr>> },
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    Set(Vec<Expr>),
    Dict(Vec<Expr>),
    KeyValue { key: Box<Expr>, value: Box<Expr> },
    Comprehension { kind: CompKind, element: Box<Expr>, generators: Vec<Generator> },
    Starred { op: String, value: Box<Expr> },
    NamedExpr { target: Box<Expr>, value: Box<Expr> },
    Yield { value: Option<Box<Expr>>, from: bool },
    Await(Box<Expr>),
    /// Leaf atoms of an expression that failed to parse.
    Opaque(Vec<Expr>),
}

impl Expr {
    /// Direct child expressions in source order.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Name(_) | Number(_) | Str(_) | Constant(_) => vec![],
            BinOp { left, right, .. } => vec![left, right],
            BoolOp { values, .. } => values.iter().collect(),
            UnaryOp { operand, .. } => vec![operand],
            Compare { left, comparators, .. } => {
                std::iter::once(&**left).chain(comparators.iter()).collect()
            }
            IfExp { test, body, orelse } => vec![body, test, orelse],
            Lambda { params, body } => params
                .iter()
                .filter_map(|p| p.default.as_ref())
                .chain(std::iter::once(&**body))
                .collect(),
            Call { func, args } => std::iter::once(&**func).chain(args.iter()).collect(),
            Keyword { value, .. } => vec![value],
            Attribute { value, .. } => vec![value],
            Subscript { value, index } => vec![value, index],
            Slice { lower, upper, step } => {
                [lower, upper, step].into_iter().flatten().map(|b| &**b).collect()
            }
            Tuple(items) | List(items) | Set(items) | Dict(items) | Opaque(items) => items.iter().collect(),
            KeyValue { key, value } => vec![key, value],
            Comprehension { element, generators, .. } => {
                let mut out: Vec<&Expr> = vec![element];
                for g in generators {
                    out.push(&g.target);
                    out.push(&g.iter);
                    out.extend(g.ifs.iter());
                }
                out
            }
            Starred { value, .. } => vec![value],
            NamedExpr { target, value } => vec![target, value],
            Yield { value, .. } => value.iter().map(|b| &**b).collect(),
            Await(v) => vec![v],
        }
    }

    pub fn name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(n) => Some(n),
            _ => None,
        }
    }
}

impl Stmt {
    /// Nested statement blocks in source order.
    pub fn blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::FunctionDef(f) => vec![&f.body],
            StmtKind::ClassDef { body, .. } | StmtKind::With { body, .. } | StmtKind::Block { body, .. } => {
                vec![body]
            }
            StmtKind::If { arms } => arms.iter().map(|a| &a.body).collect(),
            StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                std::iter::once(body).chain(orelse.iter().map(|a| &a.body)).collect()
            }
            StmtKind::Try { body, handlers, orelse, finalbody } => std::iter::once(body)
                .chain(handlers.iter().map(|h| &h.body))
                .chain(orelse.iter())
                .chain(finalbody.iter())
                .collect(),
            _ => vec![],
        }
    }

    pub fn is_docstring(&self) -> bool {
        matches!(&self.kind, StmtKind::Expr(Expr { kind: ExprKind::Str(_), .. }))
    }
}
