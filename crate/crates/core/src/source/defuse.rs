//! Forward reaching-definition analysis over the structured syntax tree.
//!
//! Definitions reach uses along forward edges only (branches merge by union,
//! loops are walked once), so every pair has `def_site < use_site`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::ast::{Block, Expr, ExprKind, StmtKind};
use super::FunctionUnit;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DefUsePair {
    /// Position-normalized symbol (`v0`, `v1`, ... by first appearance).
    pub variable: String,
    /// Name as written in the source.
    pub name: String,
    pub def_site: usize,
    pub use_site: usize,
}

/// Rename- and offset-independent form of a [`DefUsePair`]: the `def_ordinal`-th
/// definition of variable `var` reaches its `use_ordinal`-th use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NormalizedPair {
    pub var: usize,
    pub def_ordinal: usize,
    pub use_ordinal: usize,
}

type State = BTreeMap<String, BTreeSet<usize>>;

fn union(a: &State, b: &State) -> State {
    let mut out = a.clone();
    for (k, v) in b {
        out.entry(k.clone()).or_default().extend(v.iter().copied());
    }
    out
}

#[derive(Default)]
struct Walker {
    raw: Vec<(String, usize, usize)>,
    shadowed: Vec<HashSet<String>>,
}

impl Walker {
    fn is_shadowed(&self, name: &str) -> bool {
        self.shadowed.iter().any(|s| s.contains(name))
    }

    fn use_expr(&mut self, e: &Expr, state: &mut State) {
        match &e.kind {
            ExprKind::Name(n) => {
                if self.is_shadowed(n) {
                    return;
                }
                if let Some(defs) = state.get(n) {
                    for d in defs {
                        if *d < e.token {
                            self.raw.push((n.clone(), *d, e.token));
                        }
                    }
                }
            }
            ExprKind::Comprehension { element, generators, .. } => {
                let mut bound = HashSet::new();
                for g in generators {
                    collect_target_names(&g.target, &mut bound);
                }
                if let Some(first) = generators.first() {
                    self.use_expr(&first.iter, state);
                }
                self.shadowed.push(bound);
                for (i, g) in generators.iter().enumerate() {
                    if i > 0 {
                        self.use_expr(&g.iter, state);
                    }
                    for cond in &g.ifs {
                        self.use_expr(cond, state);
                    }
                }
                self.use_expr(element, state);
                self.shadowed.pop();
            }
            ExprKind::Lambda { params, body } => {
                for p in params {
                    if let Some(d) = &p.default {
                        self.use_expr(d, state);
                    }
                }
                let bound = params.iter().filter_map(|p| p.binding().map(str::to_string)).collect();
                self.shadowed.push(bound);
                self.use_expr(body, state);
                self.shadowed.pop();
            }
            ExprKind::NamedExpr { target, value } => {
                self.use_expr(value, state);
                self.def_target(target, state);
            }
            _ => {
                for c in e.children() {
                    self.use_expr(c, state);
                }
            }
        }
    }

    /// Binds names in an assignment target; subscripts and attributes are reads.
    fn def_target(&mut self, target: &Expr, state: &mut State) {
        match &target.kind {
            ExprKind::Name(n) => {
                state.insert(n.clone(), BTreeSet::from([target.token]));
            }
            ExprKind::Tuple(items) | ExprKind::List(items) => {
                for it in items {
                    self.def_target(it, state);
                }
            }
            ExprKind::Starred { value, .. } => self.def_target(value, state),
            ExprKind::Attribute { value, .. } => self.use_expr(value, state),
            ExprKind::Subscript { value, index } => {
                self.use_expr(value, state);
                self.use_expr(index, state);
            }
            _ => self.use_expr(target, state),
        }
    }

    fn block(&mut self, block: &Block, mut state: State) -> State {
        for stmt in block {
            state = self.stmt(&stmt.kind, state);
        }
        state
    }

    fn stmt(&mut self, kind: &StmtKind, mut state: State) -> State {
        match kind {
            StmtKind::Assign { targets, value } => {
                self.use_expr(value, &mut state);
                for t in targets {
                    self.def_target(t, &mut state);
                }
                state
            }
            StmtKind::AugAssign { target, value, .. } => {
                self.use_expr(value, &mut state);
                self.use_expr(target, &mut state);
                self.def_target(target, &mut state);
                state
            }
            StmtKind::AnnAssign { target, value, .. } => {
                if let Some(v) = value {
                    self.use_expr(v, &mut state);
                    self.def_target(target, &mut state);
                }
                state
            }
            StmtKind::Expr(e) => {
                self.use_expr(e, &mut state);
                state
            }
            StmtKind::Return(v) => {
                if let Some(v) = v {
                    self.use_expr(v, &mut state);
                }
                state
            }
            StmtKind::Raise { exc, cause } => {
                for e in exc.iter().chain(cause.iter()) {
                    self.use_expr(e, &mut state);
                }
                state
            }
            StmtKind::Assert { test, msg } => {
                self.use_expr(test, &mut state);
                if let Some(m) = msg {
                    self.use_expr(m, &mut state);
                }
                state
            }
            StmtKind::Del(items) | StmtKind::Opaque(items) => {
                for e in items {
                    self.use_expr(e, &mut state);
                }
                state
            }
            StmtKind::If { arms } => {
                let has_else = arms.iter().any(|a| a.kind == super::ast::ArmKind::Else);
                let mut merged: Option<State> = None;
                let mut cond_state = state.clone();
                for arm in arms {
                    if let Some(t) = &arm.test {
                        self.use_expr(t, &mut cond_state);
                    }
                    let out = self.block(&arm.body, cond_state.clone());
                    merged = Some(match merged {
                        Some(m) => union(&m, &out),
                        None => out,
                    });
                }
                let merged = merged.unwrap_or_default();
                if has_else {
                    merged
                } else {
                    union(&merged, &cond_state)
                }
            }
            StmtKind::For { target, iter, body, orelse, .. } => {
                self.use_expr(iter, &mut state);
                let mut inner = state.clone();
                self.def_target(target, &mut inner);
                let body_out = self.block(body, inner);
                let after = union(&state, &body_out);
                match orelse {
                    Some(arm) => self.block(&arm.body, after),
                    None => after,
                }
            }
            StmtKind::While { test, body, orelse, .. } => {
                self.use_expr(test, &mut state);
                let body_out = self.block(body, state.clone());
                let after = union(&state, &body_out);
                match orelse {
                    Some(arm) => self.block(&arm.body, after),
                    None => after,
                }
            }
            StmtKind::Try { body, handlers, orelse, finalbody } => {
                let body_out = self.block(body, state.clone());
                let at_raise = union(&state, &body_out);
                let mut result = match orelse {
                    Some(b) => self.block(b, body_out),
                    None => body_out,
                };
                for h in handlers {
                    let mut hs = at_raise.clone();
                    if let Some(t) = &h.exc_type {
                        self.use_expr(t, &mut hs);
                    }
                    if let Some((name, tok)) = &h.name {
                        hs.insert(name.clone(), BTreeSet::from([*tok]));
                    }
                    let out = self.block(&h.body, hs);
                    result = union(&result, &out);
                }
                match finalbody {
                    Some(b) => self.block(b, result),
                    None => result,
                }
            }
            StmtKind::With { items, body } => {
                for (e, target) in items {
                    self.use_expr(e, &mut state);
                    if let Some(t) = target {
                        self.def_target(t, &mut state);
                    }
                }
                self.block(body, state)
            }
            StmtKind::Block { head, body, .. } => {
                for e in head {
                    self.use_expr(e, &mut state);
                }
                self.block(body, state)
            }
            StmtKind::FunctionDef(def) => {
                for e in def.decorators.iter().chain(def.params.iter().filter_map(|p| p.default.as_ref())) {
                    self.use_expr(e, &mut state);
                }
                let mut inner = state.clone();
                for p in &def.params {
                    if let Some(b) = p.binding() {
                        inner.insert(b.to_string(), BTreeSet::from([p.token]));
                    }
                }
                self.block(&def.body, inner);
                state
            }
            StmtKind::ClassDef { bases, decorators, body, .. } => {
                for e in bases.iter().chain(decorators.iter()) {
                    self.use_expr(e, &mut state);
                }
                self.block(body, state.clone());
                state
            }
            StmtKind::Pass | StmtKind::Break | StmtKind::Continue | StmtKind::Import(_) | StmtKind::Global(_) => state,
        }
    }
}

fn collect_target_names(e: &Expr, out: &mut HashSet<String>) {
    match &e.kind {
        ExprKind::Name(n) => {
            out.insert(n.clone());
        }
        ExprKind::Tuple(items) | ExprKind::List(items) => items.iter().for_each(|i| collect_target_names(i, out)),
        ExprKind::Starred { value, .. } => collect_target_names(value, out),
        _ => {}
    }
}

/// Def-use pairs of one function (parameters count as definitions).
pub fn extract_def_use(f: &FunctionUnit) -> Vec<DefUsePair> {
    let mut state = State::new();
    for p in &f.param_nodes {
        if let Some(b) = p.binding() {
            state.insert(b.to_string(), BTreeSet::from([p.token]));
        }
    }
    let mut w = Walker::default();
    w.block(&f.body, state);
    let mut raw = w.raw;
    raw.sort_by_key(|(_, d, u)| (*u, *d));
    raw.dedup();

    let mut first_seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (name, d, _) in &raw {
        let e = first_seen.entry(name.as_str()).or_insert(*d);
        *e = (*e).min(*d);
    }
    let mut order: Vec<(&str, usize)> = first_seen.into_iter().collect();
    order.sort_by_key(|(n, pos)| (*pos, *n));
    let index: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, (n, _))| (*n, i)).collect();

    raw.iter()
        .map(|(name, d, u)| DefUsePair {
            variable: format!("v{}", index[name.as_str()]),
            name: name.clone(),
            def_site: *d,
            use_site: *u,
        })
        .collect()
}

/// Converts pairs to offset-free form for matching across programs.
pub fn normalized_pairs(pairs: &[DefUsePair]) -> Vec<NormalizedPair> {
    let mut defs: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    let mut uses: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for p in pairs {
        defs.entry(p.variable.as_str()).or_default().insert(p.def_site);
        uses.entry(p.variable.as_str()).or_default().insert(p.use_site);
    }
    let ordinal = |set: &BTreeSet<usize>, x: usize| set.iter().position(|v| *v == x).unwrap();
    let mut out: Vec<NormalizedPair> = pairs
        .iter()
        .map(|p| NormalizedPair {
            var: p.variable[1..].parse().unwrap_or(0),
            def_ordinal: ordinal(&defs[p.variable.as_str()], p.def_site),
            use_ordinal: ordinal(&uses[p.variable.as_str()], p.use_site),
        })
        .collect();
    out.sort();
    out
}
