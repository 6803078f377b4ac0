//! Control-flow graph built by structured translation of a function body.
//!
//! Straight-line statements fold into the current block. Returns and raises jump
//! to the exit node; statements following them start a fresh block with no
//! predecessors, which still drains into the exit node.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::source::ast::{ArmKind, Block, StmtKind};
use crate::source::FunctionUnit;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("invalid graph: {edges} edges cannot connect {nodes} nodes in {components} components")]
    InvalidGraph { nodes: usize, edges: usize, components: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlFlowGraph {
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    #[serde(skip)]
    edge_list: Vec<(usize, usize)>,
}

impl ControlFlowGraph {
    /// Graph known only by its counts.
    pub fn from_counts(nodes: usize, edges: usize, components: usize) -> Self {
        ControlFlowGraph { nodes, edges, components, edge_list: Vec::new() }
    }

    pub fn edge_list(&self) -> &[(usize, usize)] {
        &self.edge_list
    }

    pub fn build(f: &FunctionUnit) -> Self {
        let mut b = Builder { nodes: 2, edges: Vec::new(), loops: Vec::new(), exits: vec![EXIT] };
        if let Some(end) = b.block(&f.body, ENTRY) {
            b.edge(end, EXIT);
        }
        let components = count_components(b.nodes, &b.edges);
        ControlFlowGraph { nodes: b.nodes, edges: b.edges.len(), components, edge_list: b.edges }
    }
}

const ENTRY: usize = 0;
const EXIT: usize = 1;

struct Builder {
    nodes: usize,
    edges: Vec<(usize, usize)>,
    /// (header, after) of enclosing loops.
    loops: Vec<(usize, usize)>,
    /// Return targets; nested definitions push their own.
    exits: Vec<usize>,
}

impl Builder {
    fn node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.edges.push((a, b));
    }

    fn block_from(&mut self, block: &Block, pred: usize) -> Option<usize> {
        let start = self.node();
        self.edge(pred, start);
        self.block(block, start)
    }

    /// Returns the block control falls out of, or `None` if the block always jumps away.
    fn block(&mut self, block: &Block, mut cur: usize) -> Option<usize> {
        let mut live = true;
        for stmt in block {
            if !live {
                cur = self.node();
                live = true;
            }
            match &stmt.kind {
                StmtKind::Return(_) | StmtKind::Raise { .. } => {
                    let target = *self.exits.last().unwrap();
                    self.edge(cur, target);
                    live = false;
                }
                StmtKind::Break | StmtKind::Continue => {
                    if let Some((header, after)) = self.loops.last().copied() {
                        let target = if matches!(stmt.kind, StmtKind::Break) { after } else { header };
                        self.edge(cur, target);
                        live = false;
                    }
                }
                StmtKind::If { arms } => {
                    let join = self.node();
                    let mut test = cur;
                    let mut has_else = false;
                    for arm in arms {
                        if arm.kind == ArmKind::Elif {
                            let t = self.node();
                            self.edge(test, t);
                            test = t;
                        }
                        if arm.kind == ArmKind::Else {
                            has_else = true;
                        }
                        if let Some(end) = self.block_from(&arm.body, test) {
                            self.edge(end, join);
                        }
                    }
                    if !has_else {
                        self.edge(test, join);
                    }
                    cur = join;
                }
                StmtKind::For { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                    let header = self.node();
                    let after = self.node();
                    self.edge(cur, header);
                    self.loops.push((header, after));
                    if let Some(end) = self.block_from(body, header) {
                        self.edge(end, header);
                    }
                    self.loops.pop();
                    match orelse {
                        Some(arm) => {
                            if let Some(end) = self.block_from(&arm.body, header) {
                                self.edge(end, after);
                            }
                        }
                        None => self.edge(header, after),
                    }
                    cur = after;
                }
                StmtKind::Try { body, handlers, orelse, finalbody } => {
                    let start = self.node();
                    self.edge(cur, start);
                    let join = self.node();
                    let mut body_end = self.block(body, start);
                    if let (Some(end), Some(b)) = (body_end, orelse) {
                        body_end = self.block(b, end);
                    }
                    if let Some(end) = body_end {
                        self.edge(end, join);
                    }
                    for h in handlers {
                        if let Some(end) = self.block_from(&h.body, start) {
                            self.edge(end, join);
                        }
                    }
                    cur = join;
                    if let Some(b) = finalbody {
                        match self.block(b, cur) {
                            Some(end) => cur = end,
                            None => live = false,
                        }
                    }
                }
                StmtKind::FunctionDef(def) => {
                    let done = self.node();
                    self.exits.push(done);
                    let saved = std::mem::take(&mut self.loops);
                    if let Some(end) = self.block_from(&def.body, cur) {
                        self.edge(end, done);
                    }
                    self.loops = saved;
                    self.exits.pop();
                    cur = done;
                }
                StmtKind::ClassDef { body, .. } | StmtKind::With { body, .. } | StmtKind::Block { body, .. } => {
                    match self.block(body, cur) {
                        Some(end) => cur = end,
                        None => live = false,
                    }
                }
                _ => {}
            }
        }
        live.then_some(cur)
    }
}

fn count_components(nodes: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = nodes;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components
}

/// `E - N + 2P`.
pub fn cyclomatic_via_cfg(g: &ControlFlowGraph) -> Result<i64, MetricsError> {
    if g.components == 0 || g.edges + g.components < g.nodes {
        return Err(MetricsError::InvalidGraph { nodes: g.nodes, edges: g.edges, components: g.components });
    }
    Ok(g.edges as i64 - g.nodes as i64 + 2 * g.components as i64)
}
