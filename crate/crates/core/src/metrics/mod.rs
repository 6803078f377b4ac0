//! ICP, cyclomatic and cognitive complexity.

mod cfg;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use cfg::{cyclomatic_via_cfg, ControlFlowGraph, MetricsError};

use crate::source::{parse_functions, ControlKind, FunctionUnit, SourceError, SourceUnit};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcpCostTable {
    pub costs: BTreeMap<ControlKind, u32>,
    /// Extra cost per level of nesting.
    pub nesting_surcharge: u32,
}

impl Default for IcpCostTable {
    fn default() -> Self {
        IcpCostTable { costs: ControlKind::ALL.iter().map(|k| (*k, 1)).collect(), nesting_surcharge: 0 }
    }
}

impl IcpCostTable {
    pub fn cost(&self, kind: ControlKind) -> u32 {
        self.costs.get(&kind).copied().unwrap_or(1)
    }
}

pub fn icp(f: &FunctionUnit, table: &IcpCostTable) -> u32 {
    f.constructs
        .iter()
        .map(|c| table.cost(c.kind) + table.nesting_surcharge * c.depth as u32)
        .sum()
}

/// One plus the number of decision points; `else` arms are not decisions.
pub fn cyclomatic(f: &FunctionUnit) -> u32 {
    1 + f.constructs.iter().filter(|c| c.kind.is_decision()).count() as u32
}

pub fn cognitive(f: &FunctionUnit) -> u32 {
    f.constructs.iter().map(|c| 1 + c.depth as u32).sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub icp: u32,
    pub cc: u32,
    pub cogc: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionMetrics {
    pub name: String,
    pub icp: u32,
    pub cc: u32,
    pub cogc: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub per_function: Vec<FunctionMetrics>,
    pub unit_totals: Totals,
    /// Set when the unit has no functions at all (totals are then all zero, CC included).
    #[serde(default)]
    pub no_functions: bool,
}

impl ComplexityReport {
    pub fn from_functions(functions: &[FunctionUnit], table: &IcpCostTable) -> Self {
        let per_function: Vec<FunctionMetrics> = functions
            .iter()
            .map(|f| FunctionMetrics { name: f.name.clone(), icp: icp(f, table), cc: cyclomatic(f), cogc: cognitive(f) })
            .collect();
        let unit_totals = per_function.iter().fold(Totals::default(), |t, m| Totals {
            icp: t.icp + m.icp,
            cc: t.cc + m.cc,
            cogc: t.cogc + m.cogc,
        });
        ComplexityReport { no_functions: per_function.is_empty(), per_function, unit_totals }
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.per_function.iter().map(|m| m.name.len()).max().unwrap_or(0).max(8);
        writeln!(f, "{:<width$}  {:>5}  {:>5}  {:>5}", "function", "icp", "cc", "cogc")?;
        for m in &self.per_function {
            writeln!(f, "{:<width$}  {:>5}  {:>5}  {:>5}", m.name, m.icp, m.cc, m.cogc)?;
        }
        let t = &self.unit_totals;
        writeln!(f, "{:<width$}  {:>5}  {:>5}  {:>5}", "total", t.icp, t.cc, t.cogc)
    }
}

pub fn unit_report(unit: &SourceUnit) -> Result<ComplexityReport, SourceError> {
    unit_report_with(unit, &IcpCostTable::default())
}

pub fn unit_report_with(unit: &SourceUnit, table: &IcpCostTable) -> Result<ComplexityReport, SourceError> {
    Ok(ComplexityReport::from_functions(&parse_functions(unit)?, table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Delta {
    Decrease,
    Increase,
    NoChange,
}

pub fn delta_class(before: u32, after: u32) -> Delta {
    match after.cmp(&before) {
        std::cmp::Ordering::Less => Delta::Decrease,
        std::cmp::Ordering::Greater => Delta::Increase,
        std::cmp::Ordering::Equal => Delta::NoChange,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_text;

    fn only(src: &str) -> FunctionUnit {
        let mut fns = parse_text(src).unwrap().functions;
        assert_eq!(fns.len(), 1);
        fns.remove(0)
    }

    fn cfg_cc(src: &str) -> i64 {
        cyclomatic_via_cfg(&ControlFlowGraph::build(&only(src))).unwrap()
    }

    #[test]
    fn straight_line_graph_has_two_nodes() {
        let g = ControlFlowGraph::build(&only("def f(a):\n    b = a\n    return b\n"));
        assert_eq!((g.nodes, g.edges, g.components), (2, 1, 1));
        assert_eq!(cyclomatic_via_cfg(&g), Ok(1));
    }

    #[test]
    fn single_if_is_a_diamond() {
        let g = ControlFlowGraph::build(&only("def f(a):\n    if a:\n        a = 1\n    return a\n"));
        assert_eq!((g.nodes, g.edges, g.components), (4, 4, 1));
        assert_eq!(cyclomatic_via_cfg(&g), Ok(2));
    }

    #[test]
    fn invalid_graph_is_rejected() {
        assert!(cyclomatic_via_cfg(&ControlFlowGraph::from_counts(5, 2, 1)).is_err());
        assert!(cyclomatic_via_cfg(&ControlFlowGraph::from_counts(2, 1, 0)).is_err());
        assert_eq!(cyclomatic_via_cfg(&ControlFlowGraph::from_counts(4, 4, 1)), Ok(2));
    }

    #[test]
    fn graph_and_decision_count_agree_on_jumps() {
        let cases = [
            "def f(xs):\n    for x in xs:\n        if x:\n            break\n        if x < 0:\n            continue\n    else:\n        return 1\n    return 0\n",
            "def f(a):\n    try:\n        return a / 0\n    except ZeroDivisionError:\n        return 0\n    except TypeError:\n        raise\n    finally:\n        a = 1\n",
            "def f(a):\n    if a:\n        return 1\n    elif a is None:\n        return 2\n    else:\n        return 3\n",
            "def f(a):\n    def g(b):\n        while b:\n            if b > 3:\n                return b\n            b -= 1\n        return 0\n    return g(a)\n",
            "def f(a):\n    return a\n    if a:\n        pass\n",
        ];
        for src in cases {
            assert_eq!(cfg_cc(src), cyclomatic(&only(src)) as i64, "{src}");
        }
    }

    #[test]
    fn icp_surcharge_adds_per_depth() {
        let f = only("def f(a):\n    if a:\n        while a:\n            a -= 1\n");
        assert_eq!(icp(&f, &IcpCostTable::default()), 2);
        let table = IcpCostTable { nesting_surcharge: 2, ..IcpCostTable::default() };
        assert_eq!(icp(&f, &table), 4);
    }

    #[test]
    fn empty_unit_totals_are_zero() {
        let r = unit_report(&SourceUnit::original("t", "")).unwrap();
        assert!(r.per_function.is_empty());
        assert!(r.no_functions);
        assert_eq!(r.unit_totals, Totals::default());
    }

    #[test]
    fn totals_are_sums() {
        let src = "def f(a):\n    if a:\n        return 1\n    return 2\n\ndef g(xs):\n    for x in xs:\n        print(x)\n";
        let r = unit_report(&SourceUnit::original("t", src)).unwrap();
        assert_eq!(r.per_function.len(), 2);
        assert_eq!(r.unit_totals, Totals { icp: 2, cc: 4, cogc: 2 });
    }

    #[test]
    fn delta_classes() {
        assert_eq!(delta_class(4, 1), Delta::Decrease);
        assert_eq!(delta_class(3, 3), Delta::NoChange);
        assert_eq!(delta_class(2, 5), Delta::Increase);
    }
}
