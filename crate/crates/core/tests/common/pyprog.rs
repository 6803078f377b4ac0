//! Random structured Python functions with their decision counts computed on the
//! generator side, independently of the analyzer.

use proptest::prelude::*;

#[derive(Debug, Clone)]
pub enum G {
    Assign(u8),
    Return,
    Break,
    Continue,
    If { body: Vec<G>, elifs: Vec<Vec<G>>, orelse: Option<Vec<G>> },
    For(Vec<G>),
    While(Vec<G>),
    Try { body: Vec<G>, handlers: Vec<Vec<G>> },
}

pub fn stmt() -> impl Strategy<Value = G> {
    let leaf = prop_oneof![
        3 => (0u8..4).prop_map(G::Assign),
        1 => Just(G::Return),
        1 => Just(G::Break),
        1 => Just(G::Continue),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        let block = || prop::collection::vec(inner.clone(), 1..3);
        prop_oneof![
            (block(), prop::collection::vec(block(), 0..3), prop::option::of(block()))
                .prop_map(|(body, elifs, orelse)| G::If { body, elifs, orelse }),
            block().prop_map(G::For),
            block().prop_map(G::While),
            (block(), prop::collection::vec(block(), 1..3)).prop_map(|(body, handlers)| G::Try { body, handlers }),
        ]
    })
}

pub fn function() -> impl Strategy<Value = Vec<G>> {
    prop::collection::vec(stmt(), 1..4)
}

/// Branch, elif, loop and handler count; `else` is not a decision.
pub fn decisions(body: &[G]) -> u32 {
    body.iter()
        .map(|s| match s {
            G::If { body, elifs, orelse } => {
                1 + elifs.len() as u32
                    + decisions(body)
                    + elifs.iter().map(|b| decisions(b)).sum::<u32>()
                    + orelse.as_deref().map_or(0, decisions)
            }
            G::For(b) | G::While(b) => 1 + decisions(b),
            G::Try { body, handlers } => {
                handlers.len() as u32 + decisions(body) + handlers.iter().map(|b| decisions(b)).sum::<u32>()
            }
            _ => 0,
        })
        .sum()
}

/// Identifier spelling used when rendering.
#[derive(Debug, Clone, Copy)]
pub struct Names {
    pub func: &'static str,
    pub param: &'static str,
    pub vars: [&'static str; 4],
    pub index: &'static str,
}

pub const PLAIN: Names = Names { func: "f", param: "n", vars: ["a", "b", "c", "d"], index: "i" };
pub const RENAMED: Names =
    Names { func: "compute", param: "size", vars: ["first", "second", "third", "fourth"], index: "position" };

pub fn render(body: &[G], names: Names) -> String {
    let mut out = format!("def {}({}):\n", names.func, names.param);
    block(body, 1, false, names, &mut out);
    out
}

fn block(body: &[G], level: usize, in_loop: bool, nm: Names, out: &mut String) {
    let pad = "    ".repeat(level);
    for s in body {
        match s {
            G::Assign(k) => {
                let v = nm.vars[*k as usize];
                out.push_str(&format!("{pad}{v} = {} + {k}\n", nm.param));
            }
            G::Return => out.push_str(&format!("{pad}return {}\n", nm.param)),
            G::Break if in_loop => out.push_str(&format!("{pad}break\n")),
            G::Continue if in_loop => out.push_str(&format!("{pad}continue\n")),
            G::Break | G::Continue => out.push_str(&format!("{pad}{} = 0\n", nm.vars[0])),
            G::If { body, elifs, orelse } => {
                out.push_str(&format!("{pad}if {} > 1:\n", nm.param));
                block(body, level + 1, in_loop, nm, out);
                for (k, b) in elifs.iter().enumerate() {
                    out.push_str(&format!("{pad}elif {} == {}:\n", nm.param, k + 2));
                    block(b, level + 1, in_loop, nm, out);
                }
                if let Some(b) = orelse {
                    out.push_str(&format!("{pad}else:\n"));
                    block(b, level + 1, in_loop, nm, out);
                }
            }
            G::For(b) => {
                out.push_str(&format!("{pad}for {} in range({}):\n", nm.index, nm.param));
                block(b, level + 1, true, nm, out);
            }
            G::While(b) => {
                out.push_str(&format!("{pad}while {} < 10:\n", nm.param));
                block(b, level + 1, true, nm, out);
            }
            G::Try { body, handlers } => {
                out.push_str(&format!("{pad}try:\n"));
                block(body, level + 1, in_loop, nm, out);
                for b in handlers {
                    out.push_str(&format!("{pad}except ValueError:\n"));
                    block(b, level + 1, in_loop, nm, out);
                }
            }
        }
    }
}
