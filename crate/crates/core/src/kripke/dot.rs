//! Graphviz export. Clusters are drawn as rounded boxes, irreflexive points
//! filled and reflexive points open; self-loops are left implicit.

use std::fmt::Write;

use super::{clusters, Model};
use crate::bisim::BisimRelation;

#[derive(Clone, Debug, Default)]
pub struct DotOptions<'a> {
    pub name: Option<&'a str>,
    /// Highlighted worlds (drawn with a double border).
    pub roots: &'a [usize],
    /// Extra edges within the model, drawn dashed and undirected.
    pub dashed: Option<&'a BisimRelation>,
}

fn label(m: &Model, x: usize) -> String {
    let vars: Vec<&str> = m
        .signature()
        .iter()
        .filter(|v| m.holds(v, x).unwrap_or(false))
        .collect();
    if vars.is_empty() {
        format!("{x}")
    } else {
        format!("{x}: {}", vars.join(","))
    }
}

pub fn model_to_dot(m: &Model, opts: &DotOptions<'_>) -> String {
    let mut out = String::new();
    let name = opts.name.unwrap_or("model");
    writeln!(out, "digraph \"{name}\" {{").unwrap();
    writeln!(out, "  compound=true;").unwrap();
    writeln!(out, "  node [shape=circle, fontsize=10];").unwrap();
    let node = |out: &mut String, x: usize, indent: &str| {
        let filled = !m.frame().is_reflexive_at(x);
        let style = if filled { "filled" } else { "solid" };
        let fill = if filled { ", fillcolor=gray30, fontcolor=white" } else { "" };
        let periph = if opts.roots.contains(&x) { ", peripheries=2" } else { "" };
        writeln!(out, "{indent}w{x} [label=\"{}\", style={style}{fill}{periph}];", label(m, x)).unwrap();
    };
    match clusters(m.frame()) {
        Ok(cd) => {
            for c in 0..cd.num_clusters() {
                let ms = cd.members(c);
                if ms.len() == 1 {
                    node(&mut out, ms[0], "  ");
                    continue;
                }
                writeln!(out, "  subgraph cluster_{c} {{").unwrap();
                writeln!(out, "    style=rounded;").unwrap();
                for &x in ms {
                    node(&mut out, x, "    ");
                }
                writeln!(out, "  }}").unwrap();
            }
        }
        Err(_) => {
            for x in 0..m.len() {
                node(&mut out, x, "  ");
            }
        }
    }
    for (x, y) in m.frame().edges() {
        if x != y {
            writeln!(out, "  w{x} -> w{y};").unwrap();
        }
    }
    if let Some(rel) = opts.dashed {
        for (x, y) in rel.pairs() {
            if x < y || (x != y && !rel.contains(y, x)) {
                writeln!(out, "  w{x} -> w{y} [style=dashed, dir=none, constraint=false, color=gray50];").unwrap();
            }
        }
    }
    writeln!(out, "}}").unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn clusters_and_fill() {
        let (m, r) = fixtures::wk4_gap_phi_model();
        let dot = model_to_dot(
            &m,
            &DotOptions {
                roots: &[r],
                ..Default::default()
            },
        );
        assert!(dot.contains("subgraph cluster_0"));
        assert!(dot.contains("w0 [label=\"0: p\", style=filled"));
        assert!(dot.contains("w1 [label=\"1\", style=solid"));
        assert!(dot.contains("peripheries=2"));
        assert!(dot.contains("w0 -> w1;"));
        assert!(!dot.contains("w1 -> w1"));
    }

    #[test]
    fn dashed_relation() {
        let (m, _, _) = fixtures::wk4_gap_union();
        let rel = BisimRelation::from_pairs(4, 4, [(0, 2), (2, 0)]).unwrap();
        let dot = model_to_dot(
            &m,
            &DotOptions {
                dashed: Some(&rel),
                ..Default::default()
            },
        );
        assert_eq!(dot.matches("style=dashed").count(), 1);
    }
}
