use std::fmt::Write as _;

use memdep_core::depgraph::DependencyGraph;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering. In-set nodes are boxes, the signals have double
/// outlines (`no` also dashed). With `prune`, nodes without edges are left
/// out unless they are in the in-set or a signal.
pub fn emit_dot(g: &DependencyGraph, prune: bool) -> String {
    let live = g.live_nodes();
    let mut out = String::from("digraph dependency {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for v in g.nodes() {
        if prune && !live.contains(v.as_str()) {
            continue;
        }
        let mut attrs: Vec<&str> = Vec::new();
        if g.in_set.contains(v) {
            attrs.push("shape=box");
        }
        if *v == g.yes {
            attrs.push("peripheries=2");
        }
        if *v == g.no {
            attrs.push("peripheries=2");
            attrs.push("style=dashed");
        }
        if attrs.is_empty() {
            let _ = writeln!(out, "  {};", quote(v));
        } else {
            let _ = writeln!(out, "  {} [{}];", quote(v), attrs.join(", "));
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  {} -> {};", quote(u), quote(v));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrows(dot: &str) -> usize {
        dot.lines().filter(|l| l.contains("->")).count()
    }

    #[test]
    fn one_edge_one_arrow() {
        let mut g = DependencyGraph::new("yes", "no");
        g.add_in("in");
        g.add_edge("in", "yes");
        g.graph.add_node("lonely");
        let dot = emit_dot(&g, false);
        assert_eq!(arrows(&dot), 1);
        assert_eq!(dot, emit_dot(&g, false));
        assert!(dot.contains("\"in\" [shape=box];"));
        assert!(dot.contains("lonely"));
        assert!(!emit_dot(&g, true).contains("lonely"));
    }

    #[test]
    fn two_chain_fixture_has_thirteen_arrows() {
        let mut g = DependencyGraph::new("yes", "no");
        g.add_in("in");
        let mut prev = String::from("in");
        for k in 1..6 {
            let n = format!("n{k}");
            g.add_edge(prev, n.clone());
            prev = n;
        }
        g.add_edge(prev, "no");
        let mut prev = String::from("in");
        for k in 1..7 {
            let n = format!("y{k}");
            g.add_edge(prev, n.clone());
            prev = n;
        }
        g.add_edge(prev, "yes");
        assert_eq!(arrows(&emit_dot(&g, true)), 13);
    }
}
