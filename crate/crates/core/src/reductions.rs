//! Reductions from s-t connectivity problems to the acceptance-condition
//! reachability problems.
//!
//! Each construction pads with a fresh chain of |V|+1 edges so that the
//! padded signal is strictly further away than any simple path in the
//! original graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::depgraph::DependencyGraph;
use crate::graph::Digraph;
use crate::reach::solve_stcon;

/// A digraph with two marked nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StconInstance {
    pub graph: Digraph,
    pub s: String,
    pub t: String,
}

impl StconInstance {
    pub fn new(graph: Digraph, s: impl Into<String>, t: impl Into<String>) -> Self {
        let (s, t) = (s.into(), t.into());
        let mut graph = graph;
        graph.add_node(s.clone());
        graph.add_node(t.clone());
        StconInstance { graph, s, t }
    }

    pub fn holds(&self) -> bool {
        solve_stcon(&self.graph, &self.s, &self.t)
    }
}

/// Two instances on disjoint node sets; exactly one should have an s-t path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromisePair {
    pub g: StconInstance,
    pub g_prime: StconInstance,
}

/// An instance whose graph is acyclic with every out-degree at most one.
pub type ForestInstance = StconInstance;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("promise violated: the s-t path exists in {0} of the two components")]
    PromiseViolated(usize),
    #[error("component graph is not acyclic")]
    NotAcyclic,
    #[error("the two components share node `{0}`")]
    OverlappingComponents(String),
    #[error("malformed forest: {0}")]
    MalformedForest(String),
}

impl ReductionError {
    pub fn code(&self) -> &'static str {
        match self {
            ReductionError::PromiseViolated(_) => "PROMISE_VIOLATED",
            ReductionError::NotAcyclic => "NOT_ACYCLIC",
            ReductionError::OverlappingComponents(_) => "OVERLAPPING_COMPONENTS",
            ReductionError::MalformedForest(_) => "MALFORMED_FOREST",
        }
    }
}

/// `base` if unused, else the first free `base_1`, `base_2`, ...
pub fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return String::from(base);
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|c| !taken.contains(c))
        .expect("unbounded")
}

/// Output name for every original node. `fixed` pins some nodes to given
/// names; the rest keep theirs unless that collides with a pinned name or
/// `reserved`, in which case a suffix is added.
fn rename(nodes: &BTreeSet<String>, fixed: &[(&str, &str)], reserved: &[&str]) -> BTreeMap<String, String> {
    let mut taken: BTreeSet<String> = nodes.clone();
    taken.extend(fixed.iter().map(|(_, to)| String::from(*to)));
    taken.extend(reserved.iter().map(|r| String::from(*r)));
    let blocked: BTreeSet<&str> = fixed
        .iter()
        .map(|(_, to)| *to)
        .chain(reserved.iter().copied())
        .collect();
    let mut out = BTreeMap::new();
    for v in nodes {
        let name = if let Some((_, to)) = fixed.iter().find(|(from, _)| from == v) {
            String::from(*to)
        } else if blocked.contains(v.as_str()) {
            let n = fresh(v, &taken);
            taken.insert(n.clone());
            n
        } else {
            v.clone()
        };
        out.insert(v.clone(), name);
    }
    out
}

fn copy_edges(out: &mut DependencyGraph, g: &Digraph, names: &BTreeMap<String, String>) {
    for v in &g.nodes {
        out.graph.add_node(names[v].clone());
    }
    for (u, v) in &g.edges {
        out.add_edge(names[u].clone(), names[v].clone());
    }
}

/// Adds a path of `edges` edges from `from` to `to` through fresh nodes
/// `<prefix>1 ..`.
fn pad(out: &mut DependencyGraph, from: &str, to: &str, prefix: &str, edges: usize) {
    let mut prev = String::from(from);
    for k in 1..edges {
        let node = fresh(&format!("{prefix}{k}"), &out.graph.nodes);
        out.add_edge(prev, node.clone());
        prev = node;
    }
    out.add_edge(prev, to);
}

/// `s` becomes `in`, `t` becomes `yes`, and a fresh `no` hangs off `in` at
/// distance |V|+1. Cyclic inputs are allowed.
pub fn reduce_stcon_to_general(inst: &StconInstance) -> DependencyGraph {
    let n = inst.graph.nodes.len();
    let fixed: Vec<(&str, &str)> = if inst.s == inst.t {
        alloc::vec![(inst.s.as_str(), "yes")]
    } else {
        alloc::vec![(inst.s.as_str(), "in"), (inst.t.as_str(), "yes")]
    };
    let names = rename(&inst.graph.nodes, &fixed, &["in", "yes", "no"]);
    let mut out = DependencyGraph::new("yes", "no");
    copy_edges(&mut out, &inst.graph, &names);
    let start = names[&inst.s].clone();
    out.add_in(start.clone());
    pad(&mut out, &start, "no", "p", n + 1);
    out
}

/// True iff exactly one of the two components has its s-t path.
pub fn verify_promise(pair: &PromisePair) -> bool {
    pair.g.holds() != pair.g_prime.holds()
}

/// A fresh `in` with edges to both sources; each target reaches its signal
/// through |V|+1 padding edges, |V| counting both components.
pub fn reduce_stcon_pair_to_standard(pair: &PromisePair) -> Result<DependencyGraph, ReductionError> {
    let (g, h) = (&pair.g, &pair.g_prime);
    if let Some(v) = g.graph.nodes.intersection(&h.graph.nodes).next() {
        return Err(ReductionError::OverlappingComponents(v.clone()));
    }
    if !g.graph.is_acyclic() || !h.graph.is_acyclic() {
        return Err(ReductionError::NotAcyclic);
    }
    if !verify_promise(pair) {
        return Err(ReductionError::PromiseViolated(
            usize::from(g.holds()) + usize::from(h.holds()),
        ));
    }
    let n = g.graph.nodes.len() + h.graph.nodes.len();
    let mut all = g.graph.clone();
    all.nodes.extend(h.graph.nodes.iter().cloned());
    all.edges.extend(h.graph.edges.iter().cloned());
    let names = rename(&all.nodes, &[], &["in", "yes", "no"]);

    let mut out = DependencyGraph::new("yes", "no");
    copy_edges(&mut out, &all, &names);
    out.add_in("in");
    out.add_edge("in", names[&g.s].clone());
    out.add_edge("in", names[&h.s].clone());
    pad(&mut out, &names[&g.t].clone(), "yes", "p", n + 1);
    pad(&mut out, &names[&h.t].clone(), "no", "q", n + 1);
    Ok(out)
}

/// Checks out-degrees and acyclicity.
pub fn check_forest(f: &ForestInstance) -> Result<(), ReductionError> {
    if let Some(v) = f.graph.nodes.iter().find(|v| f.graph.out_degree(v) > 1) {
        return Err(ReductionError::MalformedForest(format!(
            "node `{v}` has out-degree {}",
            f.graph.out_degree(v)
        )));
    }
    if let Some(c) = f.graph.find_cycle() {
        return Err(ReductionError::MalformedForest(format!("cycle through `{}`", c[0])));
    }
    Ok(())
}

/// Cuts the edge leaving `t`, renames `s` to `in`, pads `t` to `yes`, and
/// routes every other sink to a fresh `no`.
pub fn reduce_dfa_to_restricted(f: &ForestInstance) -> Result<DependencyGraph, ReductionError> {
    check_forest(f)?;
    let n = f.graph.nodes.len();
    let names = rename(&f.graph.nodes, &[(f.s.as_str(), "in")], &["in", "yes", "no"]);
    let mut cut = f.graph.clone();
    cut.edges.retain(|(u, _)| u != &f.t);

    let mut out = DependencyGraph::new("yes", "no");
    copy_edges(&mut out, &cut, &names);
    out.add_in("in");
    pad(&mut out, &names[&f.t].clone(), "yes", "p", n + 1);
    let sinks: Vec<String> = out
        .nodes()
        .iter()
        .filter(|v| **v != out.yes && **v != out.no && out.graph.is_sink(v))
        .cloned()
        .collect();
    for v in sinks {
        out.add_edge(v, "no");
    }
    Ok(out)
}
