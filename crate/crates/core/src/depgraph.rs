//! Dependency graphs: which (object, label) pairs can produce which.
//!
//! Every rule contributes edges from its subject pair to the pairs of its
//! products, ignoring multiplicities. A graph compiles back into a system
//! whose only membrane is the environment and whose only rules are
//! evolutions `[v -> S(v)]_env`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::Digraph;
use crate::system::{LabelId, Membrane, MembraneSystem, Multiset, ObjectId, Rule};

/// An (object, label) pair, named `object@label`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DepNode {
    pub object: ObjectId,
    pub label: LabelId,
}

impl DepNode {
    pub fn new(object: impl Into<ObjectId>, label: impl Into<LabelId>) -> Self {
        DepNode {
            object: object.into(),
            label: label.into(),
        }
    }

    pub fn name(&self) -> String {
        node_name(&self.object, &self.label)
    }
}

impl From<ObjectId> for DepNode {
    fn from(object: ObjectId) -> Self {
        DepNode {
            object,
            label: LabelId::env(),
        }
    }
}

pub fn node_name(object: &ObjectId, label: &LabelId) -> String {
    format!("{object}@{label}")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DependencyGraph {
    pub graph: Digraph,
    pub in_set: BTreeSet<String>,
    pub yes: String,
    pub no: String,
}

impl DependencyGraph {
    /// A graph holding just the two signal nodes.
    pub fn new(yes: impl Into<String>, no: impl Into<String>) -> Self {
        let (yes, no) = (yes.into(), no.into());
        let mut graph = Digraph::new();
        graph.add_node(yes.clone());
        graph.add_node(no.clone());
        DependencyGraph {
            graph,
            in_set: BTreeSet::new(),
            yes,
            no,
        }
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.graph.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.graph.edges
    }

    pub fn add_edge(&mut self, u: impl Into<String>, v: impl Into<String>) {
        self.graph.add_edge(u, v);
    }

    pub fn add_in(&mut self, v: impl Into<String>) {
        let v = v.into();
        self.graph.add_node(v.clone());
        self.in_set.insert(v);
    }

    /// The same graph with the two signal nodes exchanged.
    pub fn swapped_signals(&self) -> Self {
        DependencyGraph {
            yes: self.no.clone(),
            no: self.yes.clone(),
            ..self.clone()
        }
    }

    /// Nodes with an incident edge, in-set nodes and the signal nodes.
    pub fn live_nodes(&self) -> BTreeSet<&str> {
        let mut live = self.graph.touched_nodes();
        live.extend(self.in_set.iter().map(String::as_str));
        live.insert(self.yes.as_str());
        live.insert(self.no.as_str());
        live
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DepGraphError {
    #[error("rule {} is a dissolution rule; dependency graphs need a dissolution-free system", .0 + 1)]
    DissolutionPresent(usize),
}

impl DepGraphError {
    pub fn code(&self) -> &'static str {
        match self {
            DepGraphError::DissolutionPresent(_) => "DISSOLUTION_PRESENT",
        }
    }
}

pub fn build_dependency_graph(sys: &MembraneSystem) -> Result<DependencyGraph, DepGraphError> {
    build_dependency_graph_with_input(sys, &Multiset::new())
}

/// Nodes cover the alphabet times every label used by the structure or a
/// rule. Initial contents and `input` (placed at the input label) form the
/// in-set. Send rules about a label absent from the structure have no
/// parent to route through and contribute no edge.
pub fn build_dependency_graph_with_input(
    sys: &MembraneSystem,
    input: &Multiset,
) -> Result<DependencyGraph, DepGraphError> {
    if let Some(i) = sys.rules.iter().position(|r| matches!(r, Rule::Dissolve { .. })) {
        return Err(DepGraphError::DissolutionPresent(i));
    }
    let parents = sys.parent_map();

    let mut labels: BTreeSet<&LabelId> = BTreeSet::new();
    let nodes_pre = sys.structure.preorder();
    labels.extend(nodes_pre.iter().map(|(m, _)| &m.label));
    for r in &sys.rules {
        labels.extend(r.labels());
    }
    if let Some(h) = &sys.input_label {
        labels.insert(h);
    }
    let env = LabelId::env();
    labels.insert(&env);

    let mut g = DependencyGraph::new(node_name(&sys.yes, &env), node_name(&sys.no, &env));
    for o in &sys.alphabet {
        for h in &labels {
            g.graph.add_node(node_name(o, h));
        }
    }

    for r in &sys.rules {
        match r {
            Rule::Evolve { label, lhs, rhs } => {
                for b in rhs.support() {
                    g.add_edge(node_name(lhs, label), node_name(b, label));
                }
            }
            Rule::SendIn { label, lhs, rhs } => {
                if let Some(p) = parents.get(label) {
                    g.add_edge(node_name(lhs, p), node_name(rhs, label));
                }
            }
            Rule::SendOut { label, lhs, rhs } => {
                if let Some(p) = parents.get(label) {
                    g.add_edge(node_name(lhs, label), node_name(rhs, p));
                }
            }
            Rule::DivideElementary {
                label,
                lhs,
                first,
                second,
            }
            | Rule::DivideNonElementary {
                label,
                lhs,
                first,
                second,
                ..
            } => {
                g.add_edge(node_name(lhs, label), node_name(first, label));
                g.add_edge(node_name(lhs, label), node_name(second, label));
            }
            Rule::Dissolve { .. } => unreachable!("rejected above"),
        }
    }

    for (m, _) in &nodes_pre {
        for o in m.contents.support() {
            g.add_in(node_name(o, &m.label));
        }
    }
    if let Some(h) = &sys.input_label {
        for o in input.support() {
            g.add_in(node_name(o, h));
        }
    }
    Ok(g)
}

/// The single-membrane system of a graph: one evolution `[v -> S(v)]_env`
/// per node with successors, the in-set as initial environment contents.
pub fn graph_to_system(g: &DependencyGraph) -> MembraneSystem {
    let mut sys = MembraneSystem::empty();
    sys.alphabet = g.nodes().iter().map(|v| ObjectId::new(v.as_str())).collect();
    sys.yes = ObjectId::new(g.yes.as_str());
    sys.no = ObjectId::new(g.no.as_str());
    sys.alphabet.insert(sys.yes.clone());
    sys.alphabet.insert(sys.no.clone());
    let contents: Multiset = g.in_set.iter().map(String::as_str).collect();
    sys.structure = Membrane::new(LabelId::env()).with_contents(contents);
    for (v, succ) in g.graph.adjacency() {
        if succ.is_empty() {
            continue;
        }
        sys.rules.push(Rule::Evolve {
            label: LabelId::env(),
            lhs: ObjectId::new(v),
            rhs: succ.into_iter().collect(),
        });
    }
    sys
}

/// Compiles to the dependency graph and back: a system with only the
/// environment membrane and only evolution rules.
pub fn normalize(sys: &MembraneSystem) -> Result<MembraneSystem, DepGraphError> {
    Ok(graph_to_system(&build_dependency_graph(sys)?))
}

/// Recompiling a normal-form system appends `@env` to each node name; this
/// drops such suffixes and gives bare names the `@env` suffix, so that
/// `o@h`, `o@h@env`, `v` and `v@env` name the same node in either graph.
pub fn canonical_node_name(name: &str) -> String {
    let mut s = name;
    while let Some(rest) = s.strip_suffix("@env") {
        if !rest.contains('@') {
            break;
        }
        s = rest;
    }
    if s.contains('@') {
        String::from(s)
    } else {
        format!("{s}@env")
    }
}

/// Nodes, edges, in-set, yes, no; all under canonical names.
type CanonicalGraph = (
    BTreeSet<String>,
    BTreeSet<(String, String)>,
    BTreeSet<String>,
    String,
    String,
);

fn canonical(g: &DependencyGraph) -> CanonicalGraph {
    let c = |v: &String| canonical_node_name(v);
    (
        g.nodes().iter().map(c).collect(),
        g.edges().iter().map(|(u, v)| (c(u), c(v))).collect(),
        g.in_set.iter().map(c).collect(),
        c(&g.yes),
        c(&g.no),
    )
}

/// Equality after canonical renaming of node names.
pub fn graphs_equal_canonical(a: &DependencyGraph, b: &DependencyGraph) -> bool {
    canonical(a) == canonical(b)
}

/// Differences between two graphs under canonical renaming, for reports.
pub fn canonical_differences(a: &DependencyGraph, b: &DependencyGraph) -> Vec<String> {
    let (na, ea, ia, ya, oa) = canonical(a);
    let (nb, eb, ib, yb, ob) = canonical(b);
    let mut out = Vec::new();
    for v in na.symmetric_difference(&nb) {
        out.push(format!("node {v} in only one graph"));
    }
    for (u, v) in ea.symmetric_difference(&eb) {
        out.push(format!("edge {u} -> {v} in only one graph"));
    }
    for v in ia.symmetric_difference(&ib) {
        out.push(format!("in-set node {v} in only one graph"));
    }
    if ya != yb {
        out.push(format!("yes node {ya} vs {yb}"));
    }
    if oa != ob {
        out.push(format!("no node {oa} vs {ob}"));
    }
    out
}
