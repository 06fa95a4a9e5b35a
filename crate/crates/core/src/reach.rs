//! Reachability deciders for the three acceptance conditions and the
//! structural classification of dependency graphs.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::depgraph::DependencyGraph;
use crate::graph::Digraph;
use crate::verdict::{Verdict, ViolationCode};

/// Shortest-path edge counts from the nearest source; unreachable nodes are
/// absent. Sources not in the graph are ignored.
pub fn bfs_distances<'a, I>(g: &Digraph, sources: I) -> BTreeMap<String, usize>
where
    I: IntoIterator<Item = &'a str>,
{
    let adj = g.adjacency();
    let mut dist: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for s in sources {
        if let Some((&k, _)) = adj.get_key_value(s) {
            if !dist.contains_key(k) {
                dist.insert(k, 0);
                queue.push_back(k);
            }
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        for &v in &adj[u] {
            if !dist.contains_key(v) {
                dist.insert(v, d + 1);
                queue.push_back(v);
            }
        }
    }
    dist.into_iter().map(|(k, d)| (String::from(k), d)).collect()
}

pub fn solve_stcon(g: &Digraph, s: &str, t: &str) -> bool {
    g.contains(s) && (s == t || g.reachable_from([s]).contains(t))
}

/// The signal with the strictly shorter distance from the in-set wins.
pub fn solve_general(g: &DependencyGraph) -> Verdict {
    let d = bfs_distances(&g.graph, g.in_set.iter().map(String::as_str));
    match (d.get(&g.yes), d.get(&g.no)) {
        (Some(y), Some(n)) if y < n => Verdict::Accept,
        (Some(y), Some(n)) if n < y => Verdict::Reject,
        (Some(_), Some(_)) => Verdict::Violation(ViolationCode::SameTimestep),
        (Some(_), None) => Verdict::Accept,
        (None, Some(_)) => Verdict::Reject,
        (None, None) => Verdict::Violation(ViolationCode::NoOutput),
    }
}

/// Exactly one signal must be reachable from the in-set, and the reachable
/// part must be acyclic so that every computation halts.
pub fn solve_standard(g: &DependencyGraph) -> Verdict {
    let reach = g.graph.reachable_from(g.in_set.iter().map(String::as_str));
    if g.graph.find_cycle_from(Some(&reach)).is_some() {
        return Verdict::Violation(ViolationCode::Cyclic);
    }
    match (reach.contains(&g.yes), reach.contains(&g.no)) {
        (true, true) => Verdict::Violation(ViolationCode::BothReachable),
        (false, false) => Verdict::Violation(ViolationCode::NoOutput),
        (true, false) => Verdict::Accept,
        (false, true) => Verdict::Reject,
    }
}

/// Follows the lowest-named successor from each in-node until a signal.
/// Needs a graph of restricted shape.
pub fn solve_restricted(g: &DependencyGraph) -> Verdict {
    if !classify(g).restricted_ok {
        return Verdict::Violation(ViolationCode::NotRestricted);
    }
    let mut outcome: Option<Verdict> = None;
    for start in &g.in_set {
        let v = follow_path(g, start);
        match outcome {
            None => outcome = Some(v),
            Some(prev) if prev != v => return Verdict::Violation(ViolationCode::InconsistentInSet),
            Some(_) => {}
        }
    }
    outcome.unwrap_or(Verdict::Violation(ViolationCode::NoOutput))
}

fn follow_path(g: &DependencyGraph, start: &str) -> Verdict {
    let mut x = start;
    // acyclicity bounds the walk; the bound is a guard
    for _ in 0..=g.nodes().len() {
        if x == g.yes {
            return Verdict::Accept;
        }
        if x == g.no {
            return Verdict::Reject;
        }
        match g.graph.successors(x).next() {
            Some(next) => x = next,
            None => break,
        }
    }
    Verdict::Violation(ViolationCode::NoOutput)
}

/// Nodes that eventually evolve into each signal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObjectClasses {
    pub o_yes: BTreeSet<String>,
    pub o_no: BTreeSet<String>,
    pub o_other: BTreeSet<String>,
}

impl ObjectClasses {
    pub fn overlap(&self) -> BTreeSet<&String> {
        self.o_yes.intersection(&self.o_no).collect()
    }
}

pub fn compute_object_classes(g: &DependencyGraph) -> ObjectClasses {
    let o_yes = g.graph.reaching([g.yes.as_str()]);
    let o_no = g.graph.reaching([g.no.as_str()]);
    let o_other = g
        .nodes()
        .iter()
        .filter(|v| !o_yes.contains(*v) && !o_no.contains(*v))
        .cloned()
        .collect();
    ObjectClasses { o_yes, o_no, o_other }
}

/// A witness for a failed structural check.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    /// Nodes of a directed cycle, in order.
    Cycle(Vec<String>),
    /// The cycle is reachable from the in-set.
    ReachableCycle(Vec<String>),
    /// A node that leads to both signals.
    InBothClasses(String),
    /// A live node that leads to neither signal.
    OtherNode(String),
    /// A live sink other than the signals.
    BadSink(String),
    /// An edge joining the yes side and the no side.
    CrossEdge(String, String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Cycle(c) => write!(f, "cycle: {}", c.join(" -> ")),
            Diagnostic::ReachableCycle(c) => write!(f, "cycle reachable from the in-set: {}", c.join(" -> ")),
            Diagnostic::InBothClasses(v) => write!(f, "{v} leads to both yes and no"),
            Diagnostic::OtherNode(v) => write!(f, "{v} leads to neither yes nor no"),
            Diagnostic::BadSink(v) => write!(f, "{v} is a sink other than yes/no"),
            Diagnostic::CrossEdge(u, v) => write!(f, "edge {u} -> {v} joins the yes and no sides"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionClass {
    /// Whole-graph acyclicity.
    pub acyclic: bool,
    /// Acyclicity of the part reachable from the in-set.
    pub reachable_acyclic: bool,
    pub standard_ok: bool,
    pub restricted_ok: bool,
    pub lambda_free: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Structural flags with witnesses.
///
/// The node universe includes (object, label) pairs that no rule touches;
/// the shape checks on other-nodes and sinks only look at live nodes (those
/// with an incident edge, the in-set and the signals).
pub fn classify(g: &DependencyGraph) -> ConditionClass {
    let mut diagnostics = Vec::new();

    let cycle = g.graph.find_cycle();
    let acyclic = cycle.is_none();
    if let Some(c) = cycle {
        diagnostics.push(Diagnostic::Cycle(c));
    }
    let reach = g.graph.reachable_from(g.in_set.iter().map(String::as_str));
    let reachable_cycle = g.graph.find_cycle_from(Some(&reach));
    let reachable_acyclic = reachable_cycle.is_none();
    if let Some(c) = reachable_cycle {
        diagnostics.push(Diagnostic::ReachableCycle(c));
    }

    let classes = compute_object_classes(g);
    let overlap = classes.overlap();
    diagnostics.extend(overlap.iter().map(|v| Diagnostic::InBothClasses((*v).clone())));
    let standard_ok = acyclic && overlap.is_empty();

    let live = g.live_nodes();
    let others: Vec<&str> = live.iter().copied().filter(|v| classes.o_other.contains(*v)).collect();
    diagnostics.extend(others.iter().map(|v| Diagnostic::OtherNode(String::from(*v))));

    let yes_side = |v: &String| classes.o_yes.contains(v) && !classes.o_no.contains(v);
    let no_side = |v: &String| classes.o_no.contains(v) && !classes.o_yes.contains(v);
    let cross: Vec<&(String, String)> = g
        .edges()
        .iter()
        .filter(|(u, v)| (yes_side(u) && no_side(v)) || (no_side(u) && yes_side(v)))
        .collect();
    diagnostics.extend(cross.iter().map(|(u, v)| Diagnostic::CrossEdge(u.clone(), v.clone())));

    let bad_sinks: Vec<&str> = live
        .iter()
        .copied()
        .filter(|v| *v != g.yes && *v != g.no && g.graph.is_sink(v))
        .collect();
    diagnostics.extend(bad_sinks.iter().map(|v| Diagnostic::BadSink(String::from(*v))));

    ConditionClass {
        acyclic,
        reachable_acyclic,
        standard_ok,
        restricted_ok: standard_ok && others.is_empty() && cross.is_empty(),
        lambda_free: bad_sinks.is_empty(),
        diagnostics,
    }
}
