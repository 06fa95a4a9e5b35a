//! Active membrane systems without dissolution: a maximally parallel
//! simulator, compilation to dependency graphs over (object, label) pairs,
//! reachability deciders for the general, standard and restricted
//! acceptance conditions, and the reductions that relate them to s-t
//! connectivity.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod depgraph;
pub mod graph;
pub mod reach;
pub mod reductions;
pub mod simulator;
pub mod system;
pub mod verdict;

pub use depgraph::{build_dependency_graph, graph_to_system, graphs_equal_canonical, normalize, DependencyGraph};
pub use graph::Digraph;
pub use system::{
    validate_system, Issue, IssueCode, LabelId, Location, Membrane, MembraneSystem, Multiset, ObjectId, Rule, RuleKind,
    SystemError, ValidationReport,
};
pub use verdict::{Condition, Verdict, ViolationCode};
