//! Plain directed graphs over string-named nodes.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Digraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, v: impl Into<String>) {
        self.nodes.insert(v.into());
    }

    /// Adds the edge and both endpoints.
    pub fn add_edge(&mut self, u: impl Into<String>, v: impl Into<String>) {
        let (u, v) = (u.into(), v.into());
        self.nodes.insert(u.clone());
        self.nodes.insert(v.clone());
        self.edges.insert((u, v));
    }

    pub fn contains(&self, v: &str) -> bool {
        self.nodes.contains(v)
    }

    pub fn successors<'a>(&'a self, u: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range::<(String, String), _>((String::from(u), String::new())..)
            .take_while(move |(a, _)| a == u)
            .map(|(_, b)| b.as_str())
    }

    pub fn out_degree(&self, u: &str) -> usize {
        self.successors(u).count()
    }

    pub fn is_sink(&self, u: &str) -> bool {
        self.successors(u).next().is_none()
    }

    /// Successor lists keyed by node, including nodes without successors.
    pub fn adjacency(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = self.nodes.iter().map(|v| (v.as_str(), Vec::new())).collect();
        for (u, v) in &self.edges {
            adj.entry(u.as_str()).or_default().push(v.as_str());
        }
        adj
    }

    fn reverse_adjacency(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = self.nodes.iter().map(|v| (v.as_str(), Vec::new())).collect();
        for (u, v) in &self.edges {
            adj.entry(v.as_str()).or_default().push(u.as_str());
        }
        adj
    }

    /// Nodes reachable from `sources` (sources included).
    pub fn reachable_from<'a, I>(&self, sources: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        flood(&self.adjacency(), sources)
    }

    /// Nodes from which some target is reachable (targets included).
    pub fn reaching<'a, I>(&self, targets: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        flood(&self.reverse_adjacency(), targets)
    }

    /// A directed cycle as a node sequence `v0 .. vk` with an edge from `vk`
    /// back to `v0`, searching only from `roots` (all nodes when `None`).
    pub fn find_cycle_from(&self, roots: Option<&BTreeSet<String>>) -> Option<Vec<String>> {
        let adj = self.adjacency();
        // 0 unvisited, 1 on the stack, 2 done
        let mut color: BTreeMap<&str, u8> = BTreeMap::new();
        let starts: Vec<&str> = match roots {
            Some(r) => r.iter().map(String::as_str).filter(|v| adj.contains_key(v)).collect(),
            None => adj.keys().copied().collect(),
        };
        for start in starts {
            if color.get(start).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut path: Vec<&str> = vec![start];
            let mut iters: Vec<core::slice::Iter<'_, &str>> = vec![adj[start].iter()];
            color.insert(start, 1);
            while let Some(it) = iters.last_mut() {
                match it.next() {
                    Some(&next) => match color.get(next).copied().unwrap_or(0) {
                        0 => {
                            color.insert(next, 1);
                            path.push(next);
                            iters.push(adj[next].iter());
                        }
                        1 => {
                            let from = path.iter().position(|&v| v == next).expect("on stack");
                            return Some(path[from..].iter().map(|&v| String::from(v)).collect());
                        }
                        _ => {}
                    },
                    None => {
                        color.insert(path.pop().expect("non-empty"), 2);
                        iters.pop();
                    }
                }
            }
        }
        None
    }

    pub fn find_cycle(&self) -> Option<Vec<String>> {
        self.find_cycle_from(None)
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Nodes with at least one incident edge.
    pub fn touched_nodes(&self) -> BTreeSet<&str> {
        self.edges.iter().flat_map(|(u, v)| [u.as_str(), v.as_str()]).collect()
    }
}

fn flood<'a, I>(adj: &BTreeMap<&str, Vec<&str>>, sources: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for s in sources {
        if let Some((&k, _)) = adj.get_key_value(s) {
            if seen.insert(k) {
                queue.push_back(k);
            }
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().map(String::from).collect()
}
