//! Edge-list formats.
//!
//! Dependency graphs:
//!
//! ```text
//! @nodes in x yes no
//! @in in
//! @edges
//! in x
//! x yes
//! ```
//!
//! `@yes v` / `@no v` pick other signal nodes (default `yes` and `no`).
//! Plain s-t digraphs use `@nodes`, `@edges`, `@s` and `@t`; without
//! `@nodes` the node set is whatever the edges and markers mention.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use memdep_core::depgraph::DependencyGraph;
use memdep_core::graph::Digraph;
use memdep_core::reductions::StconInstance;
use memdep_core::system::is_object_token;

use super::lex::{lex, Cursor, Line};
use super::{ErrorCode, LocatedError, ParseError, SourceSpan};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Nodes,
    In,
    Edges,
}

type Named = (String, SourceSpan);

#[derive(Default)]
struct Raw {
    nodes: Option<Vec<Named>>,
    in_set: Vec<Named>,
    edges: Vec<(Named, Named)>,
    marks: Vec<(String, Named)>,
}

fn node(cur: &mut Cursor<'_>) -> Result<Named, ParseError> {
    let (w, span) = cur.word("a node name")?;
    if w.starts_with('@') || !is_object_token(w) {
        return Err(ParseError::syntax(span, format!("bad node name `{w}`")));
    }
    Ok((w.to_string(), span))
}

/// Shared reader; `marks` are the single-node directives allowed.
fn read(text: &str, marks: &[&str]) -> Result<Raw, ParseError> {
    let lines: Vec<Line> = lex(text)?;
    let mut raw = Raw::default();
    let mut section = Section::None;
    for line in &lines {
        let mut start = 0;
        if let Some((name, span)) = line.directive() {
            start = 1;
            section = match name {
                "nodes" => {
                    raw.nodes.get_or_insert_with(Vec::new);
                    Section::Nodes
                }
                "in" if !marks.contains(&"s") => Section::In,
                "edges" => Section::Edges,
                m if marks.contains(&m) => {
                    if raw.marks.iter().any(|(k, _)| k == m) {
                        return Err(ParseError::syntax(span, format!("second @{m} line")));
                    }
                    let mut cur = Cursor::new(line, 1);
                    let v = node(&mut cur)?;
                    cur.end()?;
                    raw.marks.push((m.to_string(), v));
                    start = line.tokens.len();
                    Section::None
                }
                other => return Err(ParseError::syntax(span, format!("unknown section @{other}"))),
            };
            if start >= line.tokens.len() {
                continue;
            }
        }
        let mut cur = Cursor::new(line, start);
        match section {
            Section::None => return Err(ParseError::syntax(cur.span(), "content outside any section")),
            Section::Nodes => {
                while !cur.at_end() {
                    let v = node(&mut cur)?;
                    raw.nodes.as_mut().expect("opened").push(v);
                }
            }
            Section::In => {
                while !cur.at_end() {
                    raw.in_set.push(node(&mut cur)?);
                }
            }
            Section::Edges => {
                let u = node(&mut cur)?;
                let v = node(&mut cur)?;
                cur.end()?;
                raw.edges.push((u, v));
            }
        }
    }
    Ok(raw)
}

fn mark<'a>(raw: &'a Raw, m: &str) -> Option<&'a Named> {
    raw.marks.iter().find(|(k, _)| k == m).map(|(_, v)| v)
}

fn check_declared<'a>(
    declared: &BTreeSet<&str>,
    uses: impl Iterator<Item = &'a Named>,
    errors: &mut Vec<LocatedError>,
) {
    for (v, span) in uses {
        if !declared.contains(v.as_str()) {
            errors.push(LocatedError {
                code: ErrorCode::UndeclaredNode,
                message: format!("node `{v}` is not listed under @nodes"),
                span: *span,
            });
        }
    }
}

pub fn parse_graph(text: &str) -> Result<DependencyGraph, ParseError> {
    let raw = read(text, &["yes", "no"])?;
    let nodes: Vec<Named> = raw.nodes.clone().unwrap_or_default();
    let declared: BTreeSet<&str> = nodes.iter().map(|(v, _)| v.as_str()).collect();
    let mut errors = Vec::new();
    check_declared(&declared, raw.in_set.iter(), &mut errors);
    check_declared(&declared, raw.edges.iter().flat_map(|(u, v)| [u, v]), &mut errors);

    let yes = mark(&raw, "yes")
        .cloned()
        .unwrap_or(("yes".into(), SourceSpan::start()));
    let no = mark(&raw, "no").cloned().unwrap_or(("no".into(), SourceSpan::start()));
    for (which, (v, span)) in [("yes", &yes), ("no", &no)] {
        if !declared.contains(v.as_str()) {
            errors.push(LocatedError {
                code: ErrorCode::MissingDistinguished,
                message: format!("{which} node `{v}` is not declared"),
                span: *span,
            });
        }
    }
    if yes.0 == no.0 {
        errors.push(LocatedError {
            code: ErrorCode::MissingDistinguished,
            message: format!("yes and no are both `{}`", yes.0),
            span: no.1,
        });
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span);
        return Err(ParseError { errors });
    }

    let mut g = DependencyGraph::new(yes.0, no.0);
    for (v, _) in nodes {
        g.graph.add_node(v);
    }
    for (v, _) in raw.in_set {
        g.add_in(v);
    }
    for ((u, _), (v, _)) in raw.edges {
        g.add_edge(u, v);
    }
    Ok(g)
}

/// Non-fatal remarks about a parsed graph.
pub fn graph_warnings(g: &DependencyGraph) -> Vec<String> {
    let mut out = Vec::new();
    if g.in_set.is_empty() {
        out.push("the in-set is empty".to_string());
    }
    out
}

/// `@nodes`, `@in`, the signal overrides when not the defaults, then one
/// edge per line.
pub fn serialize_graph(g: &DependencyGraph) -> String {
    let mut out = String::new();
    let names: Vec<&str> = g.nodes().iter().map(String::as_str).collect();
    let _ = writeln!(out, "@nodes {}", names.join(" "));
    if g.in_set.is_empty() {
        out.push_str("@in\n");
    } else {
        let ins: Vec<&str> = g.in_set.iter().map(String::as_str).collect();
        let _ = writeln!(out, "@in {}", ins.join(" "));
    }
    if g.yes != "yes" {
        let _ = writeln!(out, "@yes {}", g.yes);
    }
    if g.no != "no" {
        let _ = writeln!(out, "@no {}", g.no);
    }
    out.push_str("@edges\n");
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_digraph(text: &str) -> Result<StconInstance, ParseError> {
    let raw = read(text, &["s", "t"])?;
    let mut errors = Vec::new();
    if let Some(nodes) = &raw.nodes {
        let declared: BTreeSet<&str> = nodes.iter().map(|(v, _)| v.as_str()).collect();
        check_declared(&declared, raw.edges.iter().flat_map(|(u, v)| [u, v]), &mut errors);
        check_declared(&declared, raw.marks.iter().map(|(_, v)| v), &mut errors);
    }
    let end = SourceSpan {
        line: text.lines().count().max(1),
        column: 1,
        offset: text.len(),
    };
    let (s, t) = (mark(&raw, "s"), mark(&raw, "t"));
    for (which, m) in [("s", s), ("t", t)] {
        if m.is_none() {
            errors.push(LocatedError {
                code: ErrorCode::MissingDistinguished,
                message: format!("missing @{which} line"),
                span: end,
            });
        }
    }
    if !errors.is_empty() {
        errors.sort_by_key(|e| e.span);
        return Err(ParseError { errors });
    }
    let mut g = Digraph::new();
    for (v, _) in raw.nodes.iter().flatten() {
        g.add_node(v.clone());
    }
    for ((u, _), (v, _)) in &raw.edges {
        g.add_edge(u.clone(), v.clone());
    }
    Ok(StconInstance::new(
        g,
        s.expect("checked").0.clone(),
        t.expect("checked").0.clone(),
    ))
}

pub fn serialize_digraph(inst: &StconInstance) -> String {
    let mut out = String::new();
    let names: Vec<&str> = inst.graph.nodes.iter().map(String::as_str).collect();
    let _ = writeln!(out, "@nodes {}", names.join(" "));
    let _ = writeln!(out, "@s {}", inst.s);
    let _ = writeln!(out, "@t {}", inst.t);
    out.push_str("@edges\n");
    for (u, v) in &inst.graph.edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
