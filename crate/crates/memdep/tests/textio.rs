use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use memdep::corpus::{random_system, Shape};
use memdep::textio::{
    emit_dot, parse_digraph, parse_graph, parse_system, serialize_digraph, serialize_graph, serialize_system, ErrorCode,
};
use memdep_core::depgraph::{build_dependency_graph, DependencyGraph};
use memdep_core::validate_system;

fn graph_strategy() -> impl Strategy<Value = DependencyGraph> {
    let names = prop::sample::select(vec!["in", "a", "b", "c", "x@h", "y@h@env", "yes", "no"]);
    (
        prop::collection::vec((names.clone(), names.clone()), 0..12),
        prop::collection::btree_set(names, 0..3),
    )
        .prop_map(|(edges, ins)| {
            let mut g = DependencyGraph::new("yes", "no");
            for (u, v) in edges {
                g.add_edge(u, v);
            }
            for v in ins {
                g.add_in(v);
            }
            g
        })
}

/// Strings built from the formats' own tokens, so parsers get past the
/// lexer often.
fn tokenish() -> impl Strategy<Value = String> {
    let toks = prop::sample::select(vec![
        "@objects",
        "@labels",
        "@structure",
        "@contents",
        "@rules",
        "@input",
        "@yes",
        "@no",
        "@nodes",
        "@in",
        "@edges",
        "@s",
        "@t",
        "[",
        "]",
        "]_h",
        "]_env",
        "->",
        ":",
        ";",
        "\n",
        " ",
        "a",
        "b",
        "h",
        "env",
        "yes",
        "no",
        "h#2",
        "#",
        "@",
        "x@h",
        "]_",
        "-",
        "é",
    ]);
    prop::collection::vec(toks, 0..40).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn systems_round_trip(seed in any::<u64>(), shape in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, Shape::ALL[shape]);
        let text = serialize_system(&sys);
        let back = parse_system(&text).unwrap();
        prop_assert_eq!(&back, &sys);
        prop_assert_eq!(validate_system(&back), validate_system(&sys));
        prop_assert_eq!(serialize_system(&back), text);
        prop_assert_eq!(build_dependency_graph(&back), build_dependency_graph(&sys));
    }

    #[test]
    fn graphs_round_trip(g in graph_strategy()) {
        let text = serialize_graph(&g);
        prop_assert_eq!(parse_graph(&text).unwrap(), g.clone());
        prop_assert_eq!(emit_dot(&g, false), emit_dot(&parse_graph(&text).unwrap(), false));
    }

    #[test]
    fn digraphs_round_trip(g in graph_strategy()) {
        let inst = memdep_core::reductions::StconInstance::new(g.graph.clone(), "in", "a");
        prop_assert_eq!(parse_digraph(&serialize_digraph(&inst)).unwrap(), inst);
    }

    #[test]
    fn parsing_arbitrary_text_is_total(s in any::<String>()) {
        let _ = parse_system(&s);
        let _ = parse_graph(&s);
        let _ = parse_digraph(&s);
    }

    #[test]
    fn parsing_token_soup_is_total(s in tokenish()) {
        for e in parse_system(&s).err().into_iter().flat_map(|e| e.errors) {
            prop_assert!(e.span.line >= 1 && e.span.column >= 1 && e.span.offset <= s.len());
        }
        for e in parse_graph(&s).err().into_iter().flat_map(|e| e.errors) {
            prop_assert!(e.span.line >= 1 && e.span.column >= 1 && e.span.offset <= s.len());
        }
        let _ = parse_digraph(&s);
    }
}

#[test]
fn every_rule_form_round_trips() {
    let text = "@objects yes no a b c d e f g\n@labels h h0 h1 h2 h3\n@structure [env [h] [h0 [h1] [h2] [h3]]]\n\
                @contents h: a\n@rules\n[a -> b b c]_h\na []_h -> [b]_h\n[a]_h -> []_h b\n[a]_h -> b\n\
                [a]_h -> [b]_h [c]_h\n[d [h1][h2][h3]]_h0 -> [e [h1][h3]]_h0 [f [h2][h3]]_h0\n[g -> ]_h\n";
    let sys = parse_system(text).unwrap();
    let kinds: String = sys.rules.iter().map(|r| r.kind().letter()).collect();
    assert_eq!(kinds, "abcdefa");
    assert!(!sys.is_dissolution_free());
    assert_eq!(parse_system(&serialize_system(&sys)).unwrap(), sys);
}

#[test]
fn multiset_contents_serialize_sorted_with_repeats() {
    let sys = parse_system("@objects yes no a b\n@labels h\n@structure [env [h]]\n@contents h: b a a\n").unwrap();
    assert!(serialize_system(&sys).contains("@contents h: a a b\n"));
}

#[test]
fn unknown_rule_label_is_located() {
    let err =
        parse_system("@objects yes no a\n@labels h\n@structure [env [h]]\n@rules\n[a]_k -> []_k yes\n").unwrap_err();
    assert_eq!(err.first().code.as_str(), "UNKNOWN_LABEL");
    assert_eq!(err.first().span.line, 5);
}

#[test]
fn ambiguous_parent_is_rejected() {
    let err = parse_system("@objects yes no\n@labels p1 p2 h\n@structure [env [p1 [h]] [p2 [h]]]\n").unwrap_err();
    assert!(
        err.errors.iter().any(|e| e.code.as_str() == "AMBIGUOUS_PARENT"),
        "{err}"
    );
}

#[test]
fn graph_errors() {
    let e = parse_graph("@nodes in yes\n@in in\n@edges\nin yes\n").unwrap_err();
    assert!(e.has(ErrorCode::MissingDistinguished));
    let e = parse_graph("@nodes in yes no\n@edges\nin q\n").unwrap_err();
    assert!(e.has(ErrorCode::UndeclaredNode));
    assert_eq!(
        e.to_string(),
        "3:4: UNDECLARED_NODE: node `q` is not listed under @nodes"
    );
}
