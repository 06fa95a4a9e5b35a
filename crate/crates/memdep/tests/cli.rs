use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn memdep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memdep"))
        .args(args)
        .env_remove("MEMDEP_MAX_STEPS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

#[test]
fn simulate_three_step_chain_accepts() {
    let o = memdep(&["simulate", &path("chain3.pms"), "--condition", "standard"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("step 3: +env{yes}"), "{out}");
    assert!(out.lines().any(|l| l == "ACCEPT"));
    assert!(out.lines().any(|l| l == "VERDICT accept"));
}

#[test]
fn simulate_cycle_hits_the_step_limit() {
    let o = memdep(&["simulate", &path("cyclic.pms"), "--max-steps", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("VERDICT violation STEP_LIMIT"));
}

#[test]
fn step_limit_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_memdep"))
        .args(["simulate", &path("cyclic.pms")])
        .env("MEMDEP_MAX_STEPS", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("halt: STEP_LIMIT at step 7"), "{}", stdout(&o));
}

#[test]
fn malformed_input_exits_3_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pms");
    std::fs::write(&bad, "@objects yes no a\n@structure [env [h]\n").unwrap();
    let o = memdep(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("SYNTAX_ERROR"), "{}", stderr(&o));
    assert!(stderr(&o).contains(":2:"), "{}", stderr(&o));
    assert_eq!(memdep(&["simulate", "/nonexistent.pms"]).status.code(), Some(3));
    assert_eq!(memdep(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn reject_exits_1() {
    let o = memdep(&["solve", &path("two_chains.dg"), "--condition", "general"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("REJECT"));
    assert!(stdout(&o).contains("VERDICT reject"));
}

#[test]
fn solve_fixtures() {
    let o = memdep(&["solve", &path("in_yes.dg"), "--condition", "standard"]);
    assert_eq!(o.status.code(), Some(0));
    let o = memdep(&["solve", &path("other_sink.dg"), "--condition", "restricted"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("VIOLATION(NOT_RESTRICTED)"));
}

#[test]
fn depgraph_matches_golden_files() {
    for name in ["chain3", "all_kinds", "divide_evolve", "gen00", "gen04", "gen17"] {
        let src = if name.starts_with("gen") {
            format!("generated/{name}.pms")
        } else {
            format!("{name}.pms")
        };
        let o = memdep(&["depgraph", &path(&src), "--check"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let golden = std::fs::read_to_string(corpus(&format!("golden/{name}.dg"))).unwrap();
        assert_eq!(stdout(&o), golden, "{name}");
        assert!(stderr(&o).contains("CHECK ok"));
    }
}

#[test]
fn depgraph_writes_files_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dg = dir.path().join("g.dg");
    let dot = dir.path().join("g.dot");
    let o = memdep(&[
        "depgraph",
        &path("chain3.pms"),
        "-o",
        dg.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--prune",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(dot).unwrap();
    assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 3);
    assert!(!dot.contains("no@h"));
    assert!(std::fs::read_to_string(dg).unwrap().contains("@edges"));
}

#[test]
fn depgraph_of_empty_and_dissolving_systems() {
    let o = memdep(&["depgraph", &path("empty.pms")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("@edges\n"));
    let o = memdep(&["depgraph", &path("dissolution.pms")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("DISSOLUTION_PRESENT"));
}

#[test]
fn reduce_stcon_general_pads_with_four_edges() {
    let o = memdep(&["reduce", "stcon-general", &path("stcon3.dig")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for e in ["in p1", "p1 p2", "p2 p3", "p3 no", "in a", "a yes"] {
        assert!(out.lines().any(|l| l == e), "missing {e}: {out}");
    }
}

#[test]
fn reduce_rejects_broken_promises() {
    let o = memdep(&[
        "reduce",
        "stcon-pair-standard",
        &path("pair_g.dig"),
        &path("pair_both.dig"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PROMISE_VIOLATED"));
    let o = memdep(&[
        "reduce",
        "stcon-pair-standard",
        &path("pair_g.dig"),
        &path("pair_g_prime.dig"),
        "--verify",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reduce_rejects_malformed_forests() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.dig");
    std::fs::write(&f, "@s s\n@t t\n@edges\ns a\ns t\n").unwrap();
    let o = memdep(&["reduce", "dfa-restricted", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("MALFORMED_FOREST"));
}

#[test]
fn reduce_sweeps_report_ok() {
    let o = memdep(&["reduce", "dfa-restricted", "--verify", "--seed", "3", "--count", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "seed=3\nOK n=200\n");
    let o = memdep(&["reduce", "stcon-general", "--verify"]);
    assert_eq!(stdout(&o), "OK n=4096\n");
}

#[test]
fn classify_reports_flags_and_witnesses() {
    let o = memdep(&["classify", &path("restricted.dg")]);
    let out = stdout(&o);
    for flag in ["acyclic", "standard_ok", "restricted_ok", "lambda_free"] {
        assert!(out.contains(&format!("{flag}=true")), "{out}");
    }
    let out = stdout(&memdep(&["classify", &path("both_reachable.dg")]));
    assert!(out.contains("witness: v leads to both yes and no"), "{out}");
    let out = stdout(&memdep(&["classify", &path("cyclic.dg")]));
    assert!(out.contains("acyclic=false"));
}

#[test]
fn normalize_is_idempotent_up_to_renaming() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.pms");
    let twice = dir.path().join("twice.pms");
    let o = memdep(&[
        "normalize",
        &path("all_kinds.pms"),
        "-o",
        once.to_str().unwrap(),
        "--check",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = memdep(&[
        "normalize",
        once.to_str().unwrap(),
        "-o",
        twice.to_str().unwrap(),
        "--check",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&once).unwrap();
    assert!(text.contains("@structure [env]"), "{text}");
    // A second pass only renames: every node n becomes n@env.
    let graph_of = |p: &std::path::Path| {
        let o = memdep(&["depgraph", p.to_str().unwrap()]);
        memdep::textio::parse_graph(&stdout(&o)).unwrap()
    };
    let (g1, g2) = (graph_of(&once), graph_of(&twice));
    let env = |n: &String| format!("{n}@env");
    let renamed: BTreeSet<_> = g1.edges().iter().map(|(u, v)| (env(u), env(v))).collect();
    assert_eq!(&renamed, g2.edges());
    assert_eq!(g1.nodes().iter().map(env).collect::<BTreeSet<_>>(), *g2.nodes());
    assert_eq!(g1.in_set.iter().map(env).collect::<BTreeSet<_>>(), g2.in_set);
    assert_eq!((env(&g1.yes), env(&g1.no)), (g2.yes.clone(), g2.no.clone()));
    assert_eq!(memdep(&["normalize", &path("dissolution.pms")]).status.code(), Some(2));
}

#[test]
fn crosscheck_outcomes() {
    let o = memdep(&["crosscheck", &path("chain3.pms")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("AGREE\n"));
    let o = memdep(&["crosscheck", &path("nonconfluent.pms")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NON-CONFLUENT {Accept,Reject}"));
    let o = memdep(&["crosscheck", &path("empty.pms")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("VIOLATION(NO_OUTPUT)"));
    assert!(stdout(&o).ends_with("AGREE\n"));
}

#[test]
fn crosscheck_every_generated_system() {
    let dir = corpus("generated");
    let mut names: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 20);
    for p in names {
        let o = memdep(&["crosscheck", p.to_str().unwrap(), "--condition", "general"]);
        assert!(stdout(&o).ends_with("AGREE\n"), "{}: {}", p.display(), stdout(&o));
    }
}

#[test]
fn exhaustive_scheduler() {
    let o = memdep(&[
        "simulate",
        &path("confluent_branching.pms"),
        "--scheduler",
        "exhaustive",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = memdep(&["simulate", &path("nonconfluent.pms"), "--scheduler", "exhaustive"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NON-CONFLUENT"));
}

#[test]
fn simulate_graph_files_and_input() {
    let o = memdep(&["simulate", &path("not_last_step.dg")]);
    assert!(stdout(&o).contains("VIOLATION(NOT_LAST_STEP)"));
    let o = memdep(&["simulate", &path("chain3.pms"), "--input", "zz"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn generated_corpus_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let o = memdep(&["corpus", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for e in std::fs::read_dir(corpus("generated")).unwrap() {
        let p = e.unwrap().path();
        let fresh = std::fs::read_to_string(dir.path().join(p.file_name().unwrap())).unwrap();
        assert_eq!(fresh, std::fs::read_to_string(&p).unwrap(), "{}", p.display());
    }
}
