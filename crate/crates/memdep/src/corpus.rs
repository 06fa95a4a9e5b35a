//! Seeded instance generators: recognizer systems for the agreement
//! harness, and digraphs, promise pairs and forests for the reduction
//! sweeps.
//!
//! Generated systems live in the fixed structure
//! `[env [skin [e1] [n1 [c1] [c2] [c3]]]]`. Every object ("token") has at
//! most one rule, and the generator tracks the step at which each token
//! fires so that no two membrane-level rules claim the same label in the
//! same step. A candidate is kept only if the lexicographic run never
//! leaves an object waiting ([`simulator::stalled_steps`] is empty) and
//! exhaustive exploration gives a single decided verdict under at least
//! one condition.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use memdep_core::depgraph::build_dependency_graph;
use memdep_core::graph::Digraph;
use memdep_core::reach::classify;
use memdep_core::reductions::{ForestInstance, PromisePair, StconInstance};
use memdep_core::simulator::{self, ExploreLimits, Limits};
use memdep_core::{Condition, LabelId, Membrane, MembraneSystem, Multiset, ObjectId, Rule, RuleKind, Verdict};

pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_CORPUS_SIZE: usize = 24;

const LABELS: [&str; 7] = ["env", "skin", "e1", "n1", "c1", "c2", "c3"];

fn parent(h: &str) -> Option<&'static str> {
    match h {
        "env" => None,
        "skin" => Some("env"),
        "e1" | "n1" => Some("skin"),
        _ => Some("n1"),
    }
}

/// Fewest steps from a token in `h` to a signal in the environment.
fn steps_to_signal(h: &str) -> u32 {
    match h {
        "env" | "skin" => 1,
        "e1" | "n1" => 2,
        _ => 3,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Every branch releases `yes` in the same, final step.
    Balanced { accept: bool },
    /// As `Balanced`, but some branches stop early without a signal.
    WithDeadEnds { accept: bool },
    /// Branches release either signal at various steps.
    Mixed,
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::Balanced { accept: true },
        Shape::Balanced { accept: false },
        Shape::WithDeadEnds { accept: true },
        Shape::WithDeadEnds { accept: false },
        Shape::Mixed,
    ];
}

struct Builder<'r> {
    rng: &'r mut ChaCha8Rng,
    shape: Shape,
    rules: Vec<Rule>,
    alphabet: BTreeSet<ObjectId>,
    /// (label, step) pairs whose membrane-level slot is taken.
    slots: BTreeSet<(&'static str, u32)>,
    /// Step of the non-elementary division, if any.
    divided_at: Option<u32>,
    next_token: usize,
    budget: usize,
}

enum Move {
    Evolve(Vec<&'static str>),
    SendIn(&'static str),
    SendOut,
    DivideElementary,
    DivideNonElementary,
}

impl Builder<'_> {
    fn fresh(&mut self) -> ObjectId {
        self.next_token += 1;
        let o = ObjectId::new(format!("o{}", self.next_token));
        self.alphabet.insert(o.clone());
        o
    }

    fn signal(&mut self) -> ObjectId {
        let accept = match self.shape {
            Shape::Balanced { accept } | Shape::WithDeadEnds { accept } => accept,
            Shape::Mixed => self.rng.random_bool(0.5),
        };
        ObjectId::new(if accept { "yes" } else { "no" })
    }

    fn slot_free(&self, h: &'static str, step: u32) -> bool {
        !self.slots.contains(&(h, step))
    }

    /// A token in `h` that appears at `step` and must release its signal by
    /// step `deadline`.
    fn token(&mut self, h: &'static str, step: u32, deadline: u32) -> ObjectId {
        let o = self.fresh();
        self.grow(&o, h, step, deadline);
        o
    }

    fn grow(&mut self, o: &ObjectId, h: &'static str, step: u32, deadline: u32) {
        let left = deadline - step;
        if left < steps_to_signal(h) {
            return;
        }
        let dead_end = matches!(self.shape, Shape::WithDeadEnds { .. }) && self.rng.random_bool(0.15);
        let early = matches!(self.shape, Shape::Mixed) && self.rng.random_bool(0.2);
        if dead_end && left > 1 {
            return;
        }
        let label = LabelId::new(h);
        if left == 1 || (early && steps_to_signal(h) == 1) {
            let sig = self.signal();
            if h == "env" {
                self.rules.push(Rule::Evolve {
                    label,
                    lhs: o.clone(),
                    rhs: Multiset::singleton(sig),
                });
                return;
            }
            if self.slot_free(h, step) {
                self.slots.insert((h, step));
                self.rules.push(Rule::SendOut {
                    label,
                    lhs: o.clone(),
                    rhs: sig,
                });
                return;
            }
            if left == 1 {
                // No slot left in the last step: this branch will stall and the
                // candidate is filtered out.
                self.rules.push(Rule::SendOut {
                    label,
                    lhs: o.clone(),
                    rhs: sig,
                });
                return;
            }
        }

        let fits = |g: &str| left > steps_to_signal(g);
        let mut moves: Vec<Move> = Vec::new();
        let branch = self.budget > 0;
        let here = fits(h);
        let free = self.slot_free(h, step);
        if here {
            moves.push(Move::Evolve(vec![h]));
            if branch {
                moves.push(Move::Evolve(vec![h, h]));
                moves.push(Move::Evolve(vec![h, h]));
            }
        }
        if let Some(p) = parent(h) {
            if free && fits(p) {
                moves.push(Move::SendOut);
            }
        }
        for child in LABELS.iter().copied().filter(|c| parent(c) == Some(h)) {
            let gone = self.divided_at.is_some_and(|d| d <= step) && (child == "c1" || child == "c2");
            if fits(child) && self.slot_free(child, step) && !gone {
                moves.push(Move::SendIn(child));
            }
        }
        if branch && here && free && h == "e1" {
            moves.push(Move::DivideElementary);
            moves.push(Move::DivideElementary);
        }
        if branch && here && free && h == "n1" && self.divided_at.is_none() {
            moves.push(Move::DivideNonElementary);
            moves.push(Move::DivideNonElementary);
        }
        if moves.is_empty() {
            // Every way forward is blocked; the branch will stall and the
            // candidate is filtered out.
            moves.push(if h == "env" {
                Move::Evolve(vec![h])
            } else {
                Move::SendOut
            });
        }

        let pick = self.rng.random_range(0..moves.len());
        let next = step + 1;
        match moves.swap_remove(pick) {
            Move::Evolve(targets) => {
                if targets.len() > 1 {
                    self.budget -= 1;
                }
                let mut rhs = Multiset::new();
                for g in targets {
                    let p = self.token(g, next, deadline);
                    rhs.insert(p, 1);
                }
                self.rules.push(Rule::Evolve {
                    label,
                    lhs: o.clone(),
                    rhs,
                });
            }
            Move::SendIn(child) => {
                self.slots.insert((child, step));
                let p = self.token(child, next, deadline);
                self.rules.push(Rule::SendIn {
                    label: LabelId::new(child),
                    lhs: o.clone(),
                    rhs: p,
                });
            }
            Move::SendOut => {
                self.slots.insert((h, step));
                let p = self.token(parent(h).expect("not env"), next, deadline);
                self.rules.push(Rule::SendOut {
                    label,
                    lhs: o.clone(),
                    rhs: p,
                });
            }
            Move::DivideElementary => {
                self.budget -= 1;
                self.slots.insert((h, step));
                let first = self.token(h, next, deadline);
                let second = self.token(h, next, deadline);
                self.rules.push(Rule::DivideElementary {
                    label,
                    lhs: o.clone(),
                    first,
                    second,
                });
            }
            Move::DivideNonElementary => {
                self.budget -= 1;
                self.slots.insert((h, step));
                self.divided_at = Some(step);
                let first = self.token(h, next, deadline);
                let second = self.token(h, next, deadline);
                self.rules.push(Rule::DivideNonElementary {
                    label,
                    lhs: o.clone(),
                    first,
                    second,
                    first_child: LabelId::new("c1"),
                    second_child: LabelId::new("c2"),
                    shared_child: LabelId::new("c3"),
                });
            }
        }
    }
}

fn structure(contents: &BTreeMap<&'static str, Multiset>) -> Membrane {
    let m = |h: &'static str| Membrane::new(h).with_contents(contents.get(h).cloned().unwrap_or_default());
    m("env").with_child(
        m("skin")
            .with_child(m("e1"))
            .with_child(m("n1").with_child(m("c1")).with_child(m("c2")).with_child(m("c3"))),
    )
}

/// One candidate system of the given shape. Not filtered.
pub fn random_system(rng: &mut ChaCha8Rng, shape: Shape) -> MembraneSystem {
    let deadline = rng.random_range(3..=7);
    let mut b = Builder {
        rng,
        shape,
        rules: Vec::new(),
        alphabet: BTreeSet::new(),
        slots: BTreeSet::new(),
        divided_at: None,
        next_token: 0,
        budget: 3,
    };
    let seeds = b.rng.random_range(1..=2);
    let mut contents: BTreeMap<&'static str, Multiset> = BTreeMap::new();
    for _ in 0..seeds {
        let h = **LABELS
            .iter()
            .filter(|h| steps_to_signal(h) <= deadline)
            .collect::<Vec<_>>()
            .choose(b.rng)
            .expect("labels");
        let o = b.token(h, 0, deadline);
        contents.entry(h).or_default().insert(o, 1);
    }
    let mut rules = b.rules;
    rules.shuffle(b.rng);
    let mut alphabet = b.alphabet;
    alphabet.insert(ObjectId::new("yes"));
    alphabet.insert(ObjectId::new("no"));
    MembraneSystem {
        alphabet,
        labels: LABELS.iter().map(|h| LabelId::new(*h)).collect(),
        structure: structure(&contents),
        rules,
        input_label: Some(LabelId::new("skin")),
        yes: ObjectId::new("yes"),
        no: ObjectId::new("no"),
    }
}

/// Limits used when judging generated systems.
pub fn corpus_explore_limits() -> ExploreLimits {
    ExploreLimits {
        max_steps: 64,
        max_configs: 20_000,
        ..ExploreLimits::default()
    }
}

/// The conditions under which `sys` is a valid recognizer, with the verdict.
/// Valid means every maximally parallel computation from the initial
/// configuration gets the same decided verdict; restricted validity also
/// needs the restricted graph shape.
pub fn valid_conditions(sys: &MembraneSystem) -> BTreeMap<Condition, Verdict> {
    let Ok(ex) = simulator::explore_all(sys, &Multiset::new(), &corpus_explore_limits()) else {
        return BTreeMap::new();
    };
    let restricted_shape = build_dependency_graph(sys).is_ok_and(|g| classify(&g).restricted_ok);
    Condition::ALL
        .into_iter()
        .filter_map(|c| ex.unique(c).filter(|v| v.is_decided()).map(|v| (c, v)))
        .filter(|(c, _)| *c != Condition::Restricted || restricted_shape)
        .collect()
}

/// Whether every object of the lexicographic run evolves as soon as it
/// appears.
pub fn is_prompt(sys: &MembraneSystem) -> bool {
    let limits = Limits {
        step_limit: 64,
        ..Limits::default()
    };
    simulator::stalled_steps(sys, &Multiset::new(), &limits).is_ok_and(|s| s.is_empty())
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub system: MembraneSystem,
    pub valid: BTreeMap<Condition, Verdict>,
}

fn kinds(sys: &MembraneSystem) -> BTreeSet<RuleKind> {
    sys.rules.iter().map(Rule::kind).collect()
}

/// Extra demands per shape so the corpus is not dominated by tiny
/// single-branch systems: mixed systems must be valid under the general
/// condition only, systems with dead ends must lose restricted validity.
fn shape_target_met(shape: Shape, sys: &MembraneSystem, valid: &BTreeMap<Condition, Verdict>) -> bool {
    if sys.rules.len() < 4 {
        return false;
    }
    match shape {
        Shape::Balanced { .. } => true,
        Shape::WithDeadEnds { .. } => {
            valid.contains_key(&Condition::Standard) && !valid.contains_key(&Condition::Restricted)
        }
        Shape::Mixed => valid.keys().eq([&Condition::General]),
    }
}

/// `count` prompt systems, each valid under at least one condition, cycling
/// through the shapes. Each of the rule kinds (a), (b), (c), (e) and (f)
/// appears in at least `count / 6` systems (at least one); once the
/// remaining slots are needed for that, candidates that do not help are
/// skipped.
pub fn generate_corpus(seed: u64, count: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wanted = [
        RuleKind::Evolve,
        RuleKind::SendIn,
        RuleKind::SendOut,
        RuleKind::DivideElementary,
        RuleKind::DivideNonElementary,
    ];
    let min_uses = (count / 6).max(1);
    let mut uses: BTreeMap<RuleKind, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 500_000, "corpus generation is not converging");
        let shape = Shape::ALL[out.len() % Shape::ALL.len()];
        let sys = random_system(&mut rng, shape);
        let short: BTreeSet<RuleKind> = wanted
            .iter()
            .copied()
            .filter(|k| uses.get(k).copied().unwrap_or(0) < min_uses)
            .collect();
        let need: usize = short.iter().map(|k| min_uses - uses.get(k).copied().unwrap_or(0)).sum();
        let slots_left = count - out.len();
        if slots_left <= need && kinds(&sys).is_disjoint(&short) {
            continue;
        }
        if !is_prompt(&sys) {
            continue;
        }
        let valid = valid_conditions(&sys);
        if valid.is_empty() || !shape_target_met(shape, &sys, &valid) {
            continue;
        }
        for k in kinds(&sys) {
            *uses.entry(k).or_default() += 1;
        }
        out.push(CorpusEntry {
            name: format!("gen{:02}", out.len()),
            system: sys,
            valid,
        });
    }
    out
}

/// The digraph on `names` whose edge set is bit `i` of `mask` over the
/// ordered pairs of distinct nodes.
pub fn digraph_from_mask(names: &[&str], mask: u64) -> Digraph {
    let mut g = Digraph::new();
    for v in names {
        g.add_node(*v);
    }
    let mut bit = 0;
    for u in names {
        for v in names {
            if u == v {
                continue;
            }
            if mask >> bit & 1 == 1 {
                g.add_edge(*u, *v);
            }
            bit += 1;
        }
    }
    g
}

/// All 2^(n(n-1)) loop-free digraphs on `n` nodes, with s the first node and
/// t the last.
pub fn all_stcon_instances(n: usize) -> Vec<StconInstance> {
    let names: Vec<String> = (0..n)
        .map(|i| match i {
            0 => "s".to_string(),
            i if i == n - 1 => "t".to_string(),
            i => format!("v{i}"),
        })
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let pairs = n * n.saturating_sub(1);
    (0..1u64 << pairs)
        .map(|m| StconInstance::new(digraph_from_mask(&refs, m), refs[0], refs[n - 1]))
        .collect()
}

fn acyclic_components(names: &[&str]) -> Vec<StconInstance> {
    let n = names.len();
    (0..1u64 << (n * (n - 1)))
        .map(|m| digraph_from_mask(names, m))
        .filter(Digraph::is_acyclic)
        .map(|g| StconInstance::new(g, names[0], names[n - 1]))
        .collect()
}

/// Every pair of acyclic components with 1 to 3 nodes each for which
/// exactly one component has its s-t path. A 1-node component has s = t.
pub fn all_promise_pairs() -> Vec<PromisePair> {
    let left: Vec<StconInstance> = [&["s"][..], &["s", "t"][..], &["s", "a", "t"][..]]
        .iter()
        .flat_map(|names| acyclic_components(names))
        .collect();
    let right: Vec<StconInstance> = [&["u"][..], &["u", "w"][..], &["u", "b", "w"][..]]
        .iter()
        .flat_map(|names| acyclic_components(names))
        .collect();
    let mut out = Vec::new();
    for g in &left {
        for h in &right {
            if g.holds() != h.holds() {
                out.push(PromisePair {
                    g: g.clone(),
                    g_prime: h.clone(),
                });
            }
        }
    }
    out
}

/// A random forest on 2..=`max_nodes` nodes: each node points to at most
/// one earlier node of a random order, and s != t.
pub fn random_forest(rng: &mut ChaCha8Rng, max_nodes: usize) -> ForestInstance {
    let n = rng.random_range(2..=max_nodes.max(2));
    let mut names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    names.shuffle(rng);
    let mut g = Digraph::new();
    for v in &names {
        g.add_node(v.clone());
    }
    for i in 1..n {
        if rng.random_bool(0.7) {
            let j = rng.random_range(0..i);
            g.add_edge(names[i].clone(), names[j].clone());
        }
    }
    let s = rng.random_range(0..n);
    let t = (s + rng.random_range(1..n)) % n;
    StconInstance::new(g, names[s].clone(), names[t].clone())
}
