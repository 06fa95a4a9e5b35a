//! Maximally parallel execution of dissolution-free systems, acceptance
//! judgement of computations, and exhaustive schedule exploration.
//!
//! Configurations are membrane trees rooted at the environment. Membrane
//! instances are addressed by their depth-first pre-order position, which is
//! also the order in which the lexicographic scheduler visits them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use thiserror::Error;

use crate::system::{LabelId, Membrane, MembraneSystem, Multiset, ObjectId, Rule, DEFAULT_POPULATION_CAP};
use crate::verdict::{Condition, Verdict, ViolationCode};

pub const DEFAULT_STEP_LIMIT: u64 = 10_000;
pub const DEFAULT_MAX_CONFIGS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("rule {} is a dissolution rule; dissolution is not supported", .0 + 1)]
    UnsupportedRule(usize),
    #[error("a membrane labelled `{label}` exceeds the population cap of {cap}")]
    PopulationCap { label: LabelId, cap: u64 },
    #[error("an input multiset was given but the system declares no input membrane")]
    NoInputMembrane,
    #[error("schedule does not match the configuration")]
    InvalidSchedule,
    #[error("exploration limit exceeded ({0} configurations)")]
    LimitExceeded(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub step_limit: u64,
    pub population_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            step_limit: DEFAULT_STEP_LIMIT,
            population_cap: DEFAULT_POPULATION_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_steps: u64,
    pub max_configs: usize,
    pub population_cap: u64,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        ExploreLimits {
            max_steps: DEFAULT_STEP_LIMIT,
            max_configs: DEFAULT_MAX_CONFIGS,
            population_cap: DEFAULT_POPULATION_CAP,
        }
    }
}

/// A snapshot of the membrane tree. The root is the environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub root: Membrane,
    pub step: u64,
}

impl Configuration {
    /// The initial configuration, with `input` added to the first input
    /// membrane in pre-order.
    pub fn initial(sys: &MembraneSystem, input: &Multiset) -> Result<Self, SimError> {
        let mut root = sys.structure.clone();
        if !input.is_empty() {
            let label = sys.input_label.as_ref().ok_or(SimError::NoInputMembrane)?;
            let target = find_first_mut(&mut root, label).ok_or(SimError::NoInputMembrane)?;
            target.contents.add_all(input);
        }
        Ok(Configuration { root, step: 0 })
    }

    pub fn environment(&self) -> &Multiset {
        &self.root.contents
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

fn find_first_mut<'a>(m: &'a mut Membrane, label: &LabelId) -> Option<&'a mut Membrane> {
    if &m.label == label {
        return Some(m);
    }
    m.children.iter_mut().find_map(|c| find_first_mut(c, label))
}

/// Pre-order view of a membrane tree with parent and child positions.
struct Flat<'a> {
    nodes: Vec<(&'a Membrane, Option<usize>)>,
    children: Vec<Vec<usize>>,
}

impl<'a> Flat<'a> {
    fn new(root: &'a Membrane) -> Self {
        let nodes = root.preorder();
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, (_, p)) in nodes.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        Flat { nodes, children }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn membrane(&self, i: usize) -> &'a Membrane {
        self.nodes[i].0
    }

    fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].1
    }
}

/// Picks distinct children labelled `h1`, `h2`, `h3`, each the first
/// unpicked one in structure order.
fn division_children(m: &Membrane, wanted: [&LabelId; 3]) -> Option<[usize; 3]> {
    let mut picked = [usize::MAX; 3];
    for (k, label) in wanted.iter().enumerate() {
        picked[k] = m
            .children
            .iter()
            .enumerate()
            .position(|(i, c)| &c.label == *label && !picked[..k].contains(&i))?;
    }
    Some(picked)
}

/// Whether instance `i` can be the subject of the membrane-level `rule`
/// in the current configuration, ignoring slot contention.
fn subject_ok(rule: &Rule, i: usize, flat: &Flat<'_>) -> bool {
    let m = flat.membrane(i);
    if rule.label() != &m.label {
        return false;
    }
    let Some(parent) = flat.parent(i) else {
        return false;
    };
    match rule {
        Rule::Evolve { .. } | Rule::Dissolve { .. } => false,
        Rule::SendIn { lhs, .. } => flat.membrane(parent).contents.contains(lhs.as_str()),
        Rule::SendOut { lhs, .. } => m.contents.contains(lhs.as_str()),
        Rule::DivideElementary { lhs, .. } => m.children.is_empty() && m.contents.contains(lhs.as_str()),
        Rule::DivideNonElementary {
            lhs,
            first_child,
            second_child,
            shared_child,
            ..
        } => {
            m.contents.contains(lhs.as_str())
                && division_children(m, [first_child, second_child, shared_child]).is_some()
        }
    }
}

fn ensure_dissolution_free(sys: &MembraneSystem) -> Result<(), SimError> {
    match sys.rules.iter().position(|r| matches!(r, Rule::Dissolve { .. })) {
        Some(i) => Err(SimError::UnsupportedRule(i)),
        None => Ok(()),
    }
}

/// A rule that can fire on a membrane instance (pre-order position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct InstanceRule {
    pub instance: usize,
    pub rule: usize,
}

/// Every (instance, rule) pair whose left-hand side is present and whose
/// structural requirements hold. Send-in rules are listed under the
/// receiving child.
pub fn applicable_rules(cfg: &Configuration, sys: &MembraneSystem) -> Result<Vec<InstanceRule>, SimError> {
    ensure_dissolution_free(sys)?;
    let flat = Flat::new(&cfg.root);
    let mut out = Vec::new();
    for i in 0..flat.len() {
        let m = flat.membrane(i);
        for (r, rule) in sys.rules.iter().enumerate() {
            let ok = match rule {
                Rule::Evolve { label, lhs, .. } => label == &m.label && m.contents.contains(lhs.as_str()),
                _ => subject_ok(rule, i, &flat),
            };
            if ok {
                out.push(InstanceRule { instance: i, rule: r });
            }
        }
    }
    Ok(out)
}

/// What one membrane instance does in a step.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct InstanceSchedule {
    /// Occurrences of each object consumed by each kind-(a) rule.
    pub evolutions: BTreeMap<(ObjectId, usize), u64>,
    /// The single (b)-(f) rule with this instance as subject, if any.
    pub membrane_rule: Option<usize>,
}

/// Rule assignment for one maximally parallel step, indexed by pre-order
/// instance position.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Schedule {
    pub instances: Vec<InstanceSchedule>,
}

impl Schedule {
    /// Object occurrences of each instance left unconsumed.
    pub fn residuals(&self, cfg: &Configuration, sys: &MembraneSystem) -> Option<Vec<Multiset>> {
        let flat = Flat::new(&cfg.root);
        if self.instances.len() != flat.len() {
            return None;
        }
        let mut residual: Vec<Multiset> = flat.nodes.iter().map(|(m, _)| m.contents.clone()).collect();
        for (i, s) in self.instances.iter().enumerate() {
            for ((o, _), &n) in &s.evolutions {
                if !residual[i].remove(o, n) {
                    return None;
                }
            }
            if let Some(r) = s.membrane_rule {
                let rule = sys.rules.get(r)?;
                let from = match rule {
                    Rule::SendIn { .. } => flat.parent(i)?,
                    _ => i,
                };
                if !residual[from].remove(rule.lhs(), 1) {
                    return None;
                }
            }
        }
        Some(residual)
    }
}

/// The deterministic scheduler: instances in pre-order, objects in name
/// order, each occurrence taking the lowest-index rule still applicable to
/// it. A membrane-level rule is applicable only while its subject's slot is
/// free.
pub fn lex_schedule(cfg: &Configuration, sys: &MembraneSystem) -> Schedule {
    let flat = Flat::new(&cfg.root);
    let n = flat.len();
    let mut sched = Schedule {
        instances: vec![InstanceSchedule::default(); n],
    };
    let mut slot = vec![false; n];
    for i in 0..n {
        let m = flat.membrane(i);
        for (obj, count) in m.contents.iter() {
            let mut remaining = count;
            for (r, rule) in sys.rules.iter().enumerate() {
                if remaining == 0 {
                    break;
                }
                if rule.lhs() != obj {
                    continue;
                }
                match rule {
                    Rule::Evolve { label, .. } => {
                        if label == &m.label {
                            *sched.instances[i].evolutions.entry((obj.clone(), r)).or_insert(0) += remaining;
                            remaining = 0;
                        }
                    }
                    Rule::SendIn { label, .. } => {
                        for &j in &flat.children[i] {
                            if remaining == 0 {
                                break;
                            }
                            if &flat.membrane(j).label == label && !slot[j] {
                                slot[j] = true;
                                sched.instances[j].membrane_rule = Some(r);
                                remaining -= 1;
                            }
                        }
                    }
                    Rule::Dissolve { .. } => {}
                    _ => {
                        if !slot[i] && subject_ok(rule, i, &flat) {
                            slot[i] = true;
                            sched.instances[i].membrane_rule = Some(r);
                            remaining -= 1;
                        }
                    }
                }
            }
        }
    }
    sched
}

/// Ways of writing `total` as an ordered sum of `parts` non-negative terms.
fn compositions(total: u64, parts: usize, budget: usize) -> Result<Vec<Vec<u64>>, SimError> {
    // C(total + parts - 1, parts - 1), computed incrementally with an early exit
    let mut count: u128 = 1;
    for k in 1..parts as u128 {
        count = count * (total as u128 + k) / k;
        if count > budget as u128 {
            return Err(SimError::LimitExceeded(budget));
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn go(left: u64, parts: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            go(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    go(total, parts, &mut cur, &mut out);
    Ok(out)
}

/// Every maximally parallel schedule of the configuration, up to the
/// identity of equal object occurrences. Fails when more than `budget`
/// schedules would be produced.
pub fn all_schedules(cfg: &Configuration, sys: &MembraneSystem, budget: usize) -> Result<Vec<Schedule>, SimError> {
    ensure_dissolution_free(sys)?;
    let flat = Flat::new(&cfg.root);
    let n = flat.len();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            sys.rules
                .iter()
                .enumerate()
                .filter(|(_, rule)| subject_ok(rule, j, &flat))
                .map(|(r, _)| r)
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut choice: Vec<Option<usize>> = vec![None; n];
    enumerate_slots(0, &candidates, &mut choice, &flat, sys, budget, &mut out)?;
    Ok(out)
}

fn enumerate_slots(
    j: usize,
    candidates: &[Vec<usize>],
    choice: &mut Vec<Option<usize>>,
    flat: &Flat<'_>,
    sys: &MembraneSystem,
    budget: usize,
    out: &mut Vec<Schedule>,
) -> Result<(), SimError> {
    if j == candidates.len() {
        return complete_schedule(choice, flat, sys, budget, out);
    }
    choice[j] = None;
    enumerate_slots(j + 1, candidates, choice, flat, sys, budget, out)?;
    for &r in &candidates[j] {
        choice[j] = Some(r);
        enumerate_slots(j + 1, candidates, choice, flat, sys, budget, out)?;
    }
    choice[j] = None;
    Ok(())
}

fn complete_schedule(
    choice: &[Option<usize>],
    flat: &Flat<'_>,
    sys: &MembraneSystem,
    budget: usize,
    out: &mut Vec<Schedule>,
) -> Result<(), SimError> {
    let n = flat.len();
    let mut residual: Vec<Multiset> = flat.nodes.iter().map(|(m, _)| m.contents.clone()).collect();
    for (j, r) in choice.iter().enumerate() {
        if let Some(r) = r {
            let rule = &sys.rules[*r];
            let from = match rule {
                Rule::SendIn { .. } => flat.parent(j).expect("send-in subject has a parent"),
                _ => j,
            };
            if !residual[from].remove(rule.lhs(), 1) {
                return Ok(());
            }
        }
    }

    // per instance, the possible kind-(a) assignments of what is left
    let mut per_instance: Vec<Vec<BTreeMap<(ObjectId, usize), u64>>> = Vec::with_capacity(n);
    for i in 0..n {
        let m = flat.membrane(i);
        let mut options = vec![BTreeMap::new()];
        for (o, left) in residual[i].iter() {
            let evolve: Vec<usize> = sys
                .rules
                .iter()
                .enumerate()
                .filter(|(_, r)| matches!(r, Rule::Evolve { label, lhs, .. } if label == &m.label && lhs == o))
                .map(|(r, _)| r)
                .collect();
            if evolve.is_empty() {
                if blocked_by_free_slot(o, i, choice, flat, sys) {
                    return Ok(());
                }
                continue;
            }
            let splits = compositions(left, evolve.len(), budget)?;
            let mut next = Vec::with_capacity(options.len() * splits.len());
            for base in &options {
                for split in &splits {
                    let mut e = base.clone();
                    for (&r, &k) in evolve.iter().zip(split) {
                        if k > 0 {
                            e.insert((o.clone(), r), k);
                        }
                    }
                    next.push(e);
                }
            }
            if next.len() > budget {
                return Err(SimError::LimitExceeded(budget));
            }
            options = next;
        }
        per_instance.push(options);
    }

    let mut partial = vec![Schedule {
        instances: Vec::with_capacity(n),
    }];
    for (i, options) in per_instance.into_iter().enumerate() {
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for p in &partial {
            for e in &options {
                let mut s = p.clone();
                s.instances.push(InstanceSchedule {
                    evolutions: e.clone(),
                    membrane_rule: choice[i],
                });
                next.push(s);
            }
        }
        partial = next;
        if partial.len() + out.len() > budget {
            return Err(SimError::LimitExceeded(budget));
        }
    }
    out.extend(partial);
    Ok(())
}

/// An unconsumed occurrence of `o` in instance `i` breaks maximality when
/// some membrane-level rule could still take it through a free slot.
fn blocked_by_free_slot(
    o: &ObjectId,
    i: usize,
    choice: &[Option<usize>],
    flat: &Flat<'_>,
    sys: &MembraneSystem,
) -> bool {
    sys.rules.iter().any(|rule| {
        if rule.lhs() != o {
            return false;
        }
        match rule {
            Rule::Evolve { .. } | Rule::Dissolve { .. } => false,
            Rule::SendIn { label, .. } => flat.children[i]
                .iter()
                .any(|&j| &flat.membrane(j).label == label && choice[j].is_none()),
            _ => choice[i].is_none() && subject_ok(rule, i, flat),
        }
    })
}

/// Applies one maximally parallel transition described by `sched`.
///
/// Kind-(a) products, arrivals from children and send-in objects are all in
/// place before a division copies the membrane, so both copies hold them.
pub fn step(
    cfg: &Configuration,
    sys: &MembraneSystem,
    sched: &Schedule,
    population_cap: u64,
) -> Result<Configuration, SimError> {
    ensure_dissolution_free(sys)?;
    if sched.instances.len() != cfg.root.membrane_count() {
        return Err(SimError::InvalidSchedule);
    }
    let mut idx = 0;
    let (mut roots, sent) = apply(&cfg.root, &mut idx, sched, sys, Multiset::new(), population_cap)?;
    if roots.len() != 1 || !sent.is_empty() {
        return Err(SimError::InvalidSchedule);
    }
    let root = roots.pop().expect("one root");
    if root.membrane_count() as u64 > population_cap {
        return Err(SimError::PopulationCap {
            label: root.label.clone(),
            cap: population_cap,
        });
    }
    Ok(Configuration {
        root,
        step: cfg.step + 1,
    })
}

fn apply(
    m: &Membrane,
    idx: &mut usize,
    sched: &Schedule,
    sys: &MembraneSystem,
    incoming: Multiset,
    cap: u64,
) -> Result<(Vec<Membrane>, Multiset), SimError> {
    let me = *idx;
    *idx += 1;
    let s = &sched.instances[me];

    let mut residual = m.contents.clone();
    let mut products = Multiset::new();
    for ((o, r), &n) in &s.evolutions {
        match sys.rules.get(*r) {
            Some(Rule::Evolve { label, lhs, rhs }) if lhs == o && label == &m.label => {
                if !residual.remove(o, n) {
                    return Err(SimError::InvalidSchedule);
                }
                products.add_scaled(rhs, n);
            }
            _ => return Err(SimError::InvalidSchedule),
        }
    }

    let own = match s.membrane_rule {
        Some(r) => Some(sys.rules.get(r).ok_or(SimError::InvalidSchedule)?),
        None => None,
    };
    if let Some(rule) = own {
        if rule.label() != &m.label || matches!(rule, Rule::Evolve { .. }) {
            return Err(SimError::InvalidSchedule);
        }
        if !matches!(rule, Rule::SendIn { .. }) && !residual.remove(rule.lhs(), 1) {
            return Err(SimError::InvalidSchedule);
        }
    }
    let division = match own {
        Some(Rule::DivideNonElementary {
            first_child,
            second_child,
            shared_child,
            ..
        }) => Some(division_children(m, [first_child, second_child, shared_child]).ok_or(SimError::InvalidSchedule)?),
        Some(Rule::DivideElementary { .. }) if !m.children.is_empty() => return Err(SimError::InvalidSchedule),
        _ => None,
    };

    let mut child_results: Vec<Vec<Membrane>> = Vec::with_capacity(m.children.len());
    let mut arrivals = Multiset::new();
    for c in &m.children {
        let mut into_child = Multiset::new();
        if let Some(Rule::SendIn { lhs, rhs, .. }) = sched
            .instances
            .get(*idx)
            .and_then(|cs| cs.membrane_rule)
            .and_then(|r| sys.rules.get(r))
        {
            if !residual.remove(lhs, 1) {
                return Err(SimError::InvalidSchedule);
            }
            into_child.insert(rhs.clone(), 1);
        }
        let (res, sent) = apply(c, idx, sched, sys, into_child, cap)?;
        arrivals.add_all(&sent);
        child_results.push(res);
    }

    let mut contents = residual;
    contents.add_all(&products);
    contents.add_all(&arrivals);
    contents.add_all(&incoming);

    let mut sent = Multiset::new();
    let membrane = |contents: Multiset, children: Vec<Membrane>| Membrane {
        label: m.label.clone(),
        contents,
        children,
    };
    let all_children = |skip: Option<usize>| -> Vec<Membrane> {
        child_results
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .flat_map(|(_, v)| v.iter().cloned())
            .collect()
    };
    let result = match own {
        None | Some(Rule::SendIn { .. }) => vec![membrane(contents, all_children(None))],
        Some(Rule::SendOut { rhs, .. }) => {
            sent.insert(rhs.clone(), 1);
            vec![membrane(contents, all_children(None))]
        }
        Some(Rule::DivideElementary { first, second, .. }) => {
            let mut a = contents.clone();
            a.insert(first.clone(), 1);
            let mut b = contents;
            b.insert(second.clone(), 1);
            vec![membrane(a, Vec::new()), membrane(b, Vec::new())]
        }
        Some(Rule::DivideNonElementary { first, second, .. }) => {
            let [first_child, second_child, _] = division.expect("checked above");
            let mut a = contents.clone();
            a.insert(first.clone(), 1);
            let mut b = contents;
            b.insert(second.clone(), 1);
            vec![
                membrane(a, all_children(Some(second_child))),
                membrane(b, all_children(Some(first_child))),
            ]
        }
        Some(Rule::Evolve { .. } | Rule::Dissolve { .. }) => return Err(SimError::InvalidSchedule),
    };
    for r in &result {
        if r.contents.total() > cap {
            return Err(SimError::PopulationCap {
                label: r.label.clone(),
                cap,
            });
        }
    }
    Ok((result, sent))
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HaltReason {
    Halted,
    StepLimit,
    PopulationCap,
}

impl HaltReason {
    pub fn as_str(self) -> &'static str {
        match self {
            HaltReason::Halted => "HALTED",
            HaltReason::StepLimit => "STEP_LIMIT",
            HaltReason::PopulationCap => "POPULATION_CAP",
        }
    }

    /// The violation reported when a verdict needs a halted computation.
    pub fn violation(self) -> ViolationCode {
        match self {
            HaltReason::PopulationCap => ViolationCode::PopulationCap,
            _ => ViolationCode::StepLimit,
        }
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationTrace {
    pub configurations: Vec<Configuration>,
    /// `emissions[k]`: what step `k` added to the environment. Entry 0 is
    /// the initial environment.
    pub emissions: Vec<Multiset>,
    pub halted: bool,
    pub halt_reason: HaltReason,
    pub yes: ObjectId,
    pub no: ObjectId,
}

impl ComputationTrace {
    pub fn final_step(&self) -> u64 {
        self.configurations.len() as u64 - 1
    }

    pub fn emission_steps(&self, obj: &ObjectId) -> Vec<u64> {
        self.emissions
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains(obj.as_str()))
            .map(|(k, _)| k as u64)
            .collect()
    }

    pub fn first_emission(&self, obj: &ObjectId) -> Option<u64> {
        self.emissions
            .iter()
            .position(|e| e.contains(obj.as_str()))
            .map(|k| k as u64)
    }

    pub fn summary(&self) -> SignalSummary {
        SignalSummary {
            first_yes: self.first_emission(&self.yes),
            first_no: self.first_emission(&self.no),
            final_step: self.final_step(),
            halt_reason: self.halt_reason,
        }
    }

    /// Signals released in more than one step. Judgement only looks at the
    /// first release, so these are reported as warnings.
    pub fn repeated_signals(&self) -> Vec<(ObjectId, Vec<u64>)> {
        [&self.yes, &self.no]
            .into_iter()
            .filter_map(|o| {
                let steps = self.emission_steps(o);
                (steps.len() > 1).then(|| (o.clone(), steps))
            })
            .collect()
    }

    /// One line per step, `step k: +env{...}`; `verbose` adds the whole
    /// configuration under each line.
    pub fn dump(&self, verbose: bool) -> String {
        let mut out = String::new();
        for (k, e) in self.emissions.iter().enumerate() {
            let _ = writeln!(out, "step {k}: +env{{{e}}}");
            if verbose {
                let _ = writeln!(out, "  {}", self.configurations[k]);
            }
        }
        out
    }
}

/// What judgement needs to know about a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignalSummary {
    pub first_yes: Option<u64>,
    pub first_no: Option<u64>,
    pub final_step: u64,
    pub halt_reason: HaltReason,
}

impl SignalSummary {
    pub fn halted(&self) -> bool {
        self.halt_reason == HaltReason::Halted
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum JudgeError {
    #[error("computation did not halt ({0})")]
    NotHalted(HaltReason),
}

impl JudgeError {
    pub fn violation(self) -> Verdict {
        match self {
            JudgeError::NotHalted(r) => Verdict::Violation(r.violation()),
        }
    }
}

pub fn judge(trace: &ComputationTrace, condition: Condition) -> Result<Verdict, JudgeError> {
    judge_summary(&trace.summary(), condition)
}

/// General: the first signal decides; an unfinished computation is judged
/// once a signal has appeared. Standard and restricted: exactly one signal,
/// first released in the halting step.
pub fn judge_summary(s: &SignalSummary, condition: Condition) -> Result<Verdict, JudgeError> {
    use core::cmp::Ordering;
    match condition {
        Condition::General => Ok(match (s.first_yes, s.first_no) {
            (Some(y), Some(n)) => match y.cmp(&n) {
                Ordering::Less => Verdict::Accept,
                Ordering::Greater => Verdict::Reject,
                Ordering::Equal => Verdict::Violation(ViolationCode::SameTimestep),
            },
            (Some(_), None) => Verdict::Accept,
            (None, Some(_)) => Verdict::Reject,
            (None, None) if s.halted() => Verdict::Violation(ViolationCode::NoOutput),
            (None, None) => return Err(JudgeError::NotHalted(s.halt_reason)),
        }),
        Condition::Standard | Condition::Restricted => {
            if !s.halted() {
                return Err(JudgeError::NotHalted(s.halt_reason));
            }
            Ok(match (s.first_yes, s.first_no) {
                (Some(_), Some(_)) => Verdict::Violation(ViolationCode::BothReachable),
                (None, None) => Verdict::Violation(ViolationCode::NoOutput),
                (Some(k), None) | (None, Some(k)) if k != s.final_step => {
                    Verdict::Violation(ViolationCode::NotLastStep)
                }
                (Some(_), None) => Verdict::Accept,
                (None, Some(_)) => Verdict::Reject,
            })
        }
    }
}

/// Runs the system from its initial configuration (plus `input`) with the
/// lexicographic scheduler.
pub fn run(sys: &MembraneSystem, input: &Multiset, limits: &Limits) -> Result<ComputationTrace, SimError> {
    ensure_dissolution_free(sys)?;
    let first = Configuration::initial(sys, input)?;
    let mut emissions = vec![first.environment().clone()];
    let mut configurations = vec![first];
    let halt_reason = loop {
        let cur = configurations.last().expect("non-empty");
        if applicable_rules(cur, sys)?.is_empty() {
            break HaltReason::Halted;
        }
        if cur.step >= limits.step_limit {
            break HaltReason::StepLimit;
        }
        let sched = lex_schedule(cur, sys);
        match step(cur, sys, &sched, limits.population_cap) {
            Ok(next) => {
                emissions.push(next.environment().additions_since(cur.environment()));
                configurations.push(next);
            }
            Err(SimError::PopulationCap { .. }) => break HaltReason::PopulationCap,
            Err(e) => return Err(e),
        }
    };
    Ok(ComputationTrace {
        configurations,
        emissions,
        halted: halt_reason == HaltReason::Halted,
        halt_reason,
        yes: sys.yes.clone(),
        no: sys.no.clone(),
    })
}

/// Verdicts over every maximally parallel computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration {
    pub verdicts: BTreeMap<Condition, BTreeSet<Verdict>>,
    /// Distinct states visited.
    pub states: usize,
    /// Computations that ended (halted or hit a limit).
    pub leaves: usize,
}

impl Exploration {
    pub fn verdicts(&self, c: Condition) -> &BTreeSet<Verdict> {
        &self.verdicts[&c]
    }

    pub fn is_confluent(&self, c: Condition) -> bool {
        self.verdicts(c).len() == 1
    }

    /// The verdict shared by every computation, if there is one.
    pub fn unique(&self, c: Condition) -> Option<Verdict> {
        let v = self.verdicts(c);
        if v.len() == 1 {
            v.iter().next().copied()
        } else {
            None
        }
    }
}

/// Explores all schedules from the initial configuration. States are
/// deduplicated on (canonical configuration, step, first signal steps).
pub fn explore_all(sys: &MembraneSystem, input: &Multiset, limits: &ExploreLimits) -> Result<Exploration, SimError> {
    ensure_dissolution_free(sys)?;
    let mut first = Configuration::initial(sys, input)?;
    first.root.canonicalize();
    let env = first.environment();
    let first_yes = env.contains(sys.yes.as_str()).then_some(0);
    let first_no = env.contains(sys.no.as_str()).then_some(0);

    type State = (Membrane, u64, Option<u64>, Option<u64>);
    let start: State = (first.root, 0, first_yes, first_no);
    let mut visited: BTreeSet<State> = BTreeSet::new();
    visited.insert(start.clone());
    let mut stack = vec![start];

    let mut verdicts: BTreeMap<Condition, BTreeSet<Verdict>> =
        Condition::ALL.iter().map(|&c| (c, BTreeSet::new())).collect();
    let mut leaves = 0usize;
    let mut record = |summary: SignalSummary, verdicts: &mut BTreeMap<Condition, BTreeSet<Verdict>>| {
        leaves += 1;
        for c in Condition::ALL {
            let v = judge_summary(&summary, c).unwrap_or_else(JudgeError::violation);
            verdicts.get_mut(&c).expect("all conditions").insert(v);
        }
    };

    while let Some((root, step_no, fy, fnn)) = stack.pop() {
        let cfg = Configuration { root, step: step_no };
        let summary = |reason| SignalSummary {
            first_yes: fy,
            first_no: fnn,
            final_step: step_no,
            halt_reason: reason,
        };
        if applicable_rules(&cfg, sys)?.is_empty() {
            record(summary(HaltReason::Halted), &mut verdicts);
            continue;
        }
        if step_no >= limits.max_steps {
            record(summary(HaltReason::StepLimit), &mut verdicts);
            continue;
        }
        for sched in all_schedules(&cfg, sys, limits.max_configs)? {
            let mut next = match step(&cfg, sys, &sched, limits.population_cap) {
                Ok(next) => next,
                Err(SimError::PopulationCap { .. }) => {
                    record(summary(HaltReason::PopulationCap), &mut verdicts);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let added = next.environment().additions_since(cfg.environment());
            let ny = fy.or_else(|| added.contains(sys.yes.as_str()).then_some(next.step));
            let nn = fnn.or_else(|| added.contains(sys.no.as_str()).then_some(next.step));
            next.root.canonicalize();
            let state: State = (next.root, next.step, ny, nn);
            if !visited.contains(&state) {
                if visited.len() >= limits.max_configs {
                    return Err(SimError::LimitExceeded(limits.max_configs));
                }
                visited.insert(state.clone());
                stack.push(state);
            }
        }
    }

    Ok(Exploration {
        verdicts,
        states: visited.len(),
        leaves,
    })
}

/// Configurations (by step number) in which some object occurrence with a
/// rule for its (object, label) pair was left unconsumed by the
/// lexicographic run. An empty result means every object evolved as soon
/// as it appeared.
pub fn stalled_steps(sys: &MembraneSystem, input: &Multiset, limits: &Limits) -> Result<Vec<u64>, SimError> {
    let trace = run(sys, input, limits)?;
    let mut stalled = Vec::new();
    for cfg in &trace.configurations[..trace.configurations.len() - 1] {
        let sched = lex_schedule(cfg, sys);
        let residuals = sched.residuals(cfg, sys).ok_or(SimError::InvalidSchedule)?;
        let flat = Flat::new(&cfg.root);
        let stalled_here = residuals.iter().enumerate().any(|(i, res)| {
            let label = &flat.membrane(i).label;
            res.support().any(|o| has_rule_for(sys, o, label))
        });
        if stalled_here {
            stalled.push(cfg.step);
        }
    }
    Ok(stalled)
}

/// Whether some rule consumes `o` from a membrane labelled `label`.
fn has_rule_for(sys: &MembraneSystem, o: &ObjectId, label: &LabelId) -> bool {
    let parents = sys.parent_map();
    sys.rules.iter().any(|r| {
        r.lhs() == o
            && match r {
                Rule::SendIn { label: h, .. } => parents.get(h) == Some(label),
                other => other.label() == label,
            }
    })
}

/// Human-readable rendering of a schedule, for counterexample dumps.
pub fn describe_schedule(sched: &Schedule, sys: &MembraneSystem) -> String {
    let mut out = String::new();
    for (i, s) in sched.instances.iter().enumerate() {
        for ((o, r), n) in &s.evolutions {
            let _ = writeln!(out, "#{i}: {n} x {o} by {}", sys.rules[*r]);
        }
        if let Some(r) = s.membrane_rule {
            let _ = writeln!(out, "#{i}: {}", sys.rules[r]);
        }
    }
    if out.is_empty() {
        out = String::from("(empty schedule)\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{LabelId, ObjectId};

    fn obj(s: &str) -> ObjectId {
        ObjectId::from(s)
    }

    fn lab(s: &str) -> LabelId {
        LabelId::from(s)
    }

    fn ms(items: &[&str]) -> Multiset {
        items.iter().copied().collect()
    }

    fn evolve(h: &str, a: &str, rhs: &[&str]) -> Rule {
        Rule::Evolve {
            label: lab(h),
            lhs: obj(a),
            rhs: ms(rhs),
        }
    }

    fn send_out(h: &str, a: &str, b: &str) -> Rule {
        Rule::SendOut {
            label: lab(h),
            lhs: obj(a),
            rhs: obj(b),
        }
    }

    /// `env[h{contents}]` with the given rules; every mentioned name is
    /// declared.
    fn single(contents: &[&str], rules: Vec<Rule>) -> MembraneSystem {
        let mut sys = MembraneSystem::empty();
        sys.labels.insert(lab("h"));
        sys.structure = Membrane::new("env").with_child(Membrane::new("h").with_contents(ms(contents)));
        for r in &rules {
            sys.alphabet.insert(r.lhs().clone());
            sys.alphabet.extend(r.products().into_iter().cloned());
        }
        sys.alphabet.extend(contents.iter().map(|&s| obj(s)));
        sys.rules = rules;
        sys
    }

    fn initial(sys: &MembraneSystem) -> Configuration {
        Configuration::initial(sys, &Multiset::new()).unwrap()
    }

    fn lex_step(sys: &MembraneSystem, cfg: &Configuration) -> Configuration {
        step(cfg, sys, &lex_schedule(cfg, sys), DEFAULT_POPULATION_CAP).unwrap()
    }

    #[test]
    fn applicable_when_object_present() {
        let sys = single(&["a"], vec![evolve("h", "a", &["b"])]);
        let app = applicable_rules(&initial(&sys), &sys).unwrap();
        assert_eq!(app, vec![InstanceRule { instance: 1, rule: 0 }]);
    }

    #[test]
    fn nothing_applicable_in_empty_membrane() {
        let sys = single(&[], vec![evolve("h", "a", &["b"])]);
        assert!(applicable_rules(&initial(&sys), &sys).unwrap().is_empty());
    }

    #[test]
    fn non_elementary_division_needs_all_three_children() {
        // env(h0(h1, h3)): h2 is missing
        let mut sys = MembraneSystem::empty();
        sys.alphabet.extend(["a", "b", "c"].map(obj));
        sys.labels.extend(["h0", "h1", "h2", "h3"].map(lab));
        let h0 = Membrane::new("h0")
            .with_contents(ms(&["a"]))
            .with_child(Membrane::new("h1"))
            .with_child(Membrane::new("h3"));
        sys.structure = Membrane::new("env").with_child(h0);
        sys.rules = vec![Rule::DivideNonElementary {
            label: lab("h0"),
            lhs: obj("a"),
            first: obj("b"),
            second: obj("c"),
            first_child: lab("h1"),
            second_child: lab("h2"),
            shared_child: lab("h3"),
        }];
        assert!(applicable_rules(&initial(&sys), &sys).unwrap().is_empty());

        // with h2 present the rule fires and splits the branch
        sys.structure.children[0].children.insert(1, Membrane::new("h2"));
        let cfg = initial(&sys);
        assert_eq!(applicable_rules(&cfg, &sys).unwrap().len(), 1);
        let next = lex_step(&sys, &cfg);
        let copies = &next.root.children;
        assert_eq!(copies.len(), 2);
        assert_eq!(copies[0].contents, ms(&["b"]));
        assert_eq!(copies[1].contents, ms(&["c"]));
        let labels = |m: &Membrane| {
            m.children
                .iter()
                .map(|c| c.label.as_str().into())
                .collect::<Vec<String>>()
        };
        assert_eq!(labels(&copies[0]), ["h1", "h3"]);
        assert_eq!(labels(&copies[1]), ["h2", "h3"]);
    }

    #[test]
    fn dissolution_is_unsupported() {
        let sys = single(
            &["a"],
            vec![Rule::Dissolve {
                label: lab("h"),
                lhs: obj("a"),
                rhs: obj("b"),
            }],
        );
        assert_eq!(
            applicable_rules(&initial(&sys), &sys),
            Err(SimError::UnsupportedRule(0))
        );
        assert!(matches!(
            run(&sys, &Multiset::new(), &Limits::default()),
            Err(SimError::UnsupportedRule(0))
        ));
    }

    #[test]
    fn maximal_evolution() {
        let sys = single(
            &["a", "a", "b"],
            vec![evolve("h", "a", &["c"]), evolve("h", "b", &["d"])],
        );
        let next = lex_step(&sys, &initial(&sys));
        assert_eq!(next.root.children[0].contents, ms(&["c", "c", "d"]));
        assert_eq!(next.step, 1);
    }

    #[test]
    fn evolution_happens_before_division() {
        let sys = single(
            &["a", "x"],
            vec![
                evolve("h", "x", &["y"]),
                Rule::DivideElementary {
                    label: lab("h"),
                    lhs: obj("a"),
                    first: obj("b"),
                    second: obj("c"),
                },
            ],
        );
        let next = lex_step(&sys, &initial(&sys));
        let hs: Vec<&Multiset> = next.root.children.iter().map(|m| &m.contents).collect();
        assert_eq!(hs, vec![&ms(&["b", "y"]), &ms(&["c", "y"])]);
    }

    #[test]
    fn send_out_reaches_environment() {
        let sys = single(&["a"], vec![send_out("h", "a", "yes")]);
        let next = lex_step(&sys, &initial(&sys));
        assert_eq!(next.environment(), &ms(&["yes"]));
        assert!(next.root.children[0].contents.is_empty());
    }

    #[test]
    fn one_membrane_rule_per_instance() {
        // two send-outs compete for the single slot of h
        let sys = single(&["a", "b"], vec![send_out("h", "a", "yes"), send_out("h", "b", "no")]);
        let cfg = initial(&sys);
        let next = lex_step(&sys, &cfg);
        assert_eq!(next.environment(), &ms(&["yes"]));
        assert_eq!(next.root.children[0].contents, ms(&["b"]));
        let all = all_schedules(&cfg, &sys, 100).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn send_in_targets_child() {
        let mut sys = single(
            &[],
            vec![Rule::SendIn {
                label: lab("h"),
                lhs: obj("a"),
                rhs: obj("b"),
            }],
        );
        sys.structure.contents = ms(&["a", "a"]);
        let next = lex_step(&sys, &initial(&sys));
        assert_eq!(next.environment(), &ms(&["a"]));
        assert_eq!(next.root.children[0].contents, ms(&["b"]));
    }

    /// env[skin[h{a}]]: a -> b in h, b leaves h as c, c leaves skin as yes.
    fn three_step_chain() -> MembraneSystem {
        let mut sys = MembraneSystem::empty();
        sys.alphabet.extend(["a", "b", "c"].map(obj));
        sys.labels.extend(["skin", "h"].map(lab));
        sys.structure = Membrane::new("env")
            .with_child(Membrane::new("skin").with_child(Membrane::new("h").with_contents(ms(&["a"]))));
        sys.rules = vec![
            evolve("h", "a", &["b"]),
            send_out("h", "b", "c"),
            send_out("skin", "c", "yes"),
        ];
        sys
    }

    #[test]
    fn chain_halts_after_three_steps() {
        let sys = three_step_chain();
        let trace = run(&sys, &Multiset::new(), &Limits::default()).unwrap();
        assert!(trace.halted);
        assert_eq!(trace.final_step(), 3);
        assert_eq!(trace.emission_steps(&obj("yes")), vec![3]);
        assert_eq!(judge(&trace, Condition::Standard), Ok(Verdict::Accept));
        assert_eq!(judge(&trace, Condition::General), Ok(Verdict::Accept));
        assert_eq!(trace.dump(false).lines().last(), Some("step 3: +env{yes}"));
    }

    #[test]
    fn cycle_hits_step_limit() {
        let sys = single(&["a"], vec![evolve("h", "a", &["b"]), evolve("h", "b", &["a"])]);
        let trace = run(
            &sys,
            &Multiset::new(),
            &Limits {
                step_limit: 100,
                ..Limits::default()
            },
        )
        .unwrap();
        assert!(!trace.halted);
        assert_eq!(trace.halt_reason, HaltReason::StepLimit);
        assert_eq!(trace.final_step(), 100);
        assert_eq!(
            judge(&trace, Condition::Standard),
            Err(JudgeError::NotHalted(HaltReason::StepLimit))
        );
    }

    #[test]
    fn population_cap_stops_growth() {
        let sys = single(&["a"], vec![evolve("h", "a", &["a", "a"])]);
        let trace = run(
            &sys,
            &Multiset::new(),
            &Limits {
                step_limit: 100,
                population_cap: 1000,
            },
        )
        .unwrap();
        assert_eq!(trace.halt_reason, HaltReason::PopulationCap);
        assert_eq!(trace.final_step(), 9); // 2^9 = 512 <= 1000 < 1024
    }

    #[test]
    fn empty_rule_set_halts_immediately() {
        let sys = MembraneSystem::empty();
        let trace = run(&sys, &Multiset::new(), &Limits::default()).unwrap();
        assert!(trace.halted);
        assert_eq!(trace.final_step(), 0);
        assert_eq!(
            judge(&trace, Condition::General),
            Ok(Verdict::Violation(ViolationCode::NoOutput))
        );
    }

    #[test]
    fn input_goes_to_input_membrane() {
        let mut sys = single(&[], vec![send_out("h", "a", "yes")]);
        assert_eq!(
            Configuration::initial(&sys, &ms(&["a"])),
            Err(SimError::NoInputMembrane)
        );
        sys.input_label = Some(lab("h"));
        let trace = run(&sys, &ms(&["a"]), &Limits::default()).unwrap();
        assert_eq!(trace.first_emission(&obj("yes")), Some(1));
    }

    fn summary(first_yes: Option<u64>, first_no: Option<u64>, final_step: u64) -> SignalSummary {
        SignalSummary {
            first_yes,
            first_no,
            final_step,
            halt_reason: HaltReason::Halted,
        }
    }

    #[test]
    fn general_first_signal_wins() {
        let s = summary(Some(7), Some(6), 9);
        assert_eq!(judge_summary(&s, Condition::General), Ok(Verdict::Reject));
        let s = summary(Some(4), Some(4), 9);
        assert_eq!(
            judge_summary(&s, Condition::General),
            Ok(Verdict::Violation(ViolationCode::SameTimestep))
        );
        let unfinished = SignalSummary {
            halt_reason: HaltReason::StepLimit,
            ..summary(Some(3), None, 50)
        };
        assert_eq!(judge_summary(&unfinished, Condition::General), Ok(Verdict::Accept));
        let silent = SignalSummary {
            halt_reason: HaltReason::StepLimit,
            ..summary(None, None, 50)
        };
        assert_eq!(
            judge_summary(&silent, Condition::General),
            Err(JudgeError::NotHalted(HaltReason::StepLimit))
        );
    }

    #[test]
    fn standard_requires_signal_in_last_step() {
        let s = summary(Some(3), None, 5);
        assert_eq!(
            judge_summary(&s, Condition::Standard),
            Ok(Verdict::Violation(ViolationCode::NotLastStep))
        );
        let s = summary(Some(5), None, 5);
        assert_eq!(judge_summary(&s, Condition::Standard), Ok(Verdict::Accept));
        let s = summary(None, Some(5), 5);
        assert_eq!(judge_summary(&s, Condition::Restricted), Ok(Verdict::Reject));
        let s = summary(Some(5), Some(5), 5);
        assert_eq!(
            judge_summary(&s, Condition::Standard),
            Ok(Verdict::Violation(ViolationCode::BothReachable))
        );
        let s = summary(None, None, 5);
        assert_eq!(
            judge_summary(&s, Condition::Standard),
            Ok(Verdict::Violation(ViolationCode::NoOutput))
        );
    }

    #[test]
    fn repeated_signal_is_reported() {
        let sys = single(&["a", "a"], vec![send_out("h", "a", "yes")]);
        let trace = run(&sys, &Multiset::new(), &Limits::default()).unwrap();
        assert_eq!(trace.repeated_signals(), vec![(obj("yes"), vec![1, 2])]);
        assert_eq!(
            judge(&trace, Condition::Standard),
            Ok(Verdict::Violation(ViolationCode::NotLastStep))
        );
        assert_eq!(
            stalled_steps(&sys, &Multiset::new(), &Limits::default()).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn deterministic_system_explores_to_singleton() {
        let sys = three_step_chain();
        let ex = explore_all(&sys, &Multiset::new(), &ExploreLimits::default()).unwrap();
        for c in Condition::ALL {
            assert!(ex.is_confluent(c));
        }
        assert_eq!(ex.unique(Condition::Standard), Some(Verdict::Accept));
        assert_eq!(ex.leaves, 1);
    }

    #[test]
    fn competing_rules_are_not_confluent() {
        let sys = single(
            &["a"],
            vec![
                evolve("h", "a", &["y1"]),
                evolve("h", "a", &["n1"]),
                send_out("h", "y1", "yes"),
                send_out("h", "n1", "no"),
            ],
        );
        let ex = explore_all(&sys, &Multiset::new(), &ExploreLimits::default()).unwrap();
        let expected: BTreeSet<Verdict> = [Verdict::Accept, Verdict::Reject].into_iter().collect();
        assert_eq!(ex.verdicts(Condition::General), &expected);
        assert!(!ex.is_confluent(Condition::General));
    }

    #[test]
    fn commuting_choices_are_confluent() {
        // a and b both want h's slot; whichever goes first, c reaches the
        // environment one step after the other and yes follows.
        let mut sys = single(&["a", "b"], vec![send_out("h", "a", "c"), send_out("h", "b", "c")]);
        sys.rules.push(evolve("env", "c", &["d"]));
        sys.rules.push(evolve("env", "d", &[]));
        sys.alphabet.insert(obj("d"));
        let ex = explore_all(&sys, &Multiset::new(), &ExploreLimits::default()).unwrap();
        assert_eq!(ex.leaves, 1); // both orders meet in the same state
        assert_eq!(
            ex.unique(Condition::General),
            Some(Verdict::Violation(ViolationCode::NoOutput))
        );
    }

    #[test]
    fn exploration_limit() {
        let sys = single(&["a"], vec![evolve("h", "a", &["a", "b"])]);
        let limits = ExploreLimits {
            max_steps: 1000,
            max_configs: 10,
            ..ExploreLimits::default()
        };
        assert_eq!(
            explore_all(&sys, &Multiset::new(), &limits),
            Err(SimError::LimitExceeded(10))
        );
    }

    #[test]
    fn compositions_enumerate_splits() {
        let c = compositions(2, 2, 100).unwrap();
        assert_eq!(c, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(3, 3, 100).unwrap().len(), 10);
        assert!(compositions(50, 6, 100).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const OBJECTS: [&str; 3] = ["a", "b", "c"];

        fn arb_rule() -> impl Strategy<Value = Rule> {
            let o = || proptest::sample::select(&OBJECTS[..]);
            let h = || proptest::sample::select(&["env", "h", "k"][..]);
            prop_oneof![
                (h(), o(), proptest::collection::vec(o(), 0..3)).prop_map(|(h, a, u)| Rule::Evolve {
                    label: lab(h),
                    lhs: obj(a),
                    rhs: u.into_iter().collect()
                }),
                (proptest::sample::select(&["h", "k"][..]), o(), o()).prop_map(|(h, a, b)| Rule::SendIn {
                    label: lab(h),
                    lhs: obj(a),
                    rhs: obj(b)
                }),
                (proptest::sample::select(&["h", "k"][..]), o(), o()).prop_map(|(h, a, b)| Rule::SendOut {
                    label: lab(h),
                    lhs: obj(a),
                    rhs: obj(b)
                }),
                (proptest::sample::select(&["h", "k"][..]), o(), o(), o()).prop_map(|(h, a, b, c)| {
                    Rule::DivideElementary {
                        label: lab(h),
                        lhs: obj(a),
                        first: obj(b),
                        second: obj(c),
                    }
                }),
            ]
        }

        fn arb_contents() -> impl Strategy<Value = Multiset> {
            proptest::collection::vec(proptest::sample::select(&OBJECTS[..]), 0..4)
                .prop_map(|v| v.into_iter().collect())
        }

        /// env[h[k] h] with random contents and rules.
        fn arb_system() -> impl Strategy<Value = MembraneSystem> {
            (
                proptest::collection::vec(arb_rule(), 0..6),
                proptest::collection::vec(arb_contents(), 4),
            )
                .prop_map(|(rules, c)| {
                    let mut sys = MembraneSystem::empty();
                    sys.alphabet.extend(OBJECTS.map(obj));
                    sys.labels.extend(["h", "k"].map(lab));
                    sys.structure = Membrane::new("env")
                        .with_contents(c[0].clone())
                        .with_child(
                            Membrane::new("h")
                                .with_contents(c[1].clone())
                                .with_child(Membrane::new("k").with_contents(c[2].clone())),
                        )
                        .with_child(Membrane::new("h").with_contents(c[3].clone()));
                    sys.rules = rules;
                    sys
                })
        }

        /// Independent maximality check: nothing left over could still fire.
        fn leftover_can_fire(cfg: &Configuration, sys: &MembraneSystem, sched: &Schedule) -> bool {
            let residual = sched.residuals(cfg, sys).expect("consistent schedule");
            let nodes = cfg.root.preorder();
            for (i, (m, parent)) in nodes.iter().enumerate() {
                for o in residual[i].support() {
                    for rule in &sys.rules {
                        if rule.lhs() != o {
                            continue;
                        }
                        let fires = match rule {
                            Rule::Evolve { label, .. } => label == &m.label,
                            Rule::SendIn { label, .. } => nodes.iter().enumerate().any(|(j, (c, p))| {
                                *p == Some(i) && &c.label == label && sched.instances[j].membrane_rule.is_none()
                            }),
                            Rule::SendOut { label, .. } => {
                                label == &m.label && parent.is_some() && sched.instances[i].membrane_rule.is_none()
                            }
                            Rule::DivideElementary { label, .. } => {
                                label == &m.label
                                    && parent.is_some()
                                    && m.children.is_empty()
                                    && sched.instances[i].membrane_rule.is_none()
                            }
                            _ => false,
                        };
                        if fires {
                            return true;
                        }
                    }
                }
            }
            false
        }

        fn label_parents(root: &Membrane) -> BTreeSet<(LabelId, LabelId)> {
            let nodes = root.preorder();
            nodes
                .iter()
                .filter_map(|(m, p)| p.map(|p| (m.label.clone(), nodes[p].0.label.clone())))
                .collect()
        }

        proptest! {
            #[test]
            fn lex_schedule_is_maximal_and_enumerated(sys in arb_system()) {
                let cfg = initial(&sys);
                let lex = lex_schedule(&cfg, &sys);
                prop_assert!(!leftover_can_fire(&cfg, &sys, &lex));
                let all = all_schedules(&cfg, &sys, 100_000).unwrap();
                prop_assert!(all.contains(&lex));
                for s in &all {
                    prop_assert!(!leftover_can_fire(&cfg, &sys, s));
                    let only_evolutions = s
                        .instances
                        .iter()
                        .flat_map(|i| i.evolutions.keys())
                        .all(|(_, r)| matches!(sys.rules[*r], Rule::Evolve { .. }));
                    prop_assert!(only_evolutions);
                }
            }

            #[test]
            fn steps_keep_the_label_tree(sys in arb_system()) {
                let static_parents = label_parents(&sys.structure);
                let trace = run(&sys, &Multiset::new(), &Limits { step_limit: 6, population_cap: 10_000 }).unwrap();
                for cfg in &trace.configurations {
                    prop_assert!(label_parents(&cfg.root).is_subset(&static_parents));
                }
            }

            #[test]
            fn evolutions_produce_their_right_hand_sides(sys in arb_system()) {
                let mut sys = sys;
                sys.rules.retain(|r| matches!(r, Rule::Evolve { .. }));
                let cfg = initial(&sys);
                let sched = lex_schedule(&cfg, &sys);
                let residual = sched.residuals(&cfg, &sys).unwrap();
                let next = step(&cfg, &sys, &sched, DEFAULT_POPULATION_CAP).unwrap();
                let before = cfg.root.preorder();
                let after = next.root.preorder();
                prop_assert_eq!(before.len(), after.len());
                for (i, s) in sched.instances.iter().enumerate() {
                    let mut expected = residual[i].clone();
                    for ((_, r), n) in &s.evolutions {
                        if let Rule::Evolve { rhs, .. } = &sys.rules[*r] {
                            expected.add_scaled(rhs, *n);
                        }
                    }
                    prop_assert_eq!(&after[i].0.contents, &expected);
                }
            }
        }
    }
}
