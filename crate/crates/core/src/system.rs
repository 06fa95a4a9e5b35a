//! Membrane systems: identifiers, multisets, rules, the membrane tree and
//! static validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;

use thiserror::Error;

/// Label of the root membrane.
pub const ENV: &str = "env";

/// Default cap on the total number of objects in a single membrane.
pub const DEFAULT_POPULATION_CAP: u64 = 1_000_000;

/// An object of the alphabet.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(name: impl Into<String>) -> Self {
        ObjectId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// A membrane label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(String);

impl LabelId {
    pub fn new(name: impl Into<String>) -> Self {
        LabelId(name.into())
    }

    pub fn env() -> Self {
        LabelId(String::from(ENV))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_env(&self) -> bool {
        self.0 == ENV
    }
}

macro_rules! impl_name {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                Self(String::from(s))
            }
        }

        impl Borrow<str> for $t {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

impl_name!(ObjectId);
impl_name!(LabelId);

/// Object names: letters, digits, `_`, and `@` (normal-form systems name
/// their objects after dependency-graph nodes, `object@label`).
pub fn is_object_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '@')
}

/// Label names: letters, digits and `_`.
pub fn is_label_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// A finite multiset of objects. Zero counts are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset {
    counts: BTreeMap<ObjectId, u64>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(obj: ObjectId) -> Self {
        let mut m = Self::new();
        m.insert(obj, 1);
        m
    }

    pub fn insert(&mut self, obj: ObjectId, n: u64) {
        if n == 0 {
            return;
        }
        let c = self.counts.entry(obj).or_insert(0);
        *c = c.saturating_add(n);
    }

    /// Removes `n` copies; returns false (and leaves `self` untouched) when
    /// fewer than `n` are present.
    pub fn remove(&mut self, obj: &ObjectId, n: u64) -> bool {
        if n == 0 {
            return true;
        }
        match self.counts.get_mut(obj) {
            Some(c) if *c >= n => {
                *c -= n;
                if *c == 0 {
                    self.counts.remove(obj);
                }
                true
            }
            _ => false,
        }
    }

    pub fn count(&self, obj: &str) -> u64 {
        self.counts.get(obj).copied().unwrap_or(0)
    }

    pub fn contains(&self, obj: &str) -> bool {
        self.counts.contains_key(obj)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of occurrences.
    pub fn total(&self) -> u64 {
        self.counts.values().fold(0u64, |a, &c| a.saturating_add(c))
    }

    /// Distinct objects, in name order.
    pub fn support(&self) -> impl Iterator<Item = &ObjectId> {
        self.counts.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ObjectId, u64)> {
        self.counts.iter().map(|(o, &c)| (o, c))
    }

    pub fn add_all(&mut self, other: &Multiset) {
        for (o, c) in other.iter() {
            self.insert(o.clone(), c);
        }
    }

    pub fn add_scaled(&mut self, other: &Multiset, k: u64) {
        for (o, c) in other.iter() {
            self.insert(o.clone(), c.saturating_mul(k));
        }
    }

    /// The positive part of `self - earlier`.
    pub fn additions_since(&self, earlier: &Multiset) -> Multiset {
        let mut out = Multiset::new();
        for (o, c) in self.iter() {
            let before = earlier.count(o.as_str());
            if c > before {
                out.insert(o.clone(), c - before);
            }
        }
        out
    }
}

impl FromIterator<ObjectId> for Multiset {
    fn from_iter<I: IntoIterator<Item = ObjectId>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for o in iter {
            m.insert(o, 1);
        }
        m
    }
}

impl<'a> FromIterator<&'a str> for Multiset {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        iter.into_iter().map(ObjectId::from).collect()
    }
}

/// Space-separated, sorted, with repeats: `{a:2, b:1}` is `a a b`.
impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (o, c) in self.iter() {
            for _ in 0..c {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{o}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Evolve,
    SendIn,
    SendOut,
    Dissolve,
    DivideElementary,
    DivideNonElementary,
}

impl RuleKind {
    /// The letter `a`..`f` used for the rule forms.
    pub fn letter(self) -> char {
        match self {
            RuleKind::Evolve => 'a',
            RuleKind::SendIn => 'b',
            RuleKind::SendOut => 'c',
            RuleKind::Dissolve => 'd',
            RuleKind::DivideElementary => 'e',
            RuleKind::DivideNonElementary => 'f',
        }
    }
}

/// A developmental rule. `label` is the subject membrane (`h`, or `h0` for
/// non-elementary division).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `[a -> u]_h`
    Evolve {
        label: LabelId,
        lhs: ObjectId,
        rhs: Multiset,
    },
    /// `a []_h -> [b]_h`
    SendIn {
        label: LabelId,
        lhs: ObjectId,
        rhs: ObjectId,
    },
    /// `[a]_h -> []_h b`
    SendOut {
        label: LabelId,
        lhs: ObjectId,
        rhs: ObjectId,
    },
    /// `[a]_h -> b`
    Dissolve {
        label: LabelId,
        lhs: ObjectId,
        rhs: ObjectId,
    },
    /// `[a]_h -> [b]_h [c]_h`
    DivideElementary {
        label: LabelId,
        lhs: ObjectId,
        first: ObjectId,
        second: ObjectId,
    },
    /// `[a [h1][h2][h3]]_h0 -> [b [h1][h3]]_h0 [c [h2][h3]]_h0`
    DivideNonElementary {
        label: LabelId,
        lhs: ObjectId,
        first: ObjectId,
        second: ObjectId,
        first_child: LabelId,
        second_child: LabelId,
        shared_child: LabelId,
    },
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        match self {
            Rule::Evolve { .. } => RuleKind::Evolve,
            Rule::SendIn { .. } => RuleKind::SendIn,
            Rule::SendOut { .. } => RuleKind::SendOut,
            Rule::Dissolve { .. } => RuleKind::Dissolve,
            Rule::DivideElementary { .. } => RuleKind::DivideElementary,
            Rule::DivideNonElementary { .. } => RuleKind::DivideNonElementary,
        }
    }

    pub fn label(&self) -> &LabelId {
        match self {
            Rule::Evolve { label, .. }
            | Rule::SendIn { label, .. }
            | Rule::SendOut { label, .. }
            | Rule::Dissolve { label, .. }
            | Rule::DivideElementary { label, .. }
            | Rule::DivideNonElementary { label, .. } => label,
        }
    }

    pub fn lhs(&self) -> &ObjectId {
        match self {
            Rule::Evolve { lhs, .. }
            | Rule::SendIn { lhs, .. }
            | Rule::SendOut { lhs, .. }
            | Rule::Dissolve { lhs, .. }
            | Rule::DivideElementary { lhs, .. }
            | Rule::DivideNonElementary { lhs, .. } => lhs,
        }
    }

    /// Objects on the right-hand side, with repeats for kind (a).
    pub fn products(&self) -> Vec<&ObjectId> {
        match self {
            Rule::Evolve { rhs, .. } => rhs
                .iter()
                .flat_map(|(o, c)| core::iter::repeat_n(o, c as usize))
                .collect(),
            Rule::SendIn { rhs, .. } | Rule::SendOut { rhs, .. } | Rule::Dissolve { rhs, .. } => {
                alloc::vec![rhs]
            }
            Rule::DivideElementary { first, second, .. } | Rule::DivideNonElementary { first, second, .. } => {
                alloc::vec![first, second]
            }
        }
    }

    /// Every label the rule mentions.
    pub fn labels(&self) -> Vec<&LabelId> {
        match self {
            Rule::DivideNonElementary {
                label,
                first_child,
                second_child,
                shared_child,
                ..
            } => {
                alloc::vec![label, first_child, second_child, shared_child]
            }
            other => alloc::vec![other.label()],
        }
    }

    /// Whether the rule needs the subject membrane's single (b)-(f) slot.
    pub fn uses_membrane(&self) -> bool {
        !matches!(self, Rule::Evolve { .. })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Evolve { label, lhs, rhs } => {
                if rhs.is_empty() {
                    write!(f, "[{lhs} -> ]_{label}")
                } else {
                    write!(f, "[{lhs} -> {rhs}]_{label}")
                }
            }
            Rule::SendIn { label, lhs, rhs } => write!(f, "{lhs} []_{label} -> [{rhs}]_{label}"),
            Rule::SendOut { label, lhs, rhs } => write!(f, "[{lhs}]_{label} -> []_{label} {rhs}"),
            Rule::Dissolve { label, lhs, rhs } => write!(f, "[{lhs}]_{label} -> {rhs}"),
            Rule::DivideElementary {
                label,
                lhs,
                first,
                second,
            } => {
                write!(f, "[{lhs}]_{label} -> [{first}]_{label} [{second}]_{label}")
            }
            Rule::DivideNonElementary {
                label,
                lhs,
                first,
                second,
                first_child: h1,
                second_child: h2,
                shared_child: h3,
            } => write!(
                f,
                "[{lhs} [{h1}][{h2}][{h3}]]_{label} -> [{first} [{h1}][{h3}]]_{label} [{second} [{h2}][{h3}]]_{label}"
            ),
        }
    }
}

/// A membrane instance: label, contents and child membranes. The initial
/// membrane structure of a system and the configurations of a computation
/// are both trees of these.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Membrane {
    pub label: LabelId,
    pub contents: Multiset,
    pub children: Vec<Membrane>,
}

impl Membrane {
    pub fn new(label: impl Into<LabelId>) -> Self {
        Membrane {
            label: label.into(),
            contents: Multiset::new(),
            children: Vec::new(),
        }
    }

    pub fn with_contents(mut self, contents: Multiset) -> Self {
        self.contents = contents;
        self
    }

    pub fn with_child(mut self, child: Membrane) -> Self {
        self.children.push(child);
        self
    }

    /// Depth-first pre-order listing, with each node's parent position.
    pub fn preorder(&self) -> Vec<(&Membrane, Option<usize>)> {
        let mut out = Vec::new();
        fn go<'a>(m: &'a Membrane, parent: Option<usize>, out: &mut Vec<(&'a Membrane, Option<usize>)>) {
            let me = out.len();
            out.push((m, parent));
            for c in &m.children {
                go(c, Some(me), out);
            }
        }
        go(self, None, &mut out);
        out
    }

    pub fn membrane_count(&self) -> usize {
        1 + self.children.iter().map(Membrane::membrane_count).sum::<usize>()
    }

    /// Sorts children recursively, giving a representative that ignores
    /// sibling order.
    pub fn canonicalize(&mut self) {
        for c in &mut self.children {
            c.canonicalize();
        }
        self.children.sort();
    }
}

impl From<&str> for Membrane {
    fn from(label: &str) -> Self {
        Membrane::new(label)
    }
}

impl From<LabelId> for Membrane {
    fn from(label: LabelId) -> Self {
        Membrane::new(label)
    }
}

/// Bracket form with contents: `[env{yes} [h{a a}]]`.
impl fmt::Display for Membrane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}{{{}}}", self.label, self.contents)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str("]")
    }
}

/// An active membrane system without charges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembraneSystem {
    pub alphabet: BTreeSet<ObjectId>,
    pub labels: BTreeSet<LabelId>,
    /// Membrane structure rooted at `env`, carrying the initial multisets.
    pub structure: Membrane,
    /// Ordered; the position of a rule is its tie-breaking index.
    pub rules: Vec<Rule>,
    pub input_label: Option<LabelId>,
    pub yes: ObjectId,
    pub no: ObjectId,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("label `{0}` does not occur below the root of the membrane structure")]
    NotFound(LabelId),
    #[error("label `{0}` occurs under several parent labels")]
    AmbiguousParent(LabelId),
}

impl MembraneSystem {
    /// An empty system: alphabet `{yes, no}`, a lone environment, no rules.
    pub fn empty() -> Self {
        MembraneSystem {
            alphabet: ["yes", "no"].into_iter().map(ObjectId::from).collect(),
            labels: [LabelId::env()].into_iter().collect(),
            structure: Membrane::new(LabelId::env()),
            rules: Vec::new(),
            input_label: None,
            yes: ObjectId::from("yes"),
            no: ObjectId::from("no"),
        }
    }

    pub fn is_dissolution_free(&self) -> bool {
        !self.rules.iter().any(|r| r.kind() == RuleKind::Dissolve)
    }

    /// Parent labels of every label occurring below the root.
    fn parent_sets(&self) -> BTreeMap<&LabelId, BTreeSet<&LabelId>> {
        let mut out: BTreeMap<&LabelId, BTreeSet<&LabelId>> = BTreeMap::new();
        let nodes = self.structure.preorder();
        for (m, parent) in &nodes {
            if let Some(p) = parent {
                out.entry(&m.label).or_default().insert(&nodes[*p].0.label);
            }
        }
        out
    }

    /// The unique label of the parent of every membrane labelled `h`.
    pub fn parent_label(&self, h: &LabelId) -> Result<LabelId, SystemError> {
        let sets = self.parent_sets();
        let parents = sets.get(h).ok_or_else(|| SystemError::NotFound(h.clone()))?;
        if parents.len() > 1 {
            return Err(SystemError::AmbiguousParent(h.clone()));
        }
        Ok((*parents.iter().next().expect("non-empty parent set")).clone())
    }

    /// Label-to-parent-label map; for ambiguous labels the smallest parent
    /// label wins (validation rejects those systems anyway).
    pub fn parent_map(&self) -> BTreeMap<LabelId, LabelId> {
        self.parent_sets()
            .into_iter()
            .map(|(h, ps)| (h.clone(), (*ps.iter().next().expect("non-empty")).clone()))
            .collect()
    }

    /// Labels occurring anywhere in the membrane structure.
    pub fn structure_labels(&self) -> BTreeSet<LabelId> {
        self.structure
            .preorder()
            .into_iter()
            .map(|(m, _)| m.label.clone())
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_system(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IssueCode {
    InvalidToken,
    MissingEnv,
    RootNotEnv,
    EnvNotRoot,
    UnknownLabel,
    UnknownObject,
    AmbiguousParent,
    MissingDistinguished,
    DistinguishedEqual,
    EnvRule,
    InputNotInStructure,
    // warnings
    LambdaRhs,
    UnusedObject,
    RuleNeverApplicable,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::InvalidToken => "INVALID_TOKEN",
            IssueCode::MissingEnv => "MISSING_ENV",
            IssueCode::RootNotEnv => "ROOT_NOT_ENV",
            IssueCode::EnvNotRoot => "ENV_NOT_ROOT",
            IssueCode::UnknownLabel => "UNKNOWN_LABEL",
            IssueCode::UnknownObject => "UNKNOWN_OBJECT",
            IssueCode::AmbiguousParent => "AMBIGUOUS_PARENT",
            IssueCode::MissingDistinguished => "MISSING_DISTINGUISHED",
            IssueCode::DistinguishedEqual => "DISTINGUISHED_EQUAL",
            IssueCode::EnvRule => "ENV_RULE",
            IssueCode::InputNotInStructure => "INPUT_NOT_IN_STRUCTURE",
            IssueCode::LambdaRhs => "LAMBDA_RHS",
            IssueCode::UnusedObject => "UNUSED_OBJECT",
            IssueCode::RuleNeverApplicable => "RULE_NEVER_APPLICABLE",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where in the system tuple an issue was found.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Alphabet,
    Labels,
    Structure,
    Contents(LabelId),
    Rule(usize),
    Input,
    Distinguished,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Alphabet => f.write_str("alphabet"),
            Location::Labels => f.write_str("labels"),
            Location::Structure => f.write_str("structure"),
            Location::Contents(h) => write!(f, "contents of {h}"),
            Location::Rule(i) => write!(f, "rule {}", i + 1),
            Location::Input => f.write_str("input label"),
            Location::Distinguished => f.write_str("yes/no objects"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Issue {
    pub code: IssueCode,
    pub message: String,
    pub location: Location,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.code, self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has_error(&self, code: IssueCode) -> bool {
        self.errors.iter().any(|e| e.code == code)
    }

    fn error(&mut self, code: IssueCode, location: Location, message: String) {
        self.errors.push(Issue {
            code,
            message,
            location,
        });
    }

    fn warn(&mut self, code: IssueCode, location: Location, message: String) {
        self.warnings.push(Issue {
            code,
            message,
            location,
        });
    }
}

/// Checks every well-formedness condition of the system tuple. Violations
/// are reported, never raised.
pub fn validate_system(sys: &MembraneSystem) -> ValidationReport {
    let mut rep = ValidationReport::default();

    for o in &sys.alphabet {
        if !is_object_token(o.as_str()) {
            rep.error(
                IssueCode::InvalidToken,
                Location::Alphabet,
                format!("bad object name `{o}`"),
            );
        }
    }
    for h in &sys.labels {
        if !is_label_token(h.as_str()) {
            rep.error(
                IssueCode::InvalidToken,
                Location::Labels,
                format!("bad label name `{h}`"),
            );
        }
    }
    if !sys.labels.contains(ENV) {
        rep.error(
            IssueCode::MissingEnv,
            Location::Labels,
            format!("label set lacks `{ENV}`"),
        );
    }

    // structure
    let nodes = sys.structure.preorder();
    if !sys.structure.label.is_env() {
        rep.error(
            IssueCode::RootNotEnv,
            Location::Structure,
            format!("root membrane is `{}`, expected `{ENV}`", sys.structure.label),
        );
    }
    for (m, parent) in &nodes {
        if !sys.labels.contains(&m.label) {
            rep.error(
                IssueCode::UnknownLabel,
                Location::Structure,
                format!("membrane label `{}` is not declared", m.label),
            );
        }
        if parent.is_some() && m.label.is_env() {
            rep.error(
                IssueCode::EnvNotRoot,
                Location::Structure,
                format!("`{ENV}` used below the root"),
            );
        }
        for o in m.contents.support() {
            if !sys.alphabet.contains(o) {
                rep.error(
                    IssueCode::UnknownObject,
                    Location::Contents(m.label.clone()),
                    format!("object `{o}` is not in the alphabet"),
                );
            }
        }
    }
    for (h, parents) in sys.parent_sets() {
        if parents.len() > 1 {
            let names: Vec<&str> = parents.iter().map(|p| p.as_str()).collect();
            rep.error(
                IssueCode::AmbiguousParent,
                Location::Structure,
                format!("label `{h}` occurs under parents {}", names.join(", ")),
            );
        }
    }

    // distinguished objects
    for (which, o) in [("yes", &sys.yes), ("no", &sys.no)] {
        if !sys.alphabet.contains(o) {
            rep.error(
                IssueCode::MissingDistinguished,
                Location::Distinguished,
                format!("{which} object `{o}` is not in the alphabet"),
            );
        }
    }
    if sys.yes == sys.no {
        rep.error(
            IssueCode::DistinguishedEqual,
            Location::Distinguished,
            format!("yes and no are both `{}`", sys.yes),
        );
    }

    // input membrane
    let in_structure = sys.structure_labels();
    if let Some(h) = &sys.input_label {
        if !sys.labels.contains(h) {
            rep.error(
                IssueCode::UnknownLabel,
                Location::Input,
                format!("input label `{h}` is not declared"),
            );
        } else if !in_structure.contains(h) {
            rep.error(
                IssueCode::InputNotInStructure,
                Location::Input,
                format!("input label `{h}` names no membrane"),
            );
        }
    }

    // rules
    let parents = sys.parent_map();
    for (i, rule) in sys.rules.iter().enumerate() {
        let loc = Location::Rule(i);
        for h in rule.labels() {
            if !sys.labels.contains(h) {
                rep.error(
                    IssueCode::UnknownLabel,
                    loc.clone(),
                    format!("label `{h}` is not declared"),
                );
            }
        }
        for o in core::iter::once(rule.lhs()).chain(rule.products()) {
            if !sys.alphabet.contains(o) {
                rep.error(
                    IssueCode::UnknownObject,
                    loc.clone(),
                    format!("object `{o}` is not in the alphabet"),
                );
            }
        }
        let h = rule.label();
        if h.is_env() && rule.kind() != RuleKind::Evolve {
            rep.error(
                IssueCode::EnvRule,
                loc.clone(),
                format!(
                    "the environment cannot be the subject of a kind ({}) rule",
                    rule.kind().letter()
                ),
            );
        }
        if !h.is_env() && sys.labels.contains(h) && !in_structure.contains(h) {
            rep.warn(
                IssueCode::RuleNeverApplicable,
                loc.clone(),
                format!("no membrane is labelled `{h}`"),
            );
        }
        match rule {
            Rule::Evolve { rhs, .. } if rhs.is_empty() => {
                rep.warn(IssueCode::LambdaRhs, loc.clone(), format!("`{rule}` erases its object"));
            }
            Rule::DivideNonElementary {
                label,
                first_child,
                second_child,
                shared_child,
                ..
            } => {
                for c in [first_child, second_child, shared_child] {
                    if parents.get(c) != Some(label) {
                        rep.warn(
                            IssueCode::RuleNeverApplicable,
                            loc.clone(),
                            format!("`{c}` is not a child label of `{label}`"),
                        );
                    }
                }
            }
            _ => {}
        }
    }

    // unused objects
    let mut used: BTreeSet<&ObjectId> = BTreeSet::new();
    used.insert(&sys.yes);
    used.insert(&sys.no);
    for (m, _) in &nodes {
        used.extend(m.contents.support());
    }
    for rule in &sys.rules {
        used.insert(rule.lhs());
        used.extend(rule.products());
    }
    for o in &sys.alphabet {
        if !used.contains(o) {
            rep.warn(
                IssueCode::UnusedObject,
                Location::Alphabet,
                format!("object `{o}` is never used"),
            );
        }
    }

    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn obj(s: &str) -> ObjectId {
        ObjectId::from(s)
    }

    fn lab(s: &str) -> LabelId {
        LabelId::from(s)
    }

    fn two_membrane() -> MembraneSystem {
        let mut sys = MembraneSystem::empty();
        sys.alphabet.extend(["a", "b"].map(obj));
        sys.labels.insert(lab("h"));
        sys.structure = Membrane::new("env").with_child(Membrane::new("h").with_contents(["a"].into_iter().collect()));
        sys.rules = vec![
            Rule::Evolve {
                label: lab("h"),
                lhs: obj("a"),
                rhs: ["b"].into_iter().collect(),
            },
            Rule::SendOut {
                label: lab("h"),
                lhs: obj("b"),
                rhs: obj("yes"),
            },
        ];
        sys
    }

    #[test]
    fn well_formed_system_has_no_errors() {
        let rep = validate_system(&two_membrane());
        assert!(rep.is_ok(), "{:?}", rep.errors);
        assert!(rep.warnings.is_empty());
    }

    #[test]
    fn unknown_label_in_rule() {
        let mut sys = two_membrane();
        sys.rules.push(Rule::Evolve {
            label: lab("k"),
            lhs: obj("a"),
            rhs: Multiset::new(),
        });
        let rep = validate_system(&sys);
        assert!(rep.has_error(IssueCode::UnknownLabel));
        assert_eq!(rep.errors[0].location, Location::Rule(2));
    }

    #[test]
    fn shared_label_under_different_parents_is_ambiguous() {
        let mut sys = MembraneSystem::empty();
        sys.labels.extend(["p1", "p2", "h"].map(lab));
        sys.structure = Membrane::new("env")
            .with_child(Membrane::new("p1").with_child(Membrane::new("h")))
            .with_child(Membrane::new("p2").with_child(Membrane::new("h")));
        let rep = validate_system(&sys);
        assert!(rep.has_error(IssueCode::AmbiguousParent));
        assert_eq!(sys.parent_label(&lab("h")), Err(SystemError::AmbiguousParent(lab("h"))));
    }

    #[test]
    fn shared_label_under_same_parent_is_fine() {
        let mut sys = MembraneSystem::empty();
        sys.labels.extend(["p", "h"].map(lab));
        sys.structure = Membrane::new("env").with_child(
            Membrane::new("p")
                .with_child(Membrane::new("h"))
                .with_child(Membrane::new("h")),
        );
        assert!(validate_system(&sys).is_ok());
        assert_eq!(sys.parent_label(&lab("h")).unwrap(), lab("p"));
    }

    #[test]
    fn parent_label_lookups() {
        let mut sys = MembraneSystem::empty();
        sys.labels.extend(["skin", "h"].map(lab));
        sys.structure = Membrane::new("env").with_child(Membrane::new("skin").with_child(Membrane::new("h")));
        assert_eq!(sys.parent_label(&lab("h")).unwrap(), lab("skin"));
        assert_eq!(sys.parent_label(&lab("skin")).unwrap(), lab("env"));
        assert_eq!(sys.parent_label(&lab("zz")), Err(SystemError::NotFound(lab("zz"))));
        assert_eq!(sys.parent_label(&lab("env")), Err(SystemError::NotFound(lab("env"))));
    }

    #[test]
    fn dissolution_freedom() {
        let mut sys = two_membrane();
        assert!(sys.is_dissolution_free());
        sys.rules.push(Rule::DivideElementary {
            label: lab("h"),
            lhs: obj("a"),
            first: obj("a"),
            second: obj("b"),
        });
        assert!(sys.is_dissolution_free());
        sys.rules.push(Rule::Dissolve {
            label: lab("h"),
            lhs: obj("a"),
            rhs: obj("b"),
        });
        assert!(!sys.is_dissolution_free());
        sys.rules.clear();
        assert!(sys.is_dissolution_free());
    }

    #[test]
    fn env_cannot_send_out_or_divide() {
        let mut sys = two_membrane();
        sys.rules.push(Rule::SendOut {
            label: LabelId::env(),
            lhs: obj("a"),
            rhs: obj("b"),
        });
        let rep = validate_system(&sys);
        assert!(rep.has_error(IssueCode::EnvRule));
    }

    #[test]
    fn lambda_and_unused_are_warnings() {
        let mut sys = two_membrane();
        sys.alphabet.insert(obj("zz"));
        sys.rules.push(Rule::Evolve {
            label: lab("h"),
            lhs: obj("b"),
            rhs: Multiset::new(),
        });
        let rep = validate_system(&sys);
        assert!(rep.is_ok());
        let codes: Vec<IssueCode> = rep.warnings.iter().map(|w| w.code).collect();
        assert!(codes.contains(&IssueCode::LambdaRhs));
        assert!(codes.contains(&IssueCode::UnusedObject));
    }

    #[test]
    fn missing_distinguished_and_root() {
        let mut sys = two_membrane();
        sys.alphabet.remove("no");
        sys.structure.label = lab("h");
        let rep = validate_system(&sys);
        assert!(rep.has_error(IssueCode::MissingDistinguished));
        assert!(rep.has_error(IssueCode::RootNotEnv));
    }

    #[test]
    fn validation_is_pure() {
        let sys = two_membrane();
        assert_eq!(validate_system(&sys), validate_system(&sys));
    }

    #[test]
    fn multiset_display_is_sorted_with_repeats() {
        let mut m = Multiset::new();
        m.insert(obj("b"), 1);
        m.insert(obj("a"), 2);
        assert_eq!(alloc::format!("{m}"), "a a b");
        assert_eq!(m.total(), 3);
        assert!(!m.remove(&obj("b"), 2));
        assert!(m.remove(&obj("a"), 2));
        assert!(!m.contains("a"));
    }

    #[test]
    fn additions_since_is_positive_part() {
        let before: Multiset = ["a", "a", "b"].into_iter().collect();
        let after: Multiset = ["a", "c", "c"].into_iter().collect();
        let add = after.additions_since(&before);
        assert_eq!(add, ["c", "c"].into_iter().collect());
    }
}
