//! The `memdep` command line.
//!
//! Exit status: 0 accept, 1 reject, 2 violation or semantic error (limits,
//! dissolution, broken promises, failed checks), 3 unreadable or invalid
//! input.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use memdep_core::depgraph::{
    build_dependency_graph, canonical_differences, graph_to_system, graphs_equal_canonical, normalize, DependencyGraph,
};
use memdep_core::reach::{classify, compute_object_classes, solve_general, solve_restricted, solve_standard};
use memdep_core::reductions::{
    check_forest, reduce_dfa_to_restricted, reduce_stcon_pair_to_standard, reduce_stcon_to_general, ForestInstance,
    PromisePair, ReductionError, StconInstance,
};
use memdep_core::simulator::{self, ExploreLimits, Limits, SimError, DEFAULT_MAX_CONFIGS};
use memdep_core::system::DEFAULT_POPULATION_CAP;
use memdep_core::{Condition, MembraneSystem, Multiset, Verdict};

use crate::corpus;
use crate::textio::{self, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    General,
    Standard,
    Restricted,
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::General => Condition::General,
            ConditionArg::Standard => Condition::Standard,
            ConditionArg::Restricted => Condition::Restricted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    /// Deterministic lexicographic choices.
    Lex,
    /// Every maximally parallel choice; the verdict must be unique.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReductionKind {
    StconGeneral,
    StconPairStandard,
    DfaRestricted,
}

#[derive(Clone, Debug, clap::Args)]
pub struct LimitArgs {
    /// Step limit for simulation.
    #[arg(long, env = "MEMDEP_MAX_STEPS", default_value_t = simulator::DEFAULT_STEP_LIMIT)]
    pub max_steps: u64,
    /// Largest multiset size (and membrane count) allowed in a run.
    #[arg(long, default_value_t = DEFAULT_POPULATION_CAP)]
    pub population_cap: u64,
    /// Distinct configurations explored before giving up.
    #[arg(long, default_value_t = DEFAULT_MAX_CONFIGS)]
    pub max_configs: usize,
}

impl LimitArgs {
    fn run_limits(&self) -> Limits {
        Limits {
            step_limit: self.max_steps,
            population_cap: self.population_cap,
        }
    }

    fn explore_limits(&self) -> ExploreLimits {
        ExploreLimits {
            max_steps: self.max_steps,
            max_configs: self.max_configs,
            population_cap: self.population_cap,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "memdep",
    version,
    about = "Membrane systems without dissolution and their dependency graphs"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a system and judge the computation.
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        condition: ConditionArg,
        #[arg(long, value_enum, default_value = "lex")]
        scheduler: SchedulerArg,
        /// Input objects, space separated, placed in the input membrane.
        #[arg(long, default_value = "")]
        input: String,
        #[command(flatten)]
        limits: LimitArgs,
        /// Print every configuration under its step line.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Compile a system to its dependency graph.
    Depgraph {
        file: PathBuf,
        /// Write the graph here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Leave untouched (object, label) pairs out of the DOT output.
        #[arg(long)]
        prune: bool,
        /// Check that compiling the graph's single-membrane system gives the
        /// same graph back.
        #[arg(long)]
        check: bool,
    },
    /// Decide a dependency graph under an acceptance condition.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        condition: ConditionArg,
    },
    /// Build a reduction output, or sweep instances against the oracle.
    Reduce {
        #[arg(value_enum)]
        kind: ReductionKind,
        /// Plain digraph files (two for stcon-pair-standard). Without
        /// inputs, `--verify` sweeps generated instances.
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Compare the solver on the output with direct s-t reachability.
        #[arg(long)]
        verify: bool,
        /// Seed for random sweeps.
        #[arg(long, default_value_t = corpus::DEFAULT_SEED)]
        seed: u64,
        /// Number of random instances for the forest sweep.
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Print structural flags and witnesses of a dependency graph.
    Classify { file: PathBuf },
    /// Rewrite a system into its single-membrane evolution-only form.
    Normalize {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Check that the result has the same dependency graph.
        #[arg(long)]
        check: bool,
    },
    /// Compare simulation, the graph solver and exhaustive exploration.
    Crosscheck {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        condition: ConditionArg,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Write a generated corpus of recognizer systems.
    Corpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = corpus::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = corpus::DEFAULT_CORPUS_SIZE)]
        count: usize,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{code}: {message}")]
    Semantic { code: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Semantic { .. } => 2,
            _ => 3,
        }
    }

    fn semantic(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Semantic {
            code,
            message: message.into(),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::UnsupportedRule(_) => "UNSUPPORTED_RULE",
            SimError::PopulationCap { .. } => "POPULATION_CAP",
            SimError::NoInputMembrane => "NO_INPUT_MEMBRANE",
            SimError::InvalidSchedule => "INVALID_SCHEDULE",
            SimError::LimitExceeded(_) => "LIMIT_EXCEEDED",
        };
        CliError::semantic(code, e.to_string())
    }
}

impl From<ReductionError> for CliError {
    fn from(e: ReductionError) -> Self {
        CliError::semantic(e.code(), e.to_string())
    }
}

type Out<'a> = &'a mut dyn Write;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_with<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, CliError> {
    let text = read(path)?;
    f(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// A `.pms` system, or the single-membrane system of a `.dg` graph.
fn load_system(path: &Path) -> Result<MembraneSystem, CliError> {
    if path.extension().is_some_and(|e| e == "dg") {
        return parse_with(path, textio::parse_graph).map(|g| graph_to_system(&g));
    }
    parse_with(path, textio::parse_system)
}

fn load_graph(path: &Path, err: Out) -> Result<DependencyGraph, CliError> {
    let g = parse_with(path, textio::parse_graph)?;
    for w in textio::graph_warnings(&g) {
        let _ = writeln!(err, "warning: {}: {w}", path.display());
    }
    Ok(g)
}

fn compile(sys: &MembraneSystem) -> Result<DependencyGraph, CliError> {
    build_dependency_graph(sys).map_err(|e| CliError::semantic(e.code(), e.to_string()))
}

/// Writes to `path`, or to `out` when there is none.
fn emit(path: Option<&Path>, text: &str, out: Out) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

pub fn solve(g: &DependencyGraph, c: Condition) -> Verdict {
    match c {
        Condition::General => solve_general(g),
        Condition::Standard => solve_standard(g),
        Condition::Restricted => solve_restricted(g),
    }
}

/// `VERDICT accept`, `VERDICT reject` or `VERDICT violation <CODE>`.
pub fn verdict_line(v: Verdict) -> String {
    match v {
        Verdict::Accept => "VERDICT accept".into(),
        Verdict::Reject => "VERDICT reject".into(),
        Verdict::Violation(code) => format!("VERDICT violation {code}"),
    }
}

pub fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::Accept => 0,
        Verdict::Reject => 1,
        Verdict::Violation(_) => 2,
    }
}

fn print_verdict(v: Verdict, out: Out) -> i32 {
    let _ = writeln!(out, "{v}");
    let _ = writeln!(out, "{}", verdict_line(v));
    verdict_exit(v)
}

fn verdict_set(vs: &BTreeSet<Verdict>) -> String {
    let names: Vec<String> = vs
        .iter()
        .map(|v| match v {
            Verdict::Accept => "Accept".to_string(),
            Verdict::Reject => "Reject".to_string(),
            Verdict::Violation(c) => format!("Violation({c})"),
        })
        .collect();
    format!("{{{}}}", names.join(","))
}

/// Parses arguments and runs the command; returns the exit status.
pub fn main_with<I, T>(args: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cfg.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, out: Out, err: Out) -> Result<i32, CliError> {
    match cmd {
        Command::Simulate {
            file,
            condition,
            scheduler,
            input,
            limits,
            verbose,
        } => {
            let sys = load_system(file)?;
            let input: Multiset = input.split_whitespace().collect();
            if let Some(o) = input.support().find(|o| !sys.alphabet.contains(*o)) {
                return Err(CliError::Usage(format!("input object `{o}` is not in the alphabet")));
            }
            simulate(
                &sys,
                &input,
                (*condition).into(),
                *scheduler,
                limits,
                *verbose,
                out,
                err,
            )
        }
        Command::Depgraph {
            file,
            output,
            dot,
            prune,
            check,
        } => {
            let sys = load_system(file)?;
            let g = compile(&sys)?;
            emit(output.as_deref(), &textio::serialize_graph(&g), out)?;
            if let Some(path) = dot {
                write_file(path, &textio::emit_dot(&g, *prune))?;
            }
            if *check {
                let back = compile(&graph_to_system(&g))?;
                return report_check(&g, &back, err);
            }
            Ok(0)
        }
        Command::Solve { file, condition } => {
            let g = load_graph(file, err)?;
            Ok(print_verdict(solve(&g, (*condition).into()), out))
        }
        Command::Reduce {
            kind,
            inputs,
            output,
            verify,
            seed,
            count,
        } => {
            if inputs.is_empty() {
                if !*verify {
                    return Err(CliError::Usage(
                        "reduce needs input files, or --verify for a sweep".into(),
                    ));
                }
                return sweep(*kind, *seed, *count, out);
            }
            let (g, oracle) = reduce_files(*kind, inputs)?;
            emit(output.as_deref(), &textio::serialize_graph(&g), out)?;
            if *verify {
                let ok = reduced_ok(*kind, &g, oracle);
                let _ = writeln!(err, "{} n=1", if ok { "OK" } else { "FAIL" });
                return Ok(if ok { 0 } else { 2 });
            }
            Ok(0)
        }
        Command::Classify { file } => {
            let g = load_graph(file, err)?;
            let _ = write!(out, "{}", classify_report(&g));
            Ok(0)
        }
        Command::Normalize { file, output, check } => {
            let sys = load_system(file)?;
            let nf = normalize(&sys).map_err(|e| CliError::semantic(e.code(), e.to_string()))?;
            emit(output.as_deref(), &textio::serialize_system(&nf), out)?;
            if *check {
                return report_check(&compile(&sys)?, &compile(&nf)?, err);
            }
            Ok(0)
        }
        Command::Crosscheck {
            file,
            condition,
            limits,
        } => {
            let sys = load_system(file)?;
            crosscheck(&sys, (*condition).into(), limits, out)
        }
        Command::Corpus { out: dir, seed, count } => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let _ = writeln!(out, "seed={seed}");
            for e in corpus::generate_corpus(*seed, *count) {
                write_file(
                    &dir.join(format!("{}.pms", e.name)),
                    &textio::serialize_system(&e.system),
                )?;
                let valid: Vec<String> = e.valid.iter().map(|(c, v)| format!("{c}={v}")).collect();
                let _ = writeln!(out, "{} {}", e.name, valid.join(" "));
            }
            Ok(0)
        }
    }
}

fn report_check(a: &DependencyGraph, b: &DependencyGraph, err: Out) -> Result<i32, CliError> {
    if graphs_equal_canonical(a, b) {
        let _ = writeln!(err, "CHECK ok");
        return Ok(0);
    }
    let mut msg = String::from("graphs differ under canonical renaming");
    for d in canonical_differences(a, b) {
        let _ = write!(msg, "\n  {d}");
    }
    Err(CliError::semantic("CHECK_FAILED", msg))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    sys: &MembraneSystem,
    input: &Multiset,
    condition: Condition,
    scheduler: SchedulerArg,
    limits: &LimitArgs,
    verbose: bool,
    out: Out,
    err: Out,
) -> Result<i32, CliError> {
    match scheduler {
        SchedulerArg::Lex => {
            let trace = simulator::run(sys, input, &limits.run_limits())?;
            let _ = write!(out, "{}", trace.dump(verbose));
            let _ = writeln!(out, "halt: {} at step {}", trace.halt_reason, trace.final_step());
            for (o, steps) in trace.repeated_signals() {
                let _ = writeln!(err, "warning: {o} released in steps {steps:?}");
            }
            let v = simulator::judge(&trace, condition).unwrap_or_else(|e| e.violation());
            Ok(print_verdict(v, out))
        }
        SchedulerArg::Exhaustive => {
            let ex = simulator::explore_all(sys, input, &limits.explore_limits())?;
            let _ = writeln!(out, "explored {} states, {} computations", ex.states, ex.leaves);
            match ex.unique(condition) {
                Some(v) => Ok(print_verdict(v, out)),
                None => {
                    let _ = writeln!(out, "NON-CONFLUENT {}", verdict_set(ex.verdicts(condition)));
                    Ok(2)
                }
            }
        }
    }
}

fn crosscheck(sys: &MembraneSystem, c: Condition, limits: &LimitArgs, out: Out) -> Result<i32, CliError> {
    let trace = simulator::run(sys, &Multiset::new(), &limits.run_limits())?;
    let simulated = simulator::judge(&trace, c).unwrap_or_else(|e| e.violation());
    let g = compile(sys)?;
    let solved = solve(&g, c);
    let _ = writeln!(out, "simulator: {simulated}");
    let _ = writeln!(out, "solver: {solved}");
    match simulator::explore_all(sys, &Multiset::new(), &limits.explore_limits()) {
        Ok(ex) => {
            let _ = writeln!(out, "explored: {} ({} states)", verdict_set(ex.verdicts(c)), ex.states);
            if !ex.is_confluent(c) {
                let _ = writeln!(out, "NON-CONFLUENT {}", verdict_set(ex.verdicts(c)));
                return Ok(2);
            }
        }
        Err(SimError::LimitExceeded(n)) => {
            let _ = writeln!(out, "explored: skipped, more than {n} states");
        }
        Err(e) => return Err(e.into()),
    }
    if simulated == solved {
        let _ = writeln!(out, "AGREE");
        Ok(0)
    } else {
        let _ = writeln!(out, "DISAGREE");
        let _ = write!(out, "{}", trace.dump(false));
        Ok(2)
    }
}

fn classify_report(g: &DependencyGraph) -> String {
    let cc = classify(g);
    let classes = compute_object_classes(g);
    let mut s = String::new();
    let _ = writeln!(s, "acyclic={}", cc.acyclic);
    let _ = writeln!(s, "reachable_acyclic={}", cc.reachable_acyclic);
    let _ = writeln!(s, "standard_ok={}", cc.standard_ok);
    let _ = writeln!(s, "restricted_ok={}", cc.restricted_ok);
    let _ = writeln!(s, "lambda_free={}", cc.lambda_free);
    let live = g.live_nodes();
    let count = |set: &BTreeSet<String>| set.iter().filter(|v| live.contains(v.as_str())).count();
    let _ = writeln!(
        s,
        "o_yes={} o_no={} o_other={} (live nodes)",
        count(&classes.o_yes),
        count(&classes.o_no),
        count(&classes.o_other)
    );
    for d in &cc.diagnostics {
        let _ = writeln!(s, "witness: {d}");
    }
    s
}

fn load_digraph(path: &Path) -> Result<StconInstance, CliError> {
    parse_with(path, textio::parse_digraph)
}

fn reduce_files(kind: ReductionKind, inputs: &[PathBuf]) -> Result<(DependencyGraph, bool), CliError> {
    let want = if kind == ReductionKind::StconPairStandard { 2 } else { 1 };
    if inputs.len() != want {
        return Err(CliError::Usage(format!(
            "{kind:?} takes {want} input file(s), got {}",
            inputs.len()
        )));
    }
    match kind {
        ReductionKind::StconGeneral => {
            let inst = load_digraph(&inputs[0])?;
            Ok((reduce_stcon_to_general(&inst), inst.holds()))
        }
        ReductionKind::StconPairStandard => {
            let pair = PromisePair {
                g: load_digraph(&inputs[0])?,
                g_prime: load_digraph(&inputs[1])?,
            };
            Ok((reduce_stcon_pair_to_standard(&pair)?, pair.g.holds()))
        }
        ReductionKind::DfaRestricted => {
            let f: ForestInstance = load_digraph(&inputs[0])?;
            check_forest(&f)?;
            Ok((reduce_dfa_to_restricted(&f)?, f.holds()))
        }
    }
}

/// The solver verdict on a reduction output matches the s-t answer, and
/// the output has the shape its condition asks for.
fn reduced_ok(kind: ReductionKind, g: &DependencyGraph, holds: bool) -> bool {
    let expected = if holds { Verdict::Accept } else { Verdict::Reject };
    match kind {
        ReductionKind::StconGeneral => solve_general(g) == expected,
        ReductionKind::StconPairStandard => solve_standard(g) == expected && classify(g).standard_ok,
        ReductionKind::DfaRestricted => solve_restricted(g) == expected && classify(g).restricted_ok,
    }
}

fn sweep(kind: ReductionKind, seed: u64, count: usize, out: Out) -> Result<i32, CliError> {
    let mut failures: Vec<String> = Vec::new();
    let mut n = 0usize;
    let mut check = |g: DependencyGraph, holds: bool, label: &dyn Fn() -> String| {
        n += 1;
        if !reduced_ok(kind, &g, holds) {
            failures.push(label());
        }
    };
    match kind {
        ReductionKind::StconGeneral => {
            for inst in corpus::all_stcon_instances(4) {
                let edges = format!("{:?}", inst.graph.edges);
                check(reduce_stcon_to_general(&inst), inst.holds(), &|| edges.clone());
            }
        }
        ReductionKind::StconPairStandard => {
            for pair in corpus::all_promise_pairs() {
                let g = reduce_stcon_pair_to_standard(&pair)?;
                let edges = format!("{:?} | {:?}", pair.g.graph.edges, pair.g_prime.graph.edges);
                check(g, pair.g.holds(), &|| edges.clone());
            }
        }
        ReductionKind::DfaRestricted => {
            let _ = writeln!(out, "seed={seed}");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let f = corpus::random_forest(&mut rng, 8);
                let edges = format!("{:?} s={} t={}", f.graph.edges, f.s, f.t);
                check(reduce_dfa_to_restricted(&f)?, f.holds(), &|| edges.clone());
            }
        }
    }
    if failures.is_empty() {
        let _ = writeln!(out, "OK n={n}");
        Ok(0)
    } else {
        let _ = writeln!(out, "FAIL {} of n={n}; first: {}", failures.len(), failures[0]);
        Ok(2)
    }
}
