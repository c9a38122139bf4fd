//! `worklab` command line.
//!
//! Exit codes: 0 success, 1 usage or contract error, 2 runtime failure.
//! `WORKLAB_THREADS` sets the worker thread count.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::{
    run_scaling, run_tail, summarize, write_report, write_summary, EgConfig, EgMethod, EnsembleConfig,
    ExperimentConfig, GraphKind, MenuEntry, ReportFormat, SubsetSize, TailEnsemble, TailParams, MAX_DIM,
};
use crate::error::Error;
use crate::graphs::{gen_lattice, gen_random_graph, Graph, LatticeKind};
use crate::locc::{refine_rank_one, work_of, ProtocolFile};
use crate::qstate::{hilbert_dim, PureState};
use crate::workbounds::{w_global, w_local, BRUTEFORCE_MAX_SITES, CERTIFIED_GRID};

pub const THREADS_ENV: &str = "WORKLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "worklab", version, about = "Extractable-work bounds for multipartite pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Global, local and best-protocol work of one state.
    Work(WorkArgs),
    /// Estimate the geometric entanglement E_g and the LOCC work upper bound.
    Eg(EgArgs),
    /// Execute a protocol description file on a state.
    Protocol(ProtocolArgs),
    /// Scaling sweeps and tail-bound tables.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Graph utilities.
    #[command(subcommand)]
    Graph(GraphCommand),
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Run a JSON-configured sweep over N and samples.
    Scaling(ScalingArgs),
    /// Empirical overlap tails next to the concentration bounds.
    Tail(TailArgs),
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Print a graph as an edge list.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum StateKind {
    Haar,
    Circuit,
    Subset,
    Graph,
    Ghz,
    W,
    Plus,
    Zero,
}

#[derive(Args, Debug)]
struct StateArgs {
    #[arg(long, value_enum, default_value = "haar")]
    state: StateKind,
    /// Number of sites.
    #[arg(long)]
    n: usize,
    /// Local dimension (haar only).
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Brickwork depth (circuit).
    #[arg(long, default_value_t = 20)]
    depth: usize,
    /// Support size (subset); defaults to 2^⌊N/2⌋.
    #[arg(long)]
    k: Option<u64>,
    /// Graph family (graph).
    #[arg(long, value_enum, default_value = "cycle")]
    graph: GraphKind,
    /// Torus and honeycomb row count (graph).
    #[arg(long)]
    rows: Option<usize>,
    /// Edge-list file; overrides --graph.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WorkArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Protocol menu for the lower bound (comma separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    menu: Vec<MenuEntry>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct EgArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: EgMethod,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Bloch grid points per axis (bruteforce).
    #[arg(long, default_value_t = CERTIFIED_GRID)]
    grid: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ProtocolArgs {
    /// JSON protocol description.
    #[arg(long)]
    file: PathBuf,
    #[command(flatten)]
    state: StateArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured output path.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TailKind {
    Haar,
    Circuit,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[arg(long, value_enum, default_value = "haar")]
    ensemble: TailKind,
    #[arg(long, default_value_t = 20)]
    depth: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,50,100,200")]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    t: u32,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    /// Vertex count (random, cycle).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Incompatible(_) | Error::InvalidConfig(_) => Self::Usage(e.to_string()),
            e => Self::Runtime(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Runtime(Error::Io(e))
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Runs the CLI on `args` (including the program name) with the process's
/// standard streams.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Work(a) => work(a, out),
        Command::Eg(a) => eg(a, out),
        Command::Protocol(a) => protocol(a, out),
        Command::Experiment(ExperimentCommand::Scaling(a)) => scaling(a, out),
        Command::Experiment(ExperimentCommand::Tail(a)) => tail(a, out),
        Command::Graph(GraphCommand::Gen(a)) => graph_gen(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool built earlier in the process (tests) keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> std::result::Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage(format!("--seed is required for {what}")))
}

impl StateArgs {
    fn check_size(&self) -> CliResult {
        let d = if self.state == StateKind::Haar { self.d } else { 2 };
        if d < 2 {
            return Err(Failure::Usage("--d must be at least 2".into()));
        }
        match hilbert_dim(self.n, d) {
            Ok(dim) if dim <= MAX_DIM => Ok(()),
            _ => Err(Failure::Usage(format!("N = {} with d = {d} exceeds the {MAX_DIM}-amplitude limit", self.n))),
        }
    }

    fn ensemble(&self) -> Option<EnsembleConfig> {
        match self.state {
            StateKind::Haar => Some(EnsembleConfig::Haar { local_dim: self.d }),
            StateKind::Circuit => Some(EnsembleConfig::Circuit { depth: self.depth }),
            StateKind::Subset => Some(EnsembleConfig::Subset {
                k: self.k.map(SubsetSize::Count).unwrap_or(SubsetSize::Rule(super::SizeRule::HalfN)),
            }),
            StateKind::Graph => Some(EnsembleConfig::Graph { graph: self.graph, rows: self.rows }),
            StateKind::Ghz => Some(EnsembleConfig::Ghz),
            StateKind::W => Some(EnsembleConfig::W),
            StateKind::Plus | StateKind::Zero => None,
        }
    }

    fn is_stochastic(&self) -> bool {
        match self.state {
            StateKind::Haar | StateKind::Circuit | StateKind::Subset => true,
            StateKind::Graph => self.edges.is_none() && self.graph == GraphKind::Random,
            _ => false,
        }
    }

    /// The state and, for graph states, its graph.
    fn build(&self) -> std::result::Result<(PureState, Option<Graph>), Failure> {
        self.check_size()?;
        let seed = if self.is_stochastic() {
            require_seed(self.seed, &format!("--state {}", state_name(self.state)))?
        } else {
            self.seed.unwrap_or(0)
        };
        if self.state == StateKind::Graph {
            let g = match &self.edges {
                Some(path) => Graph::from_edge_list_str(&fs::read_to_string(path)?)?,
                None => EnsembleConfig::Graph { graph: self.graph, rows: self.rows }.graph(self.n, seed)?.expect("graph"),
            };
            if g.num_vertices() != self.n {
                return Err(Failure::Usage(format!("graph has {} vertices, --n is {}", g.num_vertices(), self.n)));
            }
            return Ok((crate::ensembles::graph_state(&g)?, Some(g)));
        }
        let state = match self.state {
            StateKind::Plus => PureState::plus(self.n)?,
            StateKind::Zero => PureState::basis(self.n, 2, 0)?,
            _ => {
                let ensemble = self.ensemble().expect("sampled family");
                let probe = ExperimentConfig {
                    ensemble: ensemble.clone(),
                    n_values: vec![self.n],
                    samples: 1,
                    estimators: Default::default(),
                    base_seed: seed,
                    output: None,
                    format: ReportFormat::Csv,
                };
                probe.validate()?;
                ensemble.sample(self.n, seed)?
            }
        };
        Ok((state, None))
    }
}

fn state_name(kind: StateKind) -> String {
    kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

/// `key=value` lines, or one JSON object.
fn emit<T: Serialize>(out: &mut dyn Write, json: bool, value: &T, pairs: &[(&str, String)]) -> CliResult {
    if json {
        serde_json::to_writer_pretty(&mut *out, value).map_err(Error::from)?;
        writeln!(out)?;
    } else {
        for (k, v) in pairs {
            writeln!(out, "{k}={v}")?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct WorkReport {
    state: String,
    n: usize,
    d: usize,
    w_global: f64,
    w_local: f64,
    w_locc_lower: f64,
    best_protocol: String,
}

fn work(a: WorkArgs, out: &mut dyn Write) -> CliResult {
    let (psi, graph) = a.state.build()?;
    let mut menu = a.menu.clone();
    if menu.is_empty() {
        menu = vec![MenuEntry::Null, MenuEntry::NullRefined, MenuEntry::Subset];
        if graph.is_some() {
            menu.push(MenuEntry::IndependentSet);
        }
    }
    if menu.contains(&MenuEntry::IndependentSet) && graph.is_none() {
        return Err(Failure::Usage("independent_set needs --state graph".into()));
    }
    if menu.contains(&MenuEntry::XBasis) && psi.local_dim() != 2 {
        return Err(Failure::Usage("x_basis is defined for qubits".into()));
    }
    let mut best: Option<(f64, MenuEntry)> = None;
    for entry in menu {
        let w = work_of(&entry.build(&psi, graph.as_ref())?, &psi)?.w_lambda;
        if best.is_none_or(|(b, _)| w > b) {
            best = Some((w, entry));
        }
    }
    let (lower, entry) = best.expect("nonempty menu");
    let report = WorkReport {
        state: state_name(a.state.state),
        n: psi.num_sites(),
        d: psi.local_dim(),
        w_global: w_global(&psi),
        w_local: w_local(&psi),
        w_locc_lower: lower,
        best_protocol: entry.name().to_string(),
    };
    let pairs = [
        ("state", report.state.clone()),
        ("N", report.n.to_string()),
        ("d", report.d.to_string()),
        ("w_global", report.w_global.to_string()),
        ("w_local", report.w_local.to_string()),
        ("w_locc_lower", report.w_locc_lower.to_string()),
        ("best_protocol", report.best_protocol.clone()),
    ];
    emit(out, a.json, &report, &pairs)
}

#[derive(Serialize)]
struct EgReport {
    eg_value: f64,
    max_overlap_sqr: f64,
    certification: String,
    w_locc_upper: f64,
}

fn eg(a: EgArgs, out: &mut dyn Write) -> CliResult {
    let d = if a.state.state == StateKind::Haar { a.state.d } else { 2 };
    let cfg = EgConfig { method: a.method, restarts: a.restarts, tol: a.tol, max_iters: a.max_iters, grid: a.grid };
    if a.method == EgMethod::Bruteforce && (a.state.n > BRUTEFORCE_MAX_SITES || d != 2) {
        return Err(Failure::Usage(format!(
            "bruteforce E_g is limited to qubit states with N ≤ {BRUTEFORCE_MAX_SITES} (got N = {}, d = {d})",
            a.state.n
        )));
    }
    cfg.check(a.state.n, d)?;
    let (psi, _) = a.state.build()?;
    let uses_alternating = match a.method {
        EgMethod::Alternating => true,
        EgMethod::Auto => !(d == 2 && psi.num_sites() <= BRUTEFORCE_MAX_SITES && psi.num_sites() > 2),
        _ => false,
    };
    let seed = if uses_alternating { require_seed(a.state.seed, "the alternating E_g estimator")? } else { 0 };
    let (value, cert, upper) = cfg.evaluate(&psi, seed)?;
    let report = EgReport { eg_value: value, max_overlap_sqr: (-value).exp(), certification: cert.to_string(), w_locc_upper: upper };
    let pairs = [
        ("eg_value", value.to_string()),
        ("max_overlap_sqr", report.max_overlap_sqr.to_string()),
        ("certification", report.certification.clone()),
        ("w_locc_upper", upper.to_string()),
    ];
    emit(out, a.json, &report, &pairs)
}

#[derive(Serialize)]
struct ProtocolReport {
    protocol: String,
    rounds: usize,
    w_lambda: f64,
    outcome_entropy: f64,
    local_term: f64,
    leaf_count: usize,
}

fn protocol(a: ProtocolArgs, out: &mut dyn Write) -> CliResult {
    let text = fs::read_to_string(&a.file)?;
    let file = ProtocolFile::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.file.display())))?;
    if file.num_sites != a.state.n {
        return Err(Failure::Usage(format!("protocol is for {} sites, --n is {}", file.num_sites, a.state.n)));
    }
    let mut p = file.build()?;
    let (psi, _) = a.state.build()?;
    if file.refine_rank_one {
        p = refine_rank_one(&p, &psi)?;
    }
    let w = work_of(&p, &psi)?;
    let report = ProtocolReport {
        protocol: p.name().to_string(),
        rounds: p.num_rounds(),
        w_lambda: w.w_lambda,
        outcome_entropy: w.outcome_entropy,
        local_term: w.local_term,
        leaf_count: w.leaf_count,
    };
    let pairs = [
        ("protocol", report.protocol.clone()),
        ("rounds", report.rounds.to_string()),
        ("w_lambda", w.w_lambda.to_string()),
        ("outcome_entropy", w.outcome_entropy.to_string()),
        ("local_term", w.local_term.to_string()),
        ("leaf_count", w.leaf_count.to_string()),
    ];
    emit(out, a.json, &report, &pairs)
}

fn scaling(a: ScalingArgs, out: &mut dyn Write) -> CliResult {
    let text = fs::read_to_string(&a.config)?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.config.display())))?;
    if let Some(path) = a.output {
        cfg.output = Some(path);
    }
    if let Some(format) = a.format {
        cfg.format = format;
    }
    let rows = run_scaling(&cfg)?;
    let summary = summarize(&rows);
    if cfg.output.is_none() {
        write_report(&mut *out, &rows, cfg.format)?;
    } else {
        write_summary(out, &summary)?;
    }
    Ok(())
}

fn tail(a: TailArgs, out: &mut dyn Write) -> CliResult {
    let seed = require_seed(a.seed, "experiment tail")?;
    if a.samples < super::tail::MIN_TAIL_SAMPLES {
        return Err(Failure::Usage(format!("--samples must be at least {}", super::tail::MIN_TAIL_SAMPLES)));
    }
    if a.n == 0 || hilbert_dim(a.n, 2).map_or(true, |d| d > MAX_DIM) || (a.ensemble == TailKind::Circuit && a.n < 2) {
        return Err(Failure::Usage(format!("unsupported N = {}", a.n)));
    }
    let params = TailParams {
        ensemble: match a.ensemble {
            TailKind::Haar => TailEnsemble::Haar,
            TailKind::Circuit => TailEnsemble::Circuit { depth: a.depth },
        },
        n: a.n,
        samples: a.samples,
        alphas: a.alphas,
        t: a.t,
        epsilon: a.epsilon,
        seed,
    };
    let rows = run_tail(&params).map_err(|e| match e {
        Error::InvalidArgument(m) => Failure::Usage(m),
        e => Failure::Runtime(e),
    })?;
    if a.json {
        serde_json::to_writer_pretty(&mut *out, &rows).map_err(Error::from)?;
        writeln!(out)?;
    } else {
        let mut w = csv::Writer::from_writer(out);
        for r in &rows {
            w.serialize(r).map_err(Error::from)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn graph_gen(a: GenArgs, out: &mut dyn Write) -> CliResult {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this graph kind")));
    let g = match a.kind {
        GraphKind::Random => gen_random_graph(need(a.n, "n")?, require_seed(a.seed, "random graphs")?)?,
        GraphKind::Cycle => gen_lattice(LatticeKind::Cycle, &[need(a.n, "n")?])?,
        kind => {
            let lattice = match kind {
                GraphKind::SquareTorus => LatticeKind::SquareTorus,
                GraphKind::TriangularTorus => LatticeKind::TriangularTorus,
                _ => LatticeKind::Hexagonal,
            };
            gen_lattice(lattice, &[need(a.rows, "rows")?, need(a.cols, "cols")?])?
        }
    };
    let text = g.to_edge_list_string();
    match a.output {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
