//! Experiment harness: scaling sweeps over state ensembles, tail-bound
//! tables, and report serialization. The CLI lives in [`cli`].
//!
//! Row seeds are `base_seed ^ splitmix64((N << 32) | sample)`; the E_g
//! estimator of a row is seeded with `splitmix64(row_seed)`. Rows are
//! computed in parallel and written in `(N, sample)` order.

pub mod cli;
pub mod report;
pub mod tail;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{graph_state, sample_circuit, sample_haar, sample_subset, subset_state, CircuitSpec};
use crate::error::{Error, Result};
use crate::graphs::{gen_lattice, gen_random_graph, Graph, LatticeKind};
use crate::locc::{
    independent_set_protocol, null_protocol, refine_rank_one, subset_protocol, work_of, Protocol,
    SiteMeasurement,
};
use crate::qstate::{hilbert_dim, PureState, SiteSubset};
use crate::workbounds::{
    eg_alternating, eg_bruteforce, eg_schmidt, w_global, w_local, w_locc_upper, Certification, EgOptions,
    BRUTEFORCE_MAX_SITES, CERTIFIED_GRID,
};

pub use report::{emit_report, read_report, write_report, ReportFormat, ResultRow, CSV_HEADER};
pub use tail::{run_tail, wilson_interval, TailEnsemble, TailParams, TailRow, C1};

/// Statevectors above this many amplitudes are refused by the harness.
pub const MAX_DIM: usize = 1 << 24;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn row_seed(base_seed: u64, n: usize, sample: usize) -> u64 {
    base_seed ^ splitmix64(((n as u64) << 32) | sample as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleConfig {
    Haar {
        #[serde(default = "two")]
        local_dim: usize,
    },
    Circuit {
        depth: usize,
    },
    Subset {
        k: SubsetSize,
    },
    Graph {
        graph: GraphKind,
        /// Torus and honeycomb row count; columns are `N / rows`.
        #[serde(default)]
        rows: Option<usize>,
    },
    Ghz,
    W,
}

fn two() -> usize {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubsetSize {
    Count(u64),
    Rule(SizeRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeRule {
    /// `K = 2^⌊N/2⌋`.
    HalfN,
}

impl SubsetSize {
    pub fn resolve(self, n: usize) -> u64 {
        match self {
            Self::Count(k) => k,
            Self::Rule(SizeRule::HalfN) => 1u64 << (n / 2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GraphKind {
    Random,
    Cycle,
    SquareTorus,
    TriangularTorus,
    Hexagonal,
}

impl EnsembleConfig {
    pub fn label(&self) -> String {
        match self {
            Self::Haar { local_dim: 2 } => "haar".into(),
            Self::Haar { local_dim } => format!("haar_d{local_dim}"),
            Self::Circuit { depth } => format!("circuit_depth{depth}"),
            Self::Subset { k: SubsetSize::Count(k) } => format!("subset_k{k}"),
            Self::Subset { k: SubsetSize::Rule(SizeRule::HalfN) } => "subset_half_n".into(),
            Self::Graph { graph, .. } => format!("graph_{}", graph_kind_name(*graph)),
            Self::Ghz => "ghz".into(),
            Self::W => "w".into(),
        }
    }

    pub fn local_dim(&self) -> usize {
        match self {
            Self::Haar { local_dim } => *local_dim,
            _ => 2,
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Self::Haar { .. } | Self::Circuit { .. } | Self::Subset { .. } | Self::Graph { graph: GraphKind::Random, .. }
        )
    }

    /// The graph behind a graph-state ensemble member.
    pub fn graph(&self, n: usize, seed: u64) -> Result<Option<Graph>> {
        let Self::Graph { graph, rows } = self else {
            return Ok(None);
        };
        let torus = |kind: LatticeKind| {
            let r = rows.or_else(|| exact_sqrt(n)).ok_or_else(|| {
                Error::Incompatible(format!("N = {n} is not a square; give \"rows\" for the torus"))
            })?;
            if r == 0 || n % r != 0 {
                return Err(Error::Incompatible(format!("N = {n} is not a multiple of rows = {r}")));
            }
            gen_lattice(kind, &[r, n / r])
        };
        let g = match graph {
            GraphKind::Random => gen_random_graph(n, seed)?,
            GraphKind::Cycle => gen_lattice(LatticeKind::Cycle, &[n])?,
            GraphKind::SquareTorus => torus(LatticeKind::SquareTorus)?,
            GraphKind::TriangularTorus => torus(LatticeKind::TriangularTorus)?,
            GraphKind::Hexagonal => {
                let r = rows.unwrap_or(2);
                if r == 0 || n % r != 0 {
                    return Err(Error::Incompatible(format!("N = {n} is not a multiple of rows = {r}")));
                }
                gen_lattice(LatticeKind::Hexagonal, &[r, n / r])?
            }
        };
        Ok(Some(g))
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<PureState> {
        match self {
            Self::Haar { local_dim } => sample_haar(n, *local_dim, seed),
            Self::Circuit { depth } => sample_circuit(&CircuitSpec::new(n, *depth, seed)?),
            Self::Subset { k } => {
                let k = usize::try_from(k.resolve(n)).map_err(|_| Error::Incompatible("K too large".into()))?;
                subset_state(&sample_subset(n, k, seed)?)
            }
            Self::Graph { .. } => graph_state(&self.graph(n, seed)?.expect("graph ensemble")),
            Self::Ghz => PureState::ghz(n, 2),
            Self::W => PureState::w_state(n),
        }
    }
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

pub(crate) fn graph_kind_name(kind: GraphKind) -> &'static str {
    match kind {
        GraphKind::Random => "random",
        GraphKind::Cycle => "cycle",
        GraphKind::SquareTorus => "square_torus",
        GraphKind::TriangularTorus => "triangular_torus",
        GraphKind::Hexagonal => "hexagonal",
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum EgMethod {
    /// Brute force for qubit states with N ≤ 4, alternating otherwise.
    #[default]
    Auto,
    Alternating,
    Bruteforce,
    Schmidt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgConfig {
    #[serde(default)]
    pub method: EgMethod,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_restarts() -> usize {
    EgOptions::default().restarts
}
fn default_tol() -> f64 {
    EgOptions::default().tol
}
fn default_max_iters() -> usize {
    EgOptions::default().max_iters
}
fn default_grid() -> usize {
    CERTIFIED_GRID
}

impl Default for EgConfig {
    fn default() -> Self {
        Self {
            method: EgMethod::Auto,
            restarts: default_restarts(),
            tol: default_tol(),
            max_iters: default_max_iters(),
            grid: default_grid(),
        }
    }
}

impl EgConfig {
    pub fn options(&self) -> EgOptions {
        EgOptions { restarts: self.restarts, tol: self.tol, max_iters: self.max_iters }
    }

    /// Rejects method/shape combinations the estimator cannot handle.
    pub fn check(&self, n: usize, d: usize) -> Result<()> {
        match self.method {
            EgMethod::Bruteforce if d != 2 || n > BRUTEFORCE_MAX_SITES => Err(Error::Incompatible(format!(
                "bruteforce E_g needs qubits and N ≤ {BRUTEFORCE_MAX_SITES}; got N = {n}, d = {d}"
            ))),
            EgMethod::Bruteforce if self.grid < 2 => Err(Error::Incompatible("bruteforce grid must be ≥ 2".into())),
            EgMethod::Schmidt if n != 2 => {
                Err(Error::Incompatible(format!("Schmidt E_g is exact only for N = 2; got N = {n}")))
            }
            _ if self.restarts == 0 => Err(Error::Incompatible("restarts must be ≥ 1".into())),
            _ => Ok(()),
        }
    }

    /// `(E_g, certification, N ln d − E_g)`.
    pub fn evaluate(&self, state: &PureState, seed: u64) -> Result<(f64, Certification, f64)> {
        let (n, d) = (state.num_sites(), state.local_dim());
        self.check(n, d)?;
        let estimate = match self.method {
            EgMethod::Schmidt => {
                let value = eg_schmidt(state, &SiteSubset::single(0))?;
                return Ok((value, Certification::SchmidtExact, w_global(state) - value));
            }
            EgMethod::Bruteforce => eg_bruteforce(state, self.grid)?,
            EgMethod::Auto if d == 2 && n <= BRUTEFORCE_MAX_SITES && n > 2 => eg_bruteforce(state, CERTIFIED_GRID)?,
            EgMethod::Auto | EgMethod::Alternating => eg_alternating(state, &self.options(), seed),
        };
        let (upper, cert) = w_locc_upper(state, &estimate)?;
        Ok((estimate.value, cert, upper))
    }
}

/// Protocol menu entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum MenuEntry {
    Null,
    NullRefined,
    /// Computational basis on every site.
    #[serde(alias = "z_basis")]
    #[value(alias = "z_basis")]
    Subset,
    /// `Subset` followed by the rank-one refinement.
    ZRefined,
    /// `{|+⟩,|−⟩}` on every qubit.
    XBasis,
    /// Greedy independent set protocol; graph ensembles only.
    IndependentSet,
}

impl MenuEntry {
    pub fn name(self) -> &'static str {
        match self {
            Self::Null => "null",
            Self::NullRefined => "null_refined",
            Self::Subset => "subset",
            Self::ZRefined => "z_refined",
            Self::XBasis => "x_basis",
            Self::IndependentSet => "independent_set",
        }
    }

    fn check(self, ensemble: &EnsembleConfig) -> Result<()> {
        let d = ensemble.local_dim();
        match self {
            Self::XBasis if d != 2 => Err(Error::Incompatible("x_basis is defined for qubits".into())),
            Self::IndependentSet if !matches!(ensemble, EnsembleConfig::Graph { .. }) => Err(Error::Incompatible(
                "independent_set needs a graph-state ensemble".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn build(self, state: &PureState, graph: Option<&Graph>) -> Result<Protocol> {
        let (n, d) = (state.num_sites(), state.local_dim());
        let z = || -> Result<Protocol> {
            if d == 2 {
                subset_protocol(n)
            } else {
                Protocol::fixed("subset", d, vec![vec![SiteMeasurement::computational(d); n]])
            }
        };
        match self {
            Self::Null => null_protocol(n, d),
            Self::NullRefined => refine_rank_one(&null_protocol(n, d)?, state),
            Self::Subset => z(),
            Self::ZRefined => refine_rank_one(&z()?, state),
            Self::XBasis => Protocol::fixed("x_basis", 2, vec![vec![SiteMeasurement::hadamard_basis(); n]]),
            Self::IndependentSet => independent_set_protocol(
                graph.ok_or_else(|| Error::Incompatible("independent_set needs a graph".into()))?,
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default = "yes")]
    pub w_local: bool,
    #[serde(default)]
    pub eg: Option<EgConfig>,
    /// The null protocol is always appended when missing.
    #[serde(default)]
    pub protocols: Vec<MenuEntry>,
}

fn yes() -> bool {
    true
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { w_local: true, eg: None, protocols: Vec::new() }
    }
}

impl EstimatorConfig {
    pub fn menu(&self) -> Vec<MenuEntry> {
        let mut menu = self.protocols.clone();
        if !menu.contains(&MenuEntry::Null) {
            menu.push(MenuEntry::Null);
        }
        menu
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleConfig,
    pub n_values: Vec<usize>,
    pub samples: usize,
    #[serde(default)]
    pub estimators: EstimatorConfig,
    pub base_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be ≥ 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values is empty".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("n_values must be strictly ascending".into()));
        }
        if self.samples > u32::MAX as usize || self.n_values.iter().any(|&n| n > u32::MAX as usize) {
            return Err(Error::InvalidConfig("N and samples must fit in 32 bits".into()));
        }
        let d = self.ensemble.local_dim();
        for &n in &self.n_values {
            let dim = hilbert_dim(n, d).map_err(|e| Error::Incompatible(e.to_string()))?;
            if dim > MAX_DIM {
                return Err(Error::Incompatible(format!("N = {n} exceeds the {MAX_DIM}-amplitude limit")));
            }
            match &self.ensemble {
                EnsembleConfig::Haar { local_dim } if *local_dim < 2 => {
                    return Err(Error::InvalidConfig("local_dim must be ≥ 2".into()))
                }
                EnsembleConfig::Circuit { .. } if n < 2 => {
                    return Err(Error::Incompatible("circuits need N ≥ 2".into()))
                }
                EnsembleConfig::Subset { k } => {
                    let k = k.resolve(n);
                    if k == 0 || n >= 64 || k > 1u64 << n {
                        return Err(Error::Incompatible(format!("K = {k} is not in [1, 2^{n}]")));
                    }
                }
                EnsembleConfig::W if n < 2 => return Err(Error::Incompatible("W states need N ≥ 2".into())),
                EnsembleConfig::Graph { .. } => {
                    self.ensemble.graph(n, 0)?;
                }
                _ => {}
            }
            if let Some(eg) = &self.estimators.eg {
                eg.check(n, d)?;
            }
        }
        for entry in &self.estimators.protocols {
            entry.check(&self.ensemble)?;
        }
        Ok(())
    }

    pub fn is_stochastic(&self) -> bool {
        self.ensemble.is_stochastic()
    }
}

/// Evaluates one `(N, sample)` row.
pub fn compute_row(config: &ExperimentConfig, n: usize, sample: usize) -> Result<ResultRow> {
    let start = Instant::now();
    let seed = row_seed(config.base_seed, n, sample);
    let graph = config.ensemble.graph(n, seed)?;
    let state = match &graph {
        Some(g) => graph_state(g)?,
        None => config.ensemble.sample(n, seed)?,
    };
    let est = &config.estimators;
    let w_loc = est.w_local.then(|| w_local(&state));
    let eg = est.eg.as_ref().map(|eg| eg.evaluate(&state, splitmix64(seed))).transpose()?;
    let mut best: Option<(f64, MenuEntry)> = None;
    for entry in est.menu() {
        let w = work_of(&entry.build(&state, graph.as_ref())?, &state)?.w_lambda;
        if best.is_none_or(|(b, _)| w > b) {
            best = Some((w, entry));
        }
    }
    let (lower, best_entry) = best.expect("menu contains the null protocol");
    Ok(ResultRow {
        ensemble: config.ensemble.label(),
        n,
        sample,
        seed,
        w_global: w_global(&state),
        w_local: w_loc,
        eg_value: eg.map(|e| e.0),
        eg_cert: eg.map(|e| e.1),
        w_locc_upper: eg.map(|e| e.2),
        w_locc_lower: lower,
        best_protocol: best_entry.name().to_string(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every `(N, sample)` pair. When `config.output` is set the report is
/// written there; CSV rows are appended as soon as all earlier rows are done.
pub fn run_scaling(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let tasks: Vec<(usize, usize)> =
        config.n_values.iter().flat_map(|&n| (0..config.samples).map(move |s| (n, s))).collect();
    let sink = match (&config.output, config.format) {
        (Some(path), ReportFormat::Csv) => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(File::create(path)?));
            w.write_record(CSV_HEADER)?;
            w.flush()?;
            Some(w)
        }
        (Some(path), ReportFormat::Json) => {
            // fail early on an unwritable path
            File::create(path)?;
            None
        }
        (None, _) => None,
    };
    let rows = std::thread::scope(|scope| -> Result<Vec<ResultRow>> {
        let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
        let writer = scope.spawn(move || ordered_writer(rx, sink));
        let computed = tasks
            .par_iter()
            .enumerate()
            .try_for_each_with(tx, |tx, (i, &(n, s))| -> Result<()> {
                let row = compute_row(config, n, s)?;
                // the writer only hangs up after an I/O failure, reported below
                let _ = tx.send((i, row));
                Ok(())
            });
        let written = writer.join().expect("report writer panicked");
        computed?;
        written
    })?;
    if let (Some(path), ReportFormat::Json) = (&config.output, config.format) {
        emit_report(&rows, path, ReportFormat::Json)?;
    }
    Ok(rows)
}

fn ordered_writer(
    rx: mpsc::Receiver<(usize, ResultRow)>,
    mut sink: Option<csv::Writer<BufWriter<File>>>,
) -> Result<Vec<ResultRow>> {
    let mut pending = BTreeMap::new();
    let mut rows = Vec::new();
    for (i, row) in rx {
        pending.insert(i, row);
        while let Some(row) = pending.remove(&rows.len()) {
            if let Some(w) = sink.as_mut() {
                w.serialize(&row)?;
                w.flush()?;
            }
            rows.push(row);
        }
    }
    if let Some(mut w) = sink {
        w.flush()?;
        w.into_inner().map_err(|e| Error::Io(e.into_error()))?.flush()?;
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` with fewer than three points.
    pub slope_stderr: Option<f64>,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope·x`. Needs two distinct x.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = (points.len() > 2).then(|| {
        let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (m - 2.0) / sxx).sqrt()
    });
    Some(SlopeFit { slope, intercept, slope_stderr, points: points.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single sample.
    pub sem: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub column: String,
    pub per_n: Vec<GroupStats>,
    /// Fit over all rows, not over the per-N means.
    pub fit: Option<SlopeFit>,
}

pub const SUMMARY_COLUMNS: [&str; 4] = ["w_global", "w_local", "w_locc_lower", "w_locc_upper"];

/// Per-N means and a slope fit of each numeric work column vs N.
pub fn summarize(rows: &[ResultRow]) -> Vec<ColumnSummary> {
    SUMMARY_COLUMNS
        .iter()
        .filter_map(|&column| {
            let points: Vec<(f64, f64)> =
                rows.iter().filter_map(|r| r.column(column).map(|v| (r.n as f64, v))).collect();
            if points.is_empty() {
                return None;
            }
            let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &(n, v) in &points {
                groups.entry(n as usize).or_default().push(v);
            }
            let per_n = groups
                .into_iter()
                .map(|(n, vs)| {
                    let c = vs.len() as f64;
                    let mean = vs.iter().sum::<f64>() / c;
                    let sem = if vs.len() > 1 {
                        (vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c - 1.0) / c).sqrt()
                    } else {
                        0.0
                    };
                    GroupStats { n, mean, sem, count: vs.len() }
                })
                .collect();
            Some(ColumnSummary { column: column.to_string(), per_n, fit: fit_slope(&points) })
        })
        .collect()
}

/// Human-readable summary lines.
pub fn write_summary<W: Write + ?Sized>(out: &mut W, summaries: &[ColumnSummary]) -> std::io::Result<()> {
    for s in summaries {
        for g in &s.per_n {
            writeln!(out, "{} N={} mean={:.6} sem={:.6} count={}", s.column, g.n, g.mean, g.sem, g.count)?;
        }
        match &s.fit {
            Some(f) => match f.slope_stderr {
                Some(se) => writeln!(out, "{} slope={:.6} stderr={:.6} points={}", s.column, f.slope, se, f.points)?,
                None => writeln!(out, "{} slope={:.6} stderr=NA points={}", s.column, f.slope, f.points)?,
            },
            None => writeln!(out, "{} slope=NA", s.column)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn config(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
        assert_ne!(row_seed(1, 4, 0), row_seed(1, 0, 4));
    }

    #[test]
    fn slope_fit_recovers_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 + 0.5 * i as f64)).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!(f.slope_stderr.unwrap() < 1e-12);
        assert!(fit_slope(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
        assert!(fit_slope(&[(1.0, 2.0), (2.0, 3.0)]).unwrap().slope_stderr.is_none());
        // noisy: stderr matches the textbook formula on a tiny hand case
        let f = fit_slope(&[(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.slope_stderr.unwrap() - (1.5f64 / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let base = r#""n_values": [2, 3], "samples": 2, "base_seed": 1"#;
        config(&format!(r#"{{"ensemble": {{"kind": "haar"}}, {base}}}"#));
        let bad = [
            r#"{"ensemble": {"kind": "haar"}, "n_values": [3, 2], "samples": 1, "base_seed": 1}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [], "samples": 1, "base_seed": 1}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [2], "samples": 0, "base_seed": 1}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [2], "samples": 1}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [6], "samples": 1, "base_seed": 1,
                "estimators": {"eg": {"method": "bruteforce"}}}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [3], "samples": 1, "base_seed": 1,
                "estimators": {"eg": {"method": "schmidt"}}}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [3], "samples": 1, "base_seed": 1,
                "estimators": {"protocols": ["independent_set"]}}"#,
            r#"{"ensemble": {"kind": "subset", "k": 9}, "n_values": [3], "samples": 1, "base_seed": 1}"#,
            r#"{"ensemble": {"kind": "graph", "graph": "square_torus"}, "n_values": [10], "samples": 1, "base_seed": 1}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [40], "samples": 1, "base_seed": 1}"#,
            r#"{"ensemble": {"kind": "haar"}, "n_values": [2], "samples": 1, "base_seed": 1, "extra": 0}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn subset_rows_hit_the_closed_form() {
        let cfg = config(
            r#"{"ensemble": {"kind": "subset", "k": "half_n"}, "n_values": [4, 5, 6], "samples": 3,
                "base_seed": 11, "estimators": {"protocols": ["subset"]}}"#,
        );
        for row in run_scaling(&cfg).unwrap() {
            let expected = row.n as f64 * LN_2 - (row.n / 2) as f64 * LN_2;
            assert!((row.w_locc_lower - expected).abs() < 1e-9, "{row:?}");
            assert_eq!(row.best_protocol, "subset");
        }
    }

    #[test]
    fn rows_obey_the_ordering_chain() {
        let cfg = config(
            r#"{"ensemble": {"kind": "haar"}, "n_values": [2, 3, 4], "samples": 4, "base_seed": 5,
                "estimators": {"eg": {}, "protocols": ["subset", "null_refined", "z_refined", "x_basis"]}}"#,
        );
        let rows = run_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        for r in &rows {
            let local = r.w_local.unwrap();
            assert!(local <= r.w_locc_lower + 1e-9 && r.w_locc_lower <= r.w_global + 1e-8, "{r:?}");
            let cert = r.eg_cert.unwrap();
            assert!(cert.is_certified(), "{r:?}");
            assert!(r.w_locc_lower <= r.w_locc_upper.unwrap() + 1e-6, "{r:?}");
        }
        let order: Vec<(usize, usize)> = rows.iter().map(|r| (r.n, r.sample)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }

    #[test]
    fn graph_rows_use_the_independent_set() {
        let cfg = config(
            r#"{"ensemble": {"kind": "graph", "graph": "cycle"}, "n_values": [6, 8], "samples": 1,
                "base_seed": 0, "estimators": {"w_local": true, "protocols": ["subset", "independent_set"]}}"#,
        );
        for r in run_scaling(&cfg).unwrap() {
            assert!(r.w_locc_lower >= r.n as f64 * LN_2 / 3.0 - 1e-9);
            assert_eq!(r.best_protocol, "independent_set");
            assert!(r.w_local.unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn summary_reports_fit_per_column() {
        let cfg = config(
            r#"{"ensemble": {"kind": "ghz"}, "n_values": [2, 3, 4], "samples": 2, "base_seed": 0}"#,
        );
        let summary = summarize(&run_scaling(&cfg).unwrap());
        let global = summary.iter().find(|s| s.column == "w_global").unwrap();
        assert!((global.fit.unwrap().slope - LN_2).abs() < 1e-12);
        assert_eq!(global.per_n.len(), 3);
        assert!(summary.iter().all(|s| s.column != "w_locc_upper"));
        let mut text = Vec::new();
        write_summary(&mut text, &summary).unwrap();
        assert!(String::from_utf8(text).unwrap().contains("w_global slope=0.693147"));
    }
}
