//! Adaptive multi-round LOCC protocols and the work they extract.
//!
//! A [`Protocol`] is a rule mapping `(round, outcome history)` to one
//! [`SiteMeasurement`] per site. [`execute`] expands every reachable branch
//! into a [`BranchTree`], and [`protocol_work`] evaluates
//!
//! ```text
//! W_Λ = Σ_n { ln d − Σ_Y P(Y) S(ρ_n^Y) } − H(Y)
//! ```
//!
//! over its leaves.
//!
//! Outcome labels are strings. The null operation always yields the label
//! [`NULL_OUTCOME`].

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::haar_unitary;
use crate::error::{Error, Result};
use crate::graphs::{greedy_independent_set, Graph};
use crate::qstate::{
    apply_local, norm_sqr, single_site_density, von_neumann_entropy, CMatrix, PureState, C64,
};

pub const NULL_OUTCOME: &str = "phi";

/// Branches whose probability falls below this are treated as numerically
/// zero; their mass is still reported in [`BranchTree::dropped_mass`].
pub const ZERO_PROBABILITY: f64 = 1e-24;

/// Largest `prune_below` accepted by [`execute`].
pub const MAX_PRUNE: f64 = 1e-12;

/// Dropped mass above this makes a tree unusable for work evaluation.
pub const COMPLETE_TREE_TOL: f64 = 1e-9;

const COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator {
    label: String,
    matrix: CMatrix,
}

impl KrausOperator {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Generalized measurement on one site, or the null operation.
#[derive(Clone, Debug, PartialEq)]
pub enum SiteMeasurement {
    Null,
    Kraus(Vec<KrausOperator>),
}

impl SiteMeasurement {
    /// Validates `Σ K†K = I` (within 1e-9) and label distinctness.
    pub fn new(ops: Vec<(String, CMatrix)>) -> Result<Self> {
        let d = ops
            .first()
            .map(|(_, m)| m.nrows())
            .ok_or_else(|| Error::IncompleteKraus("no Kraus operators".into()))?;
        let mut sum = CMatrix::zeros(d, d);
        for (label, m) in &ops {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::IncompleteKraus(format!(
                    "operator {label:?} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if label == NULL_OUTCOME {
                return Err(Error::IncompleteKraus(format!("label {NULL_OUTCOME:?} is reserved")));
            }
            sum += m.adjoint() * m;
        }
        let mut labels: Vec<&str> = ops.iter().map(|(l, _)| l.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::IncompleteKraus(format!("duplicate label {:?}", w[0])));
        }
        let dev = (sum - CMatrix::identity(d, d)).camax();
        if dev > COMPLETENESS_TOL {
            return Err(Error::IncompleteKraus(format!("Σ K†K deviates from I by {dev:e}")));
        }
        Ok(Self::Kraus(
            ops.into_iter().map(|(label, matrix)| KrausOperator { label, matrix }).collect(),
        ))
    }

    pub fn null() -> Self {
        Self::Null
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn projective(basis: &[Vec<C64>], labels: &[String]) -> Result<Self> {
        if basis.len() != labels.len() {
            return Err(Error::IncompleteKraus("one label per basis vector required".into()));
        }
        let ops = basis
            .iter()
            .zip(labels)
            .map(|(v, l)| {
                let col = nalgebra::DVector::from_column_slice(v);
                (l.clone(), &col * col.adjoint())
            })
            .collect();
        Self::new(ops)
    }

    /// Computational basis, labels `"0"…"d−1"`.
    pub fn computational(d: usize) -> Self {
        let basis: Vec<Vec<C64>> = (0..d)
            .map(|k| (0..d).map(|j| C64::new(if j == k { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        let labels: Vec<String> = (0..d).map(|k| k.to_string()).collect();
        Self::projective(&basis, &labels).expect("computational basis is complete")
    }

    /// Qubit `{|+⟩, |−⟩}` basis, labels `"+"` and `"-"`.
    pub fn hadamard_basis() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let basis = vec![vec![C64::new(h, 0.0), C64::new(h, 0.0)], vec![C64::new(h, 0.0), C64::new(-h, 0.0)]];
        Self::projective(&basis, &["+".to_string(), "-".to_string()]).expect("X basis is complete")
    }

    /// Random `outcomes`-outcome POVM: the `d × d` blocks of a Haar isometry
    /// `C^d → C^{d·outcomes}`. Labels `"m0"…`.
    pub fn random<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::IncompleteKraus("need at least one outcome".into()));
        }
        let u = haar_unitary(d * outcomes, rng);
        let ops = (0..outcomes)
            .map(|k| (format!("m{k}"), u.view((k * d, 0), (d, d)).into_owned()))
            .collect();
        Self::new(ops)
    }

    pub fn local_dim(&self) -> Option<usize> {
        match self {
            Self::Null => None,
            Self::Kraus(ops) => Some(ops[0].matrix.nrows()),
        }
    }

    pub fn kraus_operators(&self) -> &[KrausOperator] {
        match self {
            Self::Null => &[],
            Self::Kraus(ops) => ops,
        }
    }

    pub fn is_rank_one(&self) -> bool {
        match self {
            Self::Null => false,
            Self::Kraus(ops) => ops.iter().all(|k| k.matrix.rank(1e-10) <= 1),
        }
    }
}

/// Outcome labels of one round, one per site.
pub type RoundOutcome = Vec<String>;
/// `Y^l`: outcomes of rounds `0..l`.
pub type History = Vec<RoundOutcome>;

/// Maps `(round, history)` to per-site measurements; `None` marks a history
/// the strategy does not cover.
pub trait Strategy: Send + Sync {
    fn measurements(&self, round: usize, history: &[RoundOutcome]) -> Option<Vec<SiteMeasurement>>;
}

impl<F> Strategy for F
where
    F: Fn(usize, &[RoundOutcome]) -> Option<Vec<SiteMeasurement>> + Send + Sync,
{
    fn measurements(&self, round: usize, history: &[RoundOutcome]) -> Option<Vec<SiteMeasurement>> {
        self(round, history)
    }
}

struct FixedRounds(Vec<Vec<SiteMeasurement>>);

impl Strategy for FixedRounds {
    fn measurements(&self, round: usize, _: &[RoundOutcome]) -> Option<Vec<SiteMeasurement>> {
        self.0.get(round).cloned()
    }
}

#[derive(Clone)]
pub struct Protocol {
    name: String,
    num_rounds: usize,
    num_sites: usize,
    local_dim: usize,
    strategy: Arc<dyn Strategy>,
}

impl fmt::Debug for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Protocol")
            .field("name", &self.name)
            .field("num_rounds", &self.num_rounds)
            .field("num_sites", &self.num_sites)
            .field("local_dim", &self.local_dim)
            .finish_non_exhaustive()
    }
}

impl Protocol {
    pub fn adaptive(
        name: impl Into<String>,
        num_rounds: usize,
        num_sites: usize,
        local_dim: usize,
        strategy: impl Strategy + 'static,
    ) -> Result<Self> {
        if num_rounds == 0 {
            return Err(Error::InvalidArgument("protocol needs at least one round".into()));
        }
        if num_sites == 0 || local_dim < 2 {
            return Err(Error::InvalidDimensions(format!("{num_sites} sites of dimension {local_dim}")));
        }
        Ok(Self { name: name.into(), num_rounds, num_sites, local_dim, strategy: Arc::new(strategy) })
    }

    /// Non-adaptive protocol with the same measurements on every branch.
    pub fn fixed(name: impl Into<String>, local_dim: usize, rounds: Vec<Vec<SiteMeasurement>>) -> Result<Self> {
        let num_sites = rounds.first().map(Vec::len).unwrap_or(0);
        for (l, round) in rounds.iter().enumerate() {
            check_round(round, l, num_sites, local_dim)?;
        }
        Self::adaptive(name, rounds.len(), num_sites, local_dim, FixedRounds(rounds))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_rounds(&self) -> usize {
        self.num_rounds
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn round_measurements(&self, round: usize, history: &[RoundOutcome]) -> Result<Vec<SiteMeasurement>> {
        let ms = self.strategy.measurements(round, history).ok_or_else(|| Error::UndefinedStrategy {
            round,
            history: format_history(history),
        })?;
        check_round(&ms, round, self.num_sites, self.local_dim)?;
        Ok(ms)
    }
}

fn check_round(round: &[SiteMeasurement], l: usize, num_sites: usize, local_dim: usize) -> Result<()> {
    if round.len() != num_sites {
        return Err(Error::InvalidArgument(format!(
            "round {l} lists {} measurements for {num_sites} sites",
            round.len()
        )));
    }
    for (site, m) in round.iter().enumerate() {
        if let Some(d) = m.local_dim().filter(|&d| d != local_dim) {
            return Err(Error::IncompleteKraus(format!(
                "round {l}, site {site}: operators are {d}x{d}, sites have dimension {local_dim}"
            )));
        }
    }
    Ok(())
}

fn format_history(history: &[RoundOutcome]) -> String {
    let rounds: Vec<String> = history.iter().map(|r| r.join(",")).collect();
    format!("[{}]", rounds.join(" | "))
}

/// Every site idle for one round.
pub fn null_protocol(num_sites: usize, local_dim: usize) -> Result<Protocol> {
    Protocol::fixed("null", local_dim, vec![vec![SiteMeasurement::Null; num_sites]])
}

/// One round of computational-basis measurements on every qubit.
pub fn subset_protocol(n: usize) -> Result<Protocol> {
    Protocol::fixed("subset", 2, vec![vec![SiteMeasurement::computational(2); n]])
}

/// One round: `{|+⟩,|−⟩}` on a greedy independent set `S`, computational
/// basis on `V∖S`.
pub fn independent_set_protocol(g: &Graph) -> Result<Protocol> {
    let s = greedy_independent_set(g);
    let round = (0..g.num_vertices())
        .map(|v| {
            if s.contains(v) {
                SiteMeasurement::hadamard_basis()
            } else {
                SiteMeasurement::computational(2)
            }
        })
        .collect();
    Protocol::fixed("independent_set", 2, vec![round])
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchNode {
    pub history: History,
    /// `P(Y^l)`.
    pub probability: f64,
    /// Normalized conditional state after the last round of `history`.
    pub state: PureState,
}

#[derive(Clone, Debug)]
pub struct BranchTree {
    /// `levels[l]` holds the nodes after `l` rounds; `levels[0]` is the root.
    pub levels: Vec<Vec<BranchNode>>,
    pub dropped_mass: f64,
}

impl BranchTree {
    pub fn root(&self) -> &BranchNode {
        &self.levels[0][0]
    }

    pub fn leaves(&self) -> &[BranchNode] {
        self.levels.last().expect("tree has a root level")
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn total_leaf_probability(&self) -> f64 {
        self.leaves().iter().map(|n| n.probability).sum()
    }

    /// Checks unit-norm conditional states, that children sum to their
    /// parent, and that leaves sum to one, all within `tol` (after accounting
    /// for dropped mass).
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        for node in self.levels.iter().flatten() {
            if (node.state.norm_sqr() - 1.0).abs() > tol {
                return fail(format!("state at {} not normalized", format_history(&node.history)));
            }
        }
        for l in 1..self.levels.len() {
            let mut sums: HashMap<&[RoundOutcome], f64> = HashMap::new();
            for child in &self.levels[l] {
                *sums.entry(&child.history[..l - 1]).or_default() += child.probability;
            }
            for parent in &self.levels[l - 1] {
                let s = sums.get(parent.history.as_slice()).copied().unwrap_or(0.0);
                if (s - parent.probability).abs() > tol + self.dropped_mass {
                    return fail(format!(
                        "children of {} sum to {s}, parent has {}",
                        format_history(&parent.history),
                        parent.probability
                    ));
                }
            }
        }
        let total = self.total_leaf_probability();
        if (total + self.dropped_mass - 1.0).abs() > tol {
            return fail(format!("leaf probabilities sum to {total}"));
        }
        Ok(())
    }
}

/// Expands every reachable branch. Branches below `prune_below` (or below
/// [`ZERO_PROBABILITY`]) are dropped and their mass recorded.
pub fn execute(protocol: &Protocol, state: &PureState, prune_below: f64) -> Result<BranchTree> {
    let threshold = check_execution(protocol, state, prune_below)?;
    let root = BranchNode { history: Vec::new(), probability: 1.0, state: state.clone() };
    let mut levels = vec![vec![root]];
    let mut dropped_mass = 0.0;
    for round in 0..protocol.num_rounds {
        let expanded: Vec<(Vec<BranchNode>, f64)> = levels[round]
            .par_iter()
            .map(|node| {
                let mut children = Vec::new();
                let dropped = expand_node(protocol, round, node, threshold, &mut |c| children.push(c))?;
                Ok((children, dropped))
            })
            .collect::<Result<_>>()?;
        let mut next = Vec::new();
        for (children, dropped) in expanded {
            next.extend(children);
            dropped_mass += dropped;
        }
        levels.push(next);
    }
    Ok(BranchTree { levels, dropped_mass })
}

fn check_execution(protocol: &Protocol, state: &PureState, prune_below: f64) -> Result<f64> {
    if state.num_sites() != protocol.num_sites || state.local_dim() != protocol.local_dim {
        return Err(Error::ShapeMismatch(
            protocol.num_sites,
            protocol.local_dim,
            state.num_sites(),
            state.local_dim(),
        ));
    }
    if !(0.0..=MAX_PRUNE).contains(&prune_below) {
        return Err(Error::InvalidArgument(format!("prune_below must lie in [0, {MAX_PRUNE:e}]")));
    }
    Ok(prune_below.max(ZERO_PROBABILITY))
}

/// Calls `visit` on every leaf in depth-first order without keeping the
/// tree; returns the dropped mass. Memory stays at one state per round.
pub fn visit_leaves(
    protocol: &Protocol,
    state: &PureState,
    prune_below: f64,
    visit: &mut dyn FnMut(&BranchNode) -> Result<()>,
) -> Result<f64> {
    let threshold = check_execution(protocol, state, prune_below)?;
    let root = BranchNode { history: Vec::new(), probability: 1.0, state: state.clone() };
    let mut dropped = 0.0;
    stream(protocol, 0, &root, threshold, visit, &mut dropped)?;
    Ok(dropped)
}

fn stream(
    protocol: &Protocol,
    round: usize,
    node: &BranchNode,
    threshold: f64,
    visit: &mut dyn FnMut(&BranchNode) -> Result<()>,
    dropped: &mut f64,
) -> Result<()> {
    if round == protocol.num_rounds {
        return visit(node);
    }
    let mut status = Ok(());
    let mut below = 0.0;
    *dropped += expand_node(protocol, round, node, threshold, &mut |child| {
        if status.is_ok() {
            status = stream(protocol, round + 1, &child, threshold, visit, &mut below);
        }
    })?;
    *dropped += below;
    status
}

fn expand_node(
    protocol: &Protocol,
    round: usize,
    node: &BranchNode,
    threshold: f64,
    sink: &mut dyn FnMut(BranchNode),
) -> Result<f64> {
    let measurements = protocol.round_measurements(round, &node.history)?;
    let mut dropped = 0.0;
    let mut labels = Vec::with_capacity(protocol.num_sites);
    let ctx = Expansion { protocol, node, measurements: &measurements, threshold };
    ctx.descend(0, node.state.amplitudes().to_vec(), 1.0, &mut labels, sink, &mut dropped);
    Ok(dropped)
}

struct Expansion<'a> {
    protocol: &'a Protocol,
    node: &'a BranchNode,
    measurements: &'a [SiteMeasurement],
    threshold: f64,
}

impl Expansion<'_> {
    /// Depth-first over sites; `weight` is `‖K…ψ‖²` relative to the node.
    fn descend(
        &self,
        site: usize,
        amps: Vec<C64>,
        weight: f64,
        labels: &mut Vec<String>,
        sink: &mut dyn FnMut(BranchNode),
        dropped: &mut f64,
    ) {
        if site == self.protocol.num_sites {
            let scale = 1.0 / weight.sqrt();
            let mut history = self.node.history.clone();
            history.push(labels.clone());
            let state = PureState::from_normalized(
                amps.into_iter().map(|a| a * scale).collect(),
                self.protocol.num_sites,
                self.protocol.local_dim,
            );
            sink(BranchNode { history, probability: self.node.probability * weight, state });
            return;
        }
        match &self.measurements[site] {
            SiteMeasurement::Null => {
                labels.push(NULL_OUTCOME.to_string());
                self.descend(site + 1, amps, weight, labels, sink, dropped);
                labels.pop();
            }
            SiteMeasurement::Kraus(ops) => {
                for k in ops {
                    let next = apply_local(&amps, self.protocol.local_dim, site, &k.matrix);
                    let w = norm_sqr(&next);
                    let p = self.node.probability * w;
                    if p < self.threshold {
                        *dropped += p;
                        continue;
                    }
                    labels.push(k.label.clone());
                    self.descend(site + 1, next, w, labels, sink, dropped);
                    labels.pop();
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolWork {
    pub w_lambda: f64,
    /// `H(Y^L)`.
    pub outcome_entropy: f64,
    /// `Σ_n { ln d − Σ_Y P(Y) S(ρ_n^Y) }`.
    pub local_term: f64,
    pub leaf_count: usize,
}

#[derive(Default)]
struct WorkSum {
    conditional: f64,
    outcome_entropy: f64,
    leaves: usize,
}

impl WorkSum {
    fn add(&mut self, leaf: &BranchNode) {
        let n = leaf.state.num_sites();
        let s: f64 = (0..n).map(|k| von_neumann_entropy(&single_site_density(&leaf.state, k))).sum();
        self.conditional += leaf.probability * s;
        if leaf.probability > 0.0 {
            self.outcome_entropy -= leaf.probability * leaf.probability.ln();
        }
        self.leaves += 1;
    }

    fn finish(self, num_sites: usize, local_dim: usize, dropped: f64) -> Result<ProtocolWork> {
        if dropped >= COMPLETE_TREE_TOL {
            return Err(Error::IncompleteTree(dropped));
        }
        let local_term = num_sites as f64 * (local_dim as f64).ln() - self.conditional;
        Ok(ProtocolWork {
            w_lambda: local_term - self.outcome_entropy,
            outcome_entropy: self.outcome_entropy,
            local_term,
            leaf_count: self.leaves,
        })
    }
}

pub fn protocol_work(tree: &BranchTree) -> Result<ProtocolWork> {
    if tree.dropped_mass >= COMPLETE_TREE_TOL {
        return Err(Error::IncompleteTree(tree.dropped_mass));
    }
    let mut sum = WorkSum::default();
    for leaf in tree.leaves() {
        sum.add(leaf);
    }
    let root = &tree.root().state;
    sum.finish(root.num_sites(), root.local_dim(), tree.dropped_mass)
}

/// Exact `W_Λ` of `protocol` on `state`, streaming over leaves. Agrees with
/// `protocol_work(&execute(..))` to the last bit.
pub fn work_of(protocol: &Protocol, state: &PureState) -> Result<ProtocolWork> {
    let mut sum = WorkSum::default();
    let dropped = visit_leaves(protocol, state, 0.0, &mut |leaf| {
        sum.add(leaf);
        Ok(())
    })?;
    sum.finish(protocol.num_sites, protocol.local_dim, dropped)
}

struct RefinedStrategy {
    base: Arc<dyn Strategy>,
    base_rounds: usize,
    final_round: HashMap<History, Vec<SiteMeasurement>>,
}

impl Strategy for RefinedStrategy {
    fn measurements(&self, round: usize, history: &[RoundOutcome]) -> Option<Vec<SiteMeasurement>> {
        if round < self.base_rounds {
            self.base.measurements(round, history)
        } else if round == self.base_rounds {
            self.final_round.get(history).cloned()
        } else {
            None
        }
    }
}

/// Appends a round measuring each site in the eigenbasis of its conditional
/// reduced state on every leaf of `protocol` run on `state`. Eigenvectors
/// are ordered by descending eigenvalue and labelled `"e0"`, `"e1"`, ….
pub fn refine_rank_one(protocol: &Protocol, state: &PureState) -> Result<Protocol> {
    let labels: Vec<String> = (0..protocol.local_dim).map(|k| format!("e{k}")).collect();
    let mut final_round = HashMap::new();
    visit_leaves(protocol, state, 0.0, &mut |leaf| {
        let ms = (0..protocol.num_sites)
            .map(|n| {
                let (_, vecs) = single_site_density(&leaf.state, n).eigen();
                SiteMeasurement::projective(&vecs, &labels)
            })
            .collect::<Result<Vec<_>>>()?;
        final_round.insert(leaf.history.clone(), ms);
        Ok(())
    })?;
    let strategy = RefinedStrategy { base: protocol.strategy.clone(), base_rounds: protocol.num_rounds, final_round };
    Protocol::adaptive(
        format!("{}+rank1", protocol.name),
        protocol.num_rounds + 1,
        protocol.num_sites,
        protocol.local_dim,
        strategy,
    )
}

/// Largest `W_Λ` over the menu and the index achieving it (lowest index on
/// ties).
pub fn best_lower_bound(state: &PureState, protocols: &[Protocol]) -> Result<(f64, usize)> {
    if protocols.is_empty() {
        return Err(Error::EmptyMenu);
    }
    let mut best: Option<(f64, usize)> = None;
    for (k, p) in protocols.iter().enumerate() {
        let w = work_of(p, state)?.w_lambda;
        if best.is_none_or(|(b, _)| w > b) {
            best = Some((w, k));
        }
    }
    Ok(best.expect("menu is nonempty"))
}

// ---- protocol description files ----

/// JSON protocol description.
///
/// ```json
/// {"name": "demo", "num_sites": 2,
///  "rounds": [["Z", "X"], ["null", {"kraus": [{"label": "a", "matrix": [[[1,0],[0,0]],[[0,0],[0,0]]]},
///                                             {"label": "b", "matrix": [[[0,0],[0,0]],[[0,0],[1,0]]]}]}]]}
/// ```
///
/// Matrices are rows of `[re, im]` pairs. Instead of `rounds`, a file may
/// name a built-in: `{"builtin": "subset" | "null" | "independent_set",
/// "num_sites": N, "edges": [[i, j], …]}` (`edges` only for
/// `independent_set`). `"refine_rank_one": true` asks the caller to append
/// the rank-one refinement for the state the protocol is run on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    #[serde(default)]
    pub name: Option<String>,
    pub num_sites: usize,
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    #[serde(default)]
    pub builtin: Option<Builtin>,
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
    #[serde(default)]
    pub rounds: Vec<Vec<SiteSpec>>,
    #[serde(default)]
    pub refine_rank_one: bool,
}

fn default_local_dim() -> usize {
    2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Null,
    Subset,
    IndependentSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteSpec {
    Named(String),
    Kraus { kraus: Vec<KrausSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausSpec {
    pub label: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl ProtocolFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Protocol> {
        let protocol = match self.builtin {
            Some(b) => {
                if !self.rounds.is_empty() {
                    return Err(Error::InvalidArgument("a builtin protocol cannot also list rounds".into()));
                }
                match b {
                    Builtin::Null => null_protocol(self.num_sites, self.local_dim)?,
                    Builtin::Subset => {
                        self.require_qubits()?;
                        subset_protocol(self.num_sites)?
                    }
                    Builtin::IndependentSet => {
                        self.require_qubits()?;
                        independent_set_protocol(&Graph::new(self.num_sites, self.edges.iter().copied())?)?
                    }
                }
            }
            None => {
                if self.rounds.is_empty() {
                    return Err(Error::InvalidArgument("protocol file lists no rounds".into()));
                }
                let rounds = self
                    .rounds
                    .iter()
                    .map(|r| r.iter().map(|s| self.site_measurement(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                if rounds.iter().any(|r| r.len() != self.num_sites) {
                    return Err(Error::InvalidArgument(format!(
                        "every round must list {} sites",
                        self.num_sites
                    )));
                }
                Protocol::fixed("file", self.local_dim, rounds)?
            }
        };
        Ok(match &self.name {
            Some(name) => protocol.with_name(name.clone()),
            None => protocol,
        })
    }

    fn require_qubits(&self) -> Result<()> {
        if self.local_dim != 2 {
            return Err(Error::InvalidArgument("this builtin is defined for qubits".into()));
        }
        Ok(())
    }

    fn site_measurement(&self, spec: &SiteSpec) -> Result<SiteMeasurement> {
        match spec {
            SiteSpec::Named(s) => match s.as_str() {
                "Z" | "z" => Ok(SiteMeasurement::computational(self.local_dim)),
                "X" | "x" if self.local_dim == 2 => Ok(SiteMeasurement::hadamard_basis()),
                "null" => Ok(SiteMeasurement::Null),
                other => Err(Error::InvalidArgument(format!("unknown site measurement {other:?}"))),
            },
            SiteSpec::Kraus { kraus } => {
                let ops = kraus
                    .iter()
                    .map(|k| {
                        let d = k.matrix.len();
                        if k.matrix.iter().any(|row| row.len() != d) {
                            return Err(Error::IncompleteKraus(format!("operator {:?} is not square", k.label)));
                        }
                        let m = CMatrix::from_fn(d, d, |i, j| C64::new(k.matrix[i][j][0], k.matrix[i][j][1]));
                        Ok((k.label.clone(), m))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SiteMeasurement::new(ops)
            }
        }
    }
}
