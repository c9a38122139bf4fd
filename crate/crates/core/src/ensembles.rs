//! Samplers and constructors for the state families studied by the lab.
//!
//! Every sampler takes an explicit `u64` seed and is otherwise pure. Batches
//! drawn in parallel use `derive_seed(base, i) = base + i` for sample `i`.

use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::qstate::{hilbert_dim, inner, CMatrix, PureState, C64};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the `index`-th member of a batch.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}

pub(crate) fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-random state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn sample_haar(n: usize, d: usize, seed: u64) -> Result<PureState> {
    let dim = hilbert_dim(n, d)?;
    let mut rng = rng_from_seed(seed);
    PureState::new(gaussian_vector(&mut rng, dim), n, d)
}

/// Haar-random `dim × dim` unitary: QR of a complex Ginibre matrix with the
/// phases of R's diagonal moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_vec(dim, dim, gaussian_vector(rng, dim * dim));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitSpec {
    pub num_sites: usize,
    pub depth: usize,
    pub rng_seed: u64,
}

impl CircuitSpec {
    pub fn new(num_sites: usize, depth: usize, rng_seed: u64) -> Result<Self> {
        if num_sites < 2 {
            return Err(Error::InvalidArgument(format!(
                "brickwork circuit needs at least 2 qubits, got {num_sites}"
            )));
        }
        Ok(Self { num_sites, depth, rng_seed })
    }
}

/// Two-qubit gate; the 4×4 matrix acts on the index `bit(first) + 2·bit(second)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitGate {
    pub first: usize,
    pub second: usize,
    pub matrix: CMatrix,
}

/// Open-boundary brickwork: even layers couple (0,1),(2,3),…; odd layers
/// couple (1,2),(3,4),….
#[derive(Clone, Debug)]
pub struct BrickworkCircuit {
    pub num_sites: usize,
    pub layers: Vec<Vec<TwoQubitGate>>,
}

impl BrickworkCircuit {
    /// Gates are drawn layer by layer, left to right, from one seeded stream.
    pub fn sample(spec: &CircuitSpec) -> Result<Self> {
        let spec = CircuitSpec::new(spec.num_sites, spec.depth, spec.rng_seed)?;
        let mut rng = rng_from_seed(spec.rng_seed);
        let layers = (0..spec.depth)
            .map(|l| {
                (l % 2..spec.num_sites.saturating_sub(1))
                    .step_by(2)
                    .map(|a| TwoQubitGate { first: a, second: a + 1, matrix: haar_unitary(4, &mut rng) })
                    .collect()
            })
            .collect();
        Ok(Self { num_sites: spec.num_sites, layers })
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.local_dim() != 2 || state.num_sites() != self.num_sites {
            return Err(Error::ShapeMismatch(state.num_sites(), state.local_dim(), self.num_sites, 2));
        }
        let mut amps = state.amplitudes().to_vec();
        for gate in self.layers.iter().flatten() {
            apply_two_qubit(&mut amps, gate);
        }
        PureState::new(amps, self.num_sites, 2)
    }
}

pub(crate) fn apply_two_qubit(amps: &mut [C64], gate: &TwoQubitGate) {
    let (sa, sb) = (1usize << gate.first, 1usize << gate.second);
    let u = &gate.matrix;
    for base in 0..amps.len() {
        if base & sa != 0 || base & sb != 0 {
            continue;
        }
        let idx = [base, base | sa, base | sb, base | sa | sb];
        let v = idx.map(|i| amps[i]);
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = (0..4).map(|c| u[(r, c)] * v[c]).sum();
        }
    }
}

/// Brickwork circuit applied to `|0…0⟩`.
pub fn sample_circuit(spec: &CircuitSpec) -> Result<PureState> {
    let circuit = BrickworkCircuit::sample(spec)?;
    circuit.apply(&PureState::basis(spec.num_sites, 2, 0)?)
}

/// Graph state: amplitude `(−1)^{Σ_{i<j} A_ij z_i z_j} / √(2^N)` on every
/// bitstring `z`.
pub fn graph_state(g: &Graph) -> Result<PureState> {
    let n = g.num_vertices();
    let dim = hilbert_dim(n, 2)?;
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let amp = 1.0 / (dim as f64).sqrt();
    let amps = (0..dim)
        .map(|z| {
            let parity = edges.iter().filter(|&&(i, j)| (z >> i) & (z >> j) & 1 == 1).count();
            C64::new(if parity % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect();
    PureState::new(amps, n, 2)
}

/// Support of a subset state. Bitstrings are stored as little-endian basis
/// indices; in text form character `k` is the value of site `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSpec {
    num_sites: usize,
    support: Vec<u64>,
}

pub const SUBSET_MAX_SITES: usize = 63;

impl SubsetSpec {
    pub fn new(num_sites: usize, support: impl IntoIterator<Item = u64>) -> Result<Self> {
        if num_sites == 0 || num_sites > SUBSET_MAX_SITES {
            return Err(Error::InvalidSubset(format!("num_sites must be in 1..={SUBSET_MAX_SITES}")));
        }
        let mut support: Vec<u64> = support.into_iter().collect();
        support.sort_unstable();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSubset("support strings must be distinct".into()));
        }
        if support.is_empty() {
            return Err(Error::InvalidSubset("support is empty".into()));
        }
        if let Some(&x) = support.last().filter(|&&x| x >> num_sites != 0) {
            return Err(Error::InvalidSubset(format!("index {x} exceeds {num_sites} bits")));
        }
        Ok(Self { num_sites, support })
    }

    pub fn from_bitstrings<S: AsRef<str>>(strings: &[S]) -> Result<Self> {
        let n = strings.first().map(|s| s.as_ref().len()).unwrap_or(0);
        let support = strings
            .iter()
            .enumerate()
            .map(|(line, s)| parse_bitstring(s.as_ref(), n, line + 1))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, support)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn bitstring(&self, index: u64) -> String {
        (0..self.num_sites).map(|k| if index >> k & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut strings = Vec::new();
        let mut n = None;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            let width = *n.get_or_insert(s.len());
            strings.push(parse_bitstring(s, width, idx + 1)?);
        }
        Self::new(n.unwrap_or(0), strings)
    }

    pub fn to_text(&self) -> String {
        self.support.iter().map(|&x| self.bitstring(x) + "\n").collect()
    }
}

fn parse_bitstring(s: &str, width: usize, line: usize) -> Result<u64> {
    if s.len() != width {
        return Err(Error::Parse { line, msg: format!("expected {width} bits, got {:?}", s) });
    }
    s.chars().enumerate().try_fold(0u64, |acc, (k, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << k),
        _ => Err(Error::Parse { line, msg: format!("invalid bit {ch:?}") }),
    })
}

/// Uniform superposition over the support strings.
pub fn subset_state(spec: &SubsetSpec) -> Result<PureState> {
    let dim = hilbert_dim(spec.num_sites, 2)?;
    let amp = 1.0 / (spec.k() as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for &x in &spec.support {
        amps[x as usize] = C64::new(amp, 0.0);
    }
    PureState::new(amps, spec.num_sites, 2)
}

/// Uniformly random `k`-subset of `{0,1}^n`.
pub fn sample_subset(n: usize, k: usize, seed: u64) -> Result<SubsetSpec> {
    if n == 0 || n > SUBSET_MAX_SITES {
        return Err(Error::InvalidSubset(format!("num_sites must be in 1..={SUBSET_MAX_SITES}")));
    }
    let total = 1u64 << n;
    if k == 0 || k as u64 > total {
        return Err(Error::InvalidSubset(format!("k = {k} outside 1..={total}")));
    }
    let total = usize::try_from(total).map_err(|_| Error::TooLarge(format!("2^{n} strings")))?;
    let mut rng = rng_from_seed(seed);
    let picked = rand::seq::index::sample(&mut rng, total, k);
    SubsetSpec::new(n, picked.into_iter().map(|x| x as u64))
}

/// Mean of `|⟨ψ_a|ψ_b⟩|^{2t}` over distinct pairs.
pub fn frame_potential(samples: &[PureState], t: u32) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("frame potential needs at least 2 samples".into()));
    }
    for s in &samples[1..] {
        samples[0].same_shape(s)?;
    }
    let mut sum = 0.0;
    let mut pairs = 0u64;
    for (a, sa) in samples.iter().enumerate() {
        for sb in &samples[a + 1..] {
            sum += inner(sa.amplitudes(), sb.amplitudes()).norm_sqr().powi(t as i32);
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Haar value `t!(D−1)!/(t+D−1)!` of the frame potential.
pub fn haar_frame_potential(t: u32, dim: usize) -> f64 {
    (1..=t).map(|i| i as f64 / (dim as f64 - 1.0 + i as f64)).product()
}
