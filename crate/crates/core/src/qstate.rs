//! Dense statevectors of N qudits, reduced density operators and entropies.
//!
//! Amplitudes are indexed little-endian in base `d`: the digit of site `k` in
//! basis index `i` is `(i / d^k) % d`. All entropies are in nats.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Eigenvalues at or below this are treated as exact zeros in entropies.
pub const EIGEN_CLAMP: f64 = 1e-12;

const DENSITY_TOL: f64 = 1e-10;

/// `d^n`, or an error when it does not fit in `usize`.
pub fn hilbert_dim(num_sites: usize, local_dim: usize) -> Result<usize> {
    u32::try_from(num_sites)
        .ok()
        .and_then(|n| local_dim.checked_pow(n))
        .ok_or_else(|| {
            Error::TooLarge(format!("{local_dim}^{num_sites} does not fit in memory indices"))
        })
}

/// A normalized pure state of `num_sites` qudits of dimension `local_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_sites: usize,
    local_dim: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates shape and rescales the vector to unit norm.
    pub fn new(amplitudes: Vec<C64>, num_sites: usize, local_dim: usize) -> Result<Self> {
        if num_sites == 0 {
            return Err(Error::InvalidDimensions("num_sites must be positive".into()));
        }
        if local_dim < 2 {
            return Err(Error::InvalidDimensions(format!(
                "local dimension must be at least 2, got {local_dim}"
            )));
        }
        let dim = hilbert_dim(num_sites, local_dim)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let mut amplitudes = amplitudes;
        if (norm - 1.0).abs() > f64::EPSILON {
            let inv = 1.0 / norm;
            amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
        Ok(Self { num_sites, local_dim, amplitudes })
    }

    /// Wraps a vector that is already unit norm up to rounding.
    pub(crate) fn from_normalized(amplitudes: Vec<C64>, num_sites: usize, local_dim: usize) -> Self {
        debug_assert!((norm_sqr(&amplitudes) - 1.0).abs() < 1e-8);
        Self { num_sites, local_dim, amplitudes }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_sites: usize, local_dim: usize, index: usize) -> Result<Self> {
        let dim = hilbert_dim(num_sites, local_dim)?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps, num_sites, local_dim)
    }

    /// Tensor product of single-site vectors, site 0 first.
    pub fn product(factors: &[Vec<C64>]) -> Result<Self> {
        let local_dim = factors.first().map(Vec::len).ok_or(Error::EmptySubset)?;
        if factors.iter().any(|f| f.len() != local_dim) {
            return Err(Error::InvalidDimensions("product factors differ in dimension".into()));
        }
        let dim = hilbert_dim(factors.len(), local_dim)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        amps.reserve(dim);
        // site k is digit k, so later factors multiply higher strides
        for f in factors {
            let mut next = Vec::with_capacity(amps.len() * local_dim);
            for c in f {
                next.extend(amps.iter().map(|a| a * c));
            }
            amps = next;
        }
        Self::new(amps, factors.len(), local_dim)
    }

    /// `(|0…0⟩ + |1…1⟩ + … + |d−1…d−1⟩)/√d`.
    pub fn ghz(num_sites: usize, local_dim: usize) -> Result<Self> {
        let dim = hilbert_dim(num_sites, local_dim)?;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        let step = (dim - 1) / (local_dim - 1);
        for k in 0..local_dim {
            amps[k * step] = C64::new(1.0, 0.0);
        }
        Self::new(amps, num_sites, local_dim)
    }

    /// Qubit W state, uniform over the single-excitation strings.
    pub fn w_state(num_sites: usize) -> Result<Self> {
        let dim = hilbert_dim(num_sites, 2)?;
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for k in 0..num_sites {
            amps[1 << k] = C64::new(1.0, 0.0);
        }
        Self::new(amps, num_sites, 2)
    }

    /// `|+⟩^⊗n` for qubits.
    pub fn plus(num_sites: usize) -> Result<Self> {
        let dim = hilbert_dim(num_sites, 2)?;
        Self::new(vec![C64::new(1.0, 0.0); dim], num_sites, 2)
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Digit of `site` in basis index `index`.
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.local_dim.pow(site as u32)) % self.local_dim
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.num_sites {
            Err(Error::SiteOutOfRange { site, num_sites: self.num_sites })
        } else {
            Ok(())
        }
    }

    pub(crate) fn same_shape(&self, other: &PureState) -> Result<()> {
        if self.num_sites != other.num_sites || self.local_dim != other.local_dim {
            Err(Error::ShapeMismatch(
                self.num_sites,
                self.local_dim,
                other.num_sites,
                other.local_dim,
            ))
        } else {
            Ok(())
        }
    }
}

/// Free-function form of [`PureState::new`].
pub fn make_pure(amplitudes: Vec<C64>, num_sites: usize, local_dim: usize) -> Result<PureState> {
    PureState::new(amplitudes, num_sites, local_dim)
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Sorted set of distinct site indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteSubset(Vec<usize>);

impl SiteSubset {
    pub fn new(sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = sites.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSite(w[0]));
        }
        Ok(Self(v))
    }

    pub fn single(site: usize) -> Self {
        Self(vec![site])
    }

    pub fn all(num_sites: usize) -> Self {
        Self((0..num_sites).collect())
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    pub fn complement(&self, num_sites: usize) -> Self {
        Self((0..num_sites).filter(|s| !self.contains(*s)).collect())
    }

    fn validate(&self, num_sites: usize) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::EmptySubset);
        }
        match self.0.last() {
            Some(&s) if s >= num_sites => Err(Error::SiteOutOfRange { site: s, num_sites }),
            _ => Ok(()),
        }
    }
}

/// Hermitian, PSD, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_hermitian(&matrix)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOL || trace.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} differs from 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { C64::new(probs[i], 0.0) } else { C64::new(0.0, 0.0) });
        Self::new(m)
    }

    pub fn pure(state: &PureState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self { matrix: &v * v.adjoint() }
    }

    /// Maximally mixed operator `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenpairs sorted by descending eigenvalue; ties (within 1e-12) are
    /// ordered lexicographically on the phase-fixed eigenvector.
    pub fn eigen(&self) -> (Vec<f64>, Vec<Vec<C64>>) {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<C64>)> = (0..self.dim())
            .map(|k| {
                let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
                fix_phase(&mut v);
                (eig.eigenvalues[k], v)
            })
            .collect();
        pairs.sort_by(|a, b| {
            if (a.0 - b.0).abs() > EIGEN_CLAMP {
                b.0.total_cmp(&a.0)
            } else {
                lexicographic(&a.1, &b.1)
            }
        });
        pairs.into_iter().unzip()
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Rotates the global phase so the largest-magnitude entry (lowest index on
/// ties) is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    for (k, a) in v.iter().enumerate() {
        if a.norm() > v[best].norm() + 1e-14 {
            best = k;
        }
    }
    let pivot = v[best];
    let r = pivot.norm();
    if r > 0.0 {
        let phase = pivot.conj() / r;
        v.iter_mut().for_each(|a| *a *= phase);
        v[best] = C64::new(v[best].re, 0.0);
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if worst > DENSITY_TOL {
        Err(Error::NotHermitian(worst))
    } else {
        Ok(())
    }
}

fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        let mean = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean + disc, mean - disc];
    }
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Amplitudes reshaped to a `d^|keep| × d^(N−|keep|)` matrix; row index is
/// the little-endian index over `keep`, column index over the complement.
pub(crate) fn bipartition_matrix(state: &PureState, keep: &SiteSubset) -> CMatrix {
    let d = state.local_dim;
    let n = state.num_sites;
    let rest = keep.complement(n);
    let rows = d.pow(keep.len() as u32);
    let cols = d.pow(rest.len() as u32);
    let strides: Vec<usize> = (0..n).map(|s| d.pow(s as u32)).collect();
    let keep_offsets = offsets(keep.sites(), &strides, d);
    let rest_offsets = offsets(rest.sites(), &strides, d);
    CMatrix::from_fn(rows, cols, |r, c| state.amplitudes[keep_offsets[r] + rest_offsets[c]])
}

/// Full-register index offset for every little-endian index over `sites`.
fn offsets(sites: &[usize], strides: &[usize], d: usize) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in sites {
        let mut next = Vec::with_capacity(out.len() * d);
        for a in 0..d {
            next.extend(out.iter().map(|o| o + a * strides[s]));
        }
        out = next;
    }
    out
}

/// `tr_{complement}[|ψ⟩⟨ψ|]`.
pub fn reduced_density(state: &PureState, keep: &SiteSubset) -> Result<DensityOperator> {
    keep.validate(state.num_sites)?;
    if keep.len() == 1 {
        return Ok(single_site_density(state, keep.sites()[0]));
    }
    let m = bipartition_matrix(state, keep);
    Ok(DensityOperator::from_matrix_unchecked(&m * m.adjoint()))
}

/// Single-site marginal; `site` must be in range.
pub(crate) fn single_site_density(state: &PureState, site: usize) -> DensityOperator {
    let d = state.local_dim;
    let stride = d.pow(site as u32);
    let block = stride * d;
    let mut rho = CMatrix::zeros(d, d);
    let amps = &state.amplitudes;
    for hi in (0..amps.len()).step_by(block) {
        for lo in 0..stride {
            let base = hi + lo;
            for a in 0..d {
                let x = amps[base + a * stride];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..d {
                    rho[(a, b)] += x * amps[base + b * stride].conj();
                }
            }
        }
    }
    DensityOperator::from_matrix_unchecked(rho)
}

/// `−Σ λ ln λ` over eigenvalues above [`EIGEN_CLAMP`].
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_eigenvalues(&hermitian_eigenvalues(&rho.matrix))
}

/// Entropy of an arbitrary matrix, rejecting non-Hermitian input.
pub fn matrix_entropy(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidDensity("matrix must be square".into()));
    }
    check_hermitian(m)?;
    Ok(entropy_of_eigenvalues(&hermitian_eigenvalues(m)))
}

fn entropy_of_eigenvalues(eigs: &[f64]) -> f64 {
    let s: f64 = eigs.iter().filter(|&&l| l > EIGEN_CLAMP).map(|&l| -l * l.ln()).sum();
    s.max(0.0)
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn shannon_entropy<I: IntoIterator<Item = f64>>(probs: I) -> Result<f64> {
    let mut total = 0.0;
    let mut h = 0.0;
    for p in probs {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
        }
        total += p;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(h)
}

/// `⟨a|b⟩`.
pub fn overlap(a: &PureState, b: &PureState) -> Result<C64> {
    a.same_shape(b)?;
    Ok(inner(&a.amplitudes, &b.amplitudes))
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(K_site ⊗ I)|ψ⟩` on raw amplitudes.
pub(crate) fn apply_local(amps: &[C64], local_dim: usize, site: usize, k: &CMatrix) -> Vec<C64> {
    let d = local_dim;
    let stride = d.pow(site as u32);
    let block = stride * d;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    let mut col = vec![C64::new(0.0, 0.0); d];
    for hi in (0..amps.len()).step_by(block) {
        for lo in 0..stride {
            let base = hi + lo;
            for (b, c) in col.iter_mut().enumerate() {
                *c = amps[base + b * stride];
            }
            if col.iter().all(|c| *c == C64::new(0.0, 0.0)) {
                continue;
            }
            for a in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (b, c) in col.iter().enumerate() {
                    acc += k[(a, b)] * c;
                }
                out[base + a * stride] = acc;
            }
        }
    }
    out
}

/// Applies a single-site Kraus operator; returns the unnormalized vector and
/// its squared norm (the outcome probability).
pub fn apply_kraus(state: &PureState, site: usize, k: &CMatrix) -> Result<(Vec<C64>, f64)> {
    state.check_site(site)?;
    let d = state.local_dim;
    if k.nrows() != d || k.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: k.nrows().max(k.ncols()) });
    }
    let out = apply_local(&state.amplitudes, d, site, k);
    let p = norm_sqr(&out);
    Ok((out, p))
}
