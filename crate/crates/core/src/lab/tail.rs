//! Empirical tails of `|⟨0…0|ψ⟩|²` next to the analytic concentration
//! bounds.
//!
//! For each α the table reports
//! - `Prob[|⟨v|ψ⟩|² ≥ 4α/D]` against the Haar bound `2 e^{−C₁ α}`,
//! - `Prob[|⟨v|ψ⟩|² ≥ α/D]` against the ε-approximate t-design bound
//!   `(t/α)^t (1 + ε)`,
//!
//! each with a 99% Wilson score interval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{derive_seed, sample_circuit, sample_haar, CircuitSpec};
use crate::error::{Error, Result};
use crate::qstate::hilbert_dim;

/// `C₁ = 2 / (9 π³ ln 2)`.
pub const C1: f64 = 2.0 / (9.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::LN_2);

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

pub const MIN_TAIL_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailEnsemble {
    Haar,
    Circuit { depth: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub ensemble: TailEnsemble,
    pub n: usize,
    pub samples: usize,
    pub alphas: Vec<f64>,
    pub t: u32,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub alpha: f64,
    pub haar_threshold: f64,
    pub haar_exceed: usize,
    pub haar_freq: f64,
    pub haar_wilson_lo: f64,
    pub haar_wilson_hi: f64,
    pub haar_bound: f64,
    pub design_threshold: f64,
    pub design_exceed: usize,
    pub design_freq: f64,
    pub design_wilson_lo: f64,
    pub design_wilson_hi: f64,
    pub design_bound: f64,
    pub samples: usize,
}

impl TailRow {
    pub fn haar_violated(&self) -> bool {
        self.haar_freq > self.haar_bound
    }

    pub fn design_violated(&self) -> bool {
        self.design_freq > self.design_bound
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Squared overlaps with `|0…0⟩`; sample `i` uses `derive_seed(seed, i)`.
pub fn sample_overlaps(params: &TailParams) -> Result<Vec<f64>> {
    (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(params.seed, i as u64);
            let psi = match params.ensemble {
                TailEnsemble::Haar => sample_haar(params.n, 2, seed)?,
                TailEnsemble::Circuit { depth } => sample_circuit(&CircuitSpec::new(params.n, depth, seed)?)?,
            };
            Ok(psi.amplitudes()[0].norm_sqr())
        })
        .collect()
}

pub fn run_tail(params: &TailParams) -> Result<Vec<TailRow>> {
    if params.samples < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidArgument(format!("tail estimates need ≥ {MIN_TAIL_SAMPLES} samples")));
    }
    if params.t == 0 || !(params.epsilon >= 0.0) {
        return Err(Error::InvalidArgument("need t ≥ 1 and ε ≥ 0".into()));
    }
    if params.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::InvalidArgument("α values must be positive".into()));
    }
    let dim = hilbert_dim(params.n, 2)? as f64;
    let overlaps = sample_overlaps(params)?;
    let m = overlaps.len();
    let count = |threshold: f64| overlaps.iter().filter(|&&x| x >= threshold).count();
    Ok(params
        .alphas
        .iter()
        .map(|&alpha| {
            let haar_threshold = 4.0 * alpha / dim;
            let design_threshold = alpha / dim;
            let (hk, dk) = (count(haar_threshold), count(design_threshold));
            let (haar_wilson_lo, haar_wilson_hi) = wilson_interval(hk, m, Z99);
            let (design_wilson_lo, design_wilson_hi) = wilson_interval(dk, m, Z99);
            TailRow {
                alpha,
                haar_threshold,
                haar_exceed: hk,
                haar_freq: hk as f64 / m as f64,
                haar_wilson_lo,
                haar_wilson_hi,
                haar_bound: 2.0 * (-C1 * alpha).exp(),
                design_threshold,
                design_exceed: dk,
                design_freq: dk as f64 / m as f64,
                design_wilson_lo,
                design_wilson_hi,
                design_bound: (params.t as f64 / alpha).powi(params.t as i32) * (1.0 + params.epsilon),
                samples: m,
            }
        })
        .collect())
}
