//! Information gain of the weak measurement.
//!
//! After one run the experimenter guesses the input state `ρ_G` from the
//! detector outcome. The quality of the guess is the estimation fidelity
//! `G = ∫ ⟨ψ|ρ_G|ψ⟩ dψ` over Haar-random inputs, which runs from 1/2 (no
//! measurement) to 2/3 (projective measurement).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{branch_probabilities, PartialCollapseStrength, ReversalChain};
use crate::qubit::{fidelity_pure, DensityMatrix, PureState};
use crate::rng;

/// Schema tag of the dominance-scan CSV.
pub const SCAN_SCHEMA: &str = "#schema=infogain/v1";

const MC_CHUNK: usize = 1 << 16;

/// How the outcome is turned into a guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GuessStrategy {
    /// Click → `|1⟩`; no click → `p|0⟩⟨0| + (1-p)|1⟩⟨1|`.
    I,
    /// Click → `|1⟩`; no click → `|0⟩`.
    II,
}

impl GuessStrategy {
    pub const BOTH: [GuessStrategy; 2] = [GuessStrategy::I, GuessStrategy::II];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub g_avg: f64,
    pub p: PartialCollapseStrength,
    pub method: Method,
    pub n_samples: Option<usize>,
    pub std_error: Option<f64>,
}

/// Outcome-weighted guess `P₁ ρ_click + P₂ ρ_null`.
pub fn guess_state(strategy: GuessStrategy, psi: &PureState, p: PartialCollapseStrength) -> DensityMatrix {
    let (p_click, p_null) = branch_probabilities(psi, p);
    let pv = p.value();
    let (w0, w1) = match strategy {
        GuessStrategy::I => (p_null * pv, p_click + p_null * (1.0 - pv)),
        GuessStrategy::II => (p_null, p_click),
    };
    DensityMatrix::diagonal(w0, w1).expect("branch weights form a distribution")
}

/// Closed forms `(3 + p²)/6` and `(3 + p)/6`.
pub fn estimation_fidelity_analytic(strategy: GuessStrategy, p: PartialCollapseStrength) -> EstimationResult {
    let pv = p.value();
    let g_avg = match strategy {
        GuessStrategy::I => (3.0 + pv * pv) / 6.0,
        GuessStrategy::II => (3.0 + pv) / 6.0,
    };
    EstimationResult {
        g_avg,
        p,
        method: Method::Analytic,
        n_samples: None,
        std_error: None,
    }
}

/// Haar Monte-Carlo estimate of the estimation fidelity.
///
/// Samples are drawn in fixed-size chunks, each from its own derived
/// stream, and the partial sums are merged in chunk order, so the result
/// depends only on `(strategy, p, n_samples, seed)`.
pub fn estimation_fidelity_mc(
    strategy: GuessStrategy,
    p: PartialCollapseStrength,
    n_samples: usize,
    seed: u64,
) -> Result<EstimationResult> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = MC_CHUNK.min(n_samples - k * MC_CHUNK);
            let mut rng = rng::derived_stream(seed, &[k as u64]);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..len {
                let psi = rng::haar_state(&mut rng);
                let g = fidelity_pure(&psi, &guess_state(strategy, &psi, p));
                sum += g;
                sum_sq += g * g;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(EstimationResult {
        g_avg: mean,
        p,
        method: Method::MonteCarlo,
        n_samples: Some(n_samples),
        std_error: Some((var / n).sqrt()),
    })
}

/// Largest deviation of the joint reversal-success probability from `1 - p`
/// over `states`, from analytic branch probabilities.
///
/// A state-independent success probability means a successful run carries
/// no information about the input: the posterior equals the prior, and any
/// guess then has Haar-averaged fidelity `tr(ρ_G)/2 = 1/2`.
pub fn erasure_check(p: PartialCollapseStrength, states: &[PureState]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::InvalidInput("no states given".into()));
    }
    let chain = ReversalChain::new(p)?;
    let target = 1.0 - p.value();
    Ok(states
        .iter()
        .map(|s| (chain.success_probability(s) - target).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceRow {
    pub p: f64,
    pub g_strategy_i: f64,
    pub g_strategy_ii: f64,
    pub difference: f64,
}

/// Analytic `G¹`, `G²` and `G² − G¹` over a grid of strengths.
pub fn strategy_dominance_scan(p_grid: &[f64]) -> Result<Vec<DominanceRow>> {
    p_grid
        .iter()
        .map(|&pv| {
            let p = PartialCollapseStrength::new(pv)?;
            let g1 = estimation_fidelity_analytic(GuessStrategy::I, p).g_avg;
            let g2 = estimation_fidelity_analytic(GuessStrategy::II, p).g_avg;
            Ok(DominanceRow {
                p: pv,
                g_strategy_i: g1,
                g_strategy_ii: g2,
                difference: g2 - g1,
            })
        })
        .collect()
}

pub fn write_scan_csv<W: Write>(rows: &[DominanceRow], mut w: W) -> Result<()> {
    writeln!(w, "{SCAN_SCHEMA}")?;
    writeln!(w, "p,g_strategy_I,g_strategy_II,difference")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.p, r.g_strategy_i, r.g_strategy_ii, r.difference)?;
    }
    Ok(())
}
