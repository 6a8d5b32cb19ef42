//! Seeded experiment pipelines.
//!
//! Each experiment is a list of independent cells run in parallel. Cell `k`
//! draws from `derive_seed(seed, [tag, k, stage])`, and results are collected
//! in cell order, so outputs depend only on the configuration and seed.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::info::{estimation_fidelity_analytic, estimation_fidelity_mc, GuessStrategy};
use crate::measurement::{partial_collapse, PartialCollapseStrength, ReversalChain, ReversalOutcome};
use crate::qubit::{fidelity_pure, BlochVector, Cardinal, DensityMatrix, PureState};
use crate::rng::derive_seed;
use crate::tomography::{
    mle_state, process_fidelity, qpt_chi, simulate_counts, ChiMatrix, CountRecord, MeasurementSetting, NoiseModel,
};

const TAG_FIG2: u64 = 2;
const TAG_FIG3: u64 = 3;
const TAG_FIG4: u64 = 4;
const TAG_TRAJECTORY: u64 = 5;
const TAG_QST: u64 = 6;

/// Probe inputs for process tomography.
pub const QPT_PROBES: [Cardinal; 4] = [Cardinal::H, Cardinal::V, Cardinal::A, Cardinal::L];

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Values {
    pub fidelity_initial_vs_recovered: f64,
    pub bloch_initial: BlochVector,
    pub bloch_collapsed: BlochVector,
    pub bloch_recovered: BlochVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub state_label: String,
    pub p: f64,
    /// `Err` holds the reason a cell failed; the rest of the batch still runs.
    pub outcome: std::result::Result<Fig2Values, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Row {
    pub p: f64,
    pub outcome: std::result::Result<(ChiMatrix, f64), String>,
}

impl Fig3Row {
    pub fn process_fidelity(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|(_, f)| *f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Row {
    pub p: f64,
    pub g1_analytic: f64,
    pub g2_analytic: f64,
    pub g1_mc: f64,
    pub g2_mc: f64,
    pub g1_stderr: f64,
    pub g2_stderr: f64,
}

/// Simulated tomography followed by maximum likelihood.
pub fn tomograph(rho: &DensityMatrix, noise: &NoiseModel, seed: u64) -> Result<DensityMatrix> {
    let counts = simulate_counts(rho, &MeasurementSetting::standard(), noise, seed)?;
    mle_state(&counts)
}

/// Measurement at `p` and reversal at `p + δp`, with `δp` from the noise
/// model; the reversal strength is clamped at zero.
fn chain_for(p: PartialCollapseStrength, noise: &NoiseModel) -> Result<ReversalChain> {
    let p_rev = PartialCollapseStrength::new((p.value() + noise.p_mismatch).max(0.0))?;
    ReversalChain::with_reversal_strength(p, p_rev)
}

fn fig2_cell(
    psi: &PureState,
    p: PartialCollapseStrength,
    noise: &NoiseModel,
    seed: u64,
    cell: u64,
) -> Result<Fig2Values> {
    let chain = chain_for(p, noise)?;
    let (collapsed, _) = partial_collapse(psi, p)?;
    let recovered = chain.conditioned_output(&psi.density())?;
    let stage = |k: u64| derive_seed(seed, &[TAG_FIG2, cell, k]);
    let rho_init = tomograph(&psi.density(), noise, stage(0))?;
    let rho_coll = tomograph(&collapsed.density(), noise, stage(1))?;
    let rho_rec = tomograph(&recovered, noise, stage(2))?;
    Ok(Fig2Values {
        fidelity_initial_vs_recovered: fidelity_pure(psi, &rho_rec),
        bloch_initial: rho_init.bloch(),
        bloch_collapsed: rho_coll.bloch(),
        bloch_recovered: rho_rec.bloch(),
    })
}

/// Recovery experiment over every (input state, p) pair, in state-major
/// order.
pub fn run_fig2(config: &ExperimentConfig) -> Result<Vec<Fig2Row>> {
    config.validate()?;
    let states = config.resolved_states()?;
    let strengths = config.strengths()?;
    let noise = config.effective_noise();
    let cells: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|s| (0..strengths.len()).map(move |q| (s, q)))
        .collect();
    Ok(cells
        .par_iter()
        .enumerate()
        .map(|(k, &(s, q))| {
            let (label, psi) = &states[s];
            let p = strengths[q];
            Fig2Row {
                state_label: label.clone(),
                p: p.value(),
                outcome: fig2_cell(psi, p, &noise, config.seed, k as u64).map_err(|e| e.to_string()),
            }
        })
        .collect())
}

/// Process matrix of the success-conditioned measure-and-reverse channel,
/// reconstructed from tomographed probe outputs.
pub fn qpt_cell(p: PartialCollapseStrength, noise: &NoiseModel, seed: u64, cell: u64) -> Result<(ChiMatrix, f64)> {
    let chain = chain_for(p, noise)?;
    let probes = QPT_PROBES.map(Cardinal::state);
    let mut outputs = Vec::with_capacity(4);
    for (j, probe) in probes.iter().enumerate() {
        let out = chain.conditioned_output(&probe.density())?;
        outputs.push(tomograph(&out, noise, derive_seed(seed, &[TAG_FIG3, cell, j as u64]))?);
    }
    let outputs: [DensityMatrix; 4] = outputs.try_into().expect("four probes");
    let chi = qpt_chi(&probes, &outputs)?;
    let f = process_fidelity(&chi, &ChiMatrix::identity_channel());
    Ok((chi, f))
}

/// Process tomography at every strength of the grid.
pub fn run_fig3(config: &ExperimentConfig) -> Result<Vec<Fig3Row>> {
    config.validate()?;
    let strengths = config.strengths()?;
    let noise = config.effective_noise();
    Ok(strengths
        .par_iter()
        .enumerate()
        .map(|(k, &p)| Fig3Row {
            p: p.value(),
            outcome: qpt_cell(p, &noise, config.seed, k as u64).map_err(|e| e.to_string()),
        })
        .collect())
}

/// Analytic and Monte-Carlo estimation fidelities for both strategies.
pub fn run_fig4(config: &ExperimentConfig) -> Result<Vec<Fig4Row>> {
    config.validate()?;
    config
        .info_strengths()?
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let mc = |strategy: GuessStrategy, idx: u64| {
                estimation_fidelity_mc(
                    strategy,
                    p,
                    config.mc_samples,
                    derive_seed(config.seed, &[TAG_FIG4, k as u64, idx]),
                )
            };
            let m1 = mc(GuessStrategy::I, 0)?;
            let m2 = mc(GuessStrategy::II, 1)?;
            Ok(Fig4Row {
                p: p.value(),
                g1_analytic: estimation_fidelity_analytic(GuessStrategy::I, p).g_avg,
                g2_analytic: estimation_fidelity_analytic(GuessStrategy::II, p).g_avg,
                g1_mc: m1.g_avg,
                g2_mc: m2.g_avg,
                g1_stderr: m1.std_error.unwrap_or(0.0),
                g2_stderr: m2.std_error.unwrap_or(0.0),
            })
        })
        .collect()
}

/// Tallies of sampled measure-and-reverse runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySummary {
    pub p: f64,
    pub trials: u64,
    pub lost_at_measurement: u64,
    pub lost_at_reversal: u64,
    pub reversed: u64,
    /// Mean overlap of reversed outputs with the input.
    pub mean_recovery_fidelity: f64,
    /// Analytic joint success probability.
    pub expected_success: f64,
}

impl TrajectorySummary {
    pub fn success_frequency(&self) -> f64 {
        self.reversed as f64 / self.trials as f64
    }

    /// Binomial standard deviation of the success frequency.
    pub fn success_sigma(&self) -> f64 {
        (self.expected_success * (1.0 - self.expected_success) / self.trials as f64).sqrt()
    }
}

/// Samples `trials` runs; trial `i` uses seed `derive_seed(seed, [tag, i])`.
pub fn run_trajectories(
    psi: &PureState,
    p: PartialCollapseStrength,
    trials: u64,
    seed: u64,
) -> Result<TrajectorySummary> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let chain = ReversalChain::new(p)?;
    let (lost_m, lost_r, ok, fid_sum) = (0..trials)
        .into_par_iter()
        .map(|i| match chain.sample(psi, derive_seed(seed, &[TAG_TRAJECTORY, i])) {
            ReversalOutcome::LostAtMeasurement => (1, 0, 0, 0.0),
            ReversalOutcome::LostAtReversal => (0, 1, 0, 0.0),
            ReversalOutcome::ReversedOk(out) => (0, 0, 1, psi.overlap_probability(&out)),
        })
        // Collected first so the float sum runs in index order.
        .collect::<Vec<(u64, u64, u64, f64)>>()
        .into_iter()
        .fold((0, 0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    Ok(TrajectorySummary {
        p: p.value(),
        trials,
        lost_at_measurement: lost_m,
        lost_at_reversal: lost_r,
        reversed: ok,
        mean_recovery_fidelity: if ok > 0 { fid_sum / ok as f64 } else { 0.0 },
        expected_success: chain.success_probability(psi),
    })
}

/// Simulated counts for one state under the configured noise.
pub fn qst_counts(rho: &DensityMatrix, config: &ExperimentConfig) -> Result<Vec<CountRecord>> {
    simulate_counts(
        rho,
        &MeasurementSetting::standard(),
        &config.effective_noise(),
        derive_seed(config.seed, &[TAG_QST]),
    )
}
