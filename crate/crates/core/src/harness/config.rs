//! Experiment configuration (JSON) and input-state specifications.
//!
//! All fields are optional in the JSON file; missing ones take the defaults
//! below. Unknown fields are rejected.
//!
//! | field                 | default                                            |
//! |-----------------------|----------------------------------------------------|
//! | `p_grid`              | `[0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.895, 0.95]`   |
//! | `plate_counts`        | unset; when set, replaces `p_grid` by `1 - Tⁿ`     |
//! | `plate_transmittance` | `0.85`                                             |
//! | `info_p_grid`         | `[0, 0.1, …, 1]`                                   |
//! | `input_states`        | six cardinal states plus eight cube vertices       |
//! | `noise`               | Poisson, 10⁴ shots, no jitter, no mismatch         |
//! | `shots_per_setting`   | unset; overrides `noise.shots_per_setting`         |
//! | `seed`                | `12345`                                            |
//! | `output_dir`          | `results`                                          |
//! | `mc_samples`          | `1000000`                                          |
//! | `trajectory_trials`   | `100000`                                           |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{brewster_stack, PartialCollapseStrength, PlateStack, DEFAULT_PLATE_TRANSMITTANCE};
use crate::qubit::{c, BlochVector, Cardinal, PureState};
use crate::tomography::NoiseModel;

pub const DEFAULT_P_GRID: [f64; 9] = [0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.895, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeSpec {
    pub label: String,
    /// `[re, im]`
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochSpec {
    pub label: String,
    pub bloch: [f64; 3],
}

/// An input state: a cardinal label, explicit amplitudes, or a Bloch
/// direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Cardinal(Cardinal),
    Amplitudes(AmplitudeSpec),
    Bloch(BlochSpec),
}

impl StateSpec {
    pub fn label(&self) -> String {
        match self {
            StateSpec::Cardinal(c) => c.label().to_string(),
            StateSpec::Amplitudes(a) => a.label.clone(),
            StateSpec::Bloch(b) => b.label.clone(),
        }
    }

    pub fn resolve(&self) -> Result<PureState> {
        match self {
            StateSpec::Cardinal(label) => Ok(label.state()),
            StateSpec::Amplitudes(a) => PureState::new(c(a.alpha[0], a.alpha[1]), c(a.beta[0], a.beta[1])),
            StateSpec::Bloch(b) => PureState::from_bloch(BlochVector::new(b.bloch[0], b.bloch[1], b.bloch[2])),
        }
    }

    /// The six cardinal states followed by the eight cube vertices
    /// `(±1, ±1, ±1)/√3`, labelled by their signs (e.g. `C+-+`).
    pub fn default_set() -> Vec<StateSpec> {
        let mut out: Vec<StateSpec> = Cardinal::ALL.iter().copied().map(StateSpec::Cardinal).collect();
        let s = 1.0 / 3f64.sqrt();
        for &sx in &[1.0, -1.0] {
            for &sy in &[1.0, -1.0] {
                for &sz in &[1.0, -1.0] {
                    let sign = |v: f64| if v > 0.0 { '+' } else { '-' };
                    out.push(StateSpec::Bloch(BlochSpec {
                        label: format!("C{}{}{}", sign(sx), sign(sy), sign(sz)),
                        bloch: [sx * s, sy * s, sz * s],
                    }));
                }
            }
        }
        out
    }
}

fn parse_floats<const N: usize>(text: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(Error::InvalidInput(format!(
            "expected {N} comma-separated numbers, got {text:?}"
        )));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("bad number {p:?}: {e}")))?;
        if !o.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite number {p:?}")));
        }
    }
    Ok(out)
}

/// Command-line syntax: `H`, `bloch:x,y,z`, or `amp:re_a,im_a,re_b,im_b`.
impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let spec = if let Some(rest) = s.strip_prefix("bloch:") {
            let b = parse_floats::<3>(rest)?;
            StateSpec::Bloch(BlochSpec {
                label: s.to_string(),
                bloch: b,
            })
        } else if let Some(rest) = s.strip_prefix("amp:") {
            let a = parse_floats::<4>(rest)?;
            StateSpec::Amplitudes(AmplitudeSpec {
                label: s.to_string(),
                alpha: [a[0], a[1]],
                beta: [a[2], a[3]],
            })
        } else {
            StateSpec::Cardinal(s.parse()?)
        };
        spec.resolve()?;
        Ok(spec)
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Named noise settings selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoisePreset {
    /// Ideal limit; see [`NoiseModel::off`].
    Off,
    /// See [`NoiseModel::paper_like`].
    PaperLike,
    /// Whatever the config file's `noise` block says.
    Custom,
}

impl FromStr for NoisePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(NoisePreset::Off),
            "paper-like" => Ok(NoisePreset::PaperLike),
            "custom" => Ok(NoisePreset::Custom),
            other => Err(Error::Config(format!(
                "unknown noise preset {other:?}; expected off, paper-like or custom"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p_grid: Vec<f64>,
    pub plate_counts: Option<Vec<u32>>,
    pub plate_transmittance: f64,
    pub info_p_grid: Vec<f64>,
    pub input_states: Vec<StateSpec>,
    pub noise: NoiseModel,
    pub shots_per_setting: Option<u64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub mc_samples: usize,
    pub trajectory_trials: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p_grid: DEFAULT_P_GRID.to_vec(),
            plate_counts: None,
            plate_transmittance: DEFAULT_PLATE_TRANSMITTANCE,
            info_p_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            input_states: StateSpec::default_set(),
            noise: NoiseModel::default(),
            shots_per_setting: None,
            seed: 12_345,
            output_dir: PathBuf::from("results"),
            mc_samples: 1_000_000,
            trajectory_trials: 100_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn with_noise_preset(mut self, preset: NoisePreset) -> Self {
        match preset {
            NoisePreset::Off => {
                self.noise = NoiseModel::off();
                self.shots_per_setting = None;
            }
            NoisePreset::PaperLike => {
                self.noise = NoiseModel::paper_like();
                self.shots_per_setting = None;
            }
            NoisePreset::Custom => {}
        }
        self
    }

    /// The noise model with the top-level shot override applied.
    pub fn effective_noise(&self) -> NoiseModel {
        let mut noise = self.noise;
        if let Some(shots) = self.shots_per_setting {
            noise.shots_per_setting = shots;
        }
        noise
    }

    /// Strengths used by the reversal experiments.
    pub fn strengths(&self) -> Result<Vec<PartialCollapseStrength>> {
        match &self.plate_counts {
            Some(counts) => counts
                .iter()
                .map(|&n| Ok(brewster_stack(&PlateStack::new(n, self.plate_transmittance)?)))
                .collect(),
            None => self.p_grid.iter().map(|&p| PartialCollapseStrength::new(p)).collect(),
        }
    }

    pub fn info_strengths(&self) -> Result<Vec<PartialCollapseStrength>> {
        self.info_p_grid
            .iter()
            .map(|&p| PartialCollapseStrength::new(p))
            .collect()
    }

    pub fn resolved_states(&self) -> Result<Vec<(String, PureState)>> {
        self.input_states
            .iter()
            .map(|s| Ok((s.label(), s.resolve()?)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.plate_counts.is_none() && self.p_grid.is_empty() {
            return bad("p_grid is empty".into());
        }
        if !(self.plate_transmittance > 0.0 && self.plate_transmittance <= 1.0) {
            return bad(format!(
                "plate_transmittance {} outside (0, 1]",
                self.plate_transmittance
            ));
        }
        for p in self.strengths().map_err(|e| Error::Config(e.to_string()))? {
            if !p.is_reversible() {
                return bad(format!("p_grid value {p} must be below 1 for reversal experiments"));
            }
        }
        self.info_strengths()
            .map_err(|e| Error::Config(format!("info_p_grid: {e}")))?;
        if self.info_p_grid.is_empty() {
            return bad("info_p_grid is empty".into());
        }
        if self.input_states.is_empty() {
            return bad("input_states is empty".into());
        }
        self.resolved_states()
            .map_err(|e| Error::Config(format!("input_states: {e}")))?;
        self.effective_noise().validate()?;
        if self.mc_samples == 0 {
            return bad("mc_samples must be positive".into());
        }
        if self.trajectory_trials == 0 {
            return bad("trajectory_trials must be positive".into());
        }
        Ok(())
    }
}
