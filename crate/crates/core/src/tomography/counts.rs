//! Projective measurement settings, the count forward model, and the
//! `setting,count,shots` CSV format.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{bloch_matrix, BlochVector, Cardinal, DensityMatrix, Mat2};
use crate::rng;

/// Schema tag written as the first line of count CSV files.
pub const COUNTS_SCHEMA: &str = "#schema=counts/v1";

/// Shot count used by [`NoiseModel::off`]; large enough that rounding the
/// expected counts to integers is invisible at 1e-6 fidelity.
pub const IDEAL_SHOTS: u64 = 10_000_000_000;

/// Projection onto one of the six polarization states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    label: Cardinal,
    projector: DensityMatrix,
}

impl MeasurementSetting {
    pub fn new(label: Cardinal) -> Self {
        Self {
            label,
            projector: label.state().density(),
        }
    }

    /// The overcomplete six-setting set H, V, D, A, R, L.
    pub fn standard() -> Vec<MeasurementSetting> {
        Cardinal::ALL.iter().copied().map(Self::new).collect()
    }

    pub fn label(&self) -> Cardinal {
        self.label
    }

    pub fn projector(&self) -> &DensityMatrix {
        &self.projector
    }

    /// Projector with its polar and azimuthal Bloch angles perturbed by
    /// independent Gaussian errors of `sigma_deg` degrees.
    fn jittered<R: Rng + ?Sized>(&self, sigma_deg: f64, rng: &mut R) -> Mat2 {
        if sigma_deg <= 0.0 {
            return *self.projector.matrix();
        }
        let normal = Normal::new(0.0, sigma_deg.to_radians()).expect("finite sigma");
        let b = self.label.state().bloch();
        let theta = b.z.clamp(-1.0, 1.0).acos() + normal.sample(rng);
        let phi = b.y.atan2(b.x) + normal.sample(rng);
        let dir = BlochVector::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        bloch_matrix(&dir)
    }
}

/// Imperfections applied when simulating tomography data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub shots_per_setting: u64,
    /// Gaussian σ, in degrees, on the analyzer angles.
    pub waveplate_jitter_deg: f64,
    /// Additive error on the reversal-stage strength.
    pub p_mismatch: f64,
    pub enable_poisson: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            shots_per_setting: 10_000,
            waveplate_jitter_deg: 0.0,
            p_mismatch: 0.0,
            enable_poisson: true,
        }
    }
}

impl NoiseModel {
    /// Ideal limit: exact expected counts at [`IDEAL_SHOTS`].
    pub fn off() -> Self {
        Self {
            shots_per_setting: IDEAL_SHOTS,
            waveplate_jitter_deg: 0.0,
            p_mismatch: 0.0,
            enable_poisson: false,
        }
    }

    /// Desk-scale emulation of a lab run: 10⁴ Poisson shots per setting,
    /// 0.6° analyzer jitter and a 0.01 reversal-strength offset.
    pub fn paper_like() -> Self {
        Self {
            shots_per_setting: 10_000,
            waveplate_jitter_deg: 0.6,
            p_mismatch: 0.01,
            enable_poisson: true,
        }
    }

    /// Exact expected counts at a chosen shot number.
    pub fn noiseless(shots_per_setting: u64) -> Self {
        Self {
            shots_per_setting,
            waveplate_jitter_deg: 0.0,
            p_mismatch: 0.0,
            enable_poisson: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots_per_setting == 0 {
            return Err(Error::Config("shots_per_setting must be positive".into()));
        }
        if !(self.waveplate_jitter_deg.is_finite() && self.waveplate_jitter_deg >= 0.0) {
            return Err(Error::Config(format!(
                "waveplate_jitter_deg must be finite and nonnegative, got {}",
                self.waveplate_jitter_deg
            )));
        }
        if !self.p_mismatch.is_finite() {
            return Err(Error::Config("p_mismatch must be finite".into()));
        }
        Ok(())
    }
}

/// Number of detection events recorded in one setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: Cardinal,
    pub count: u64,
    pub shots: u64,
}

/// Forward model for tomography data; a pure function of its arguments.
///
/// The expected count of setting `s` is `shots · tr(Π_s ρ)`. Jitter perturbs
/// `Π_s` before the Born rule; Poisson noise, when enabled, replaces the
/// rounded expectation by a Poisson draw.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    noise.validate()?;
    if settings.is_empty() {
        return Err(Error::InvalidInput("no measurement settings given".into()));
    }
    let mut rng = rng::stream(seed);
    let shots = noise.shots_per_setting;
    let records = settings
        .iter()
        .map(|s| {
            let projector = s.jittered(noise.waveplate_jitter_deg, &mut rng);
            let prob = rho.expectation(&projector).clamp(0.0, 1.0);
            let mean = shots as f64 * prob;
            let count = if noise.enable_poisson && mean > 0.0 {
                Poisson::new(mean).expect("positive finite mean").sample(&mut rng) as u64
            } else {
                mean.round() as u64
            };
            CountRecord {
                setting: s.label(),
                count,
                shots,
            }
        })
        .collect();
    Ok(records)
}

#[derive(Deserialize)]
struct RawRecord {
    setting: String,
    count: u64,
    shots: u64,
}

/// Reads `setting,count,shots` rows; lines starting with `#` are skipped.
pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<CountRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["setting", "count", "shots"] {
        return Err(Error::InvalidInput(format!(
            "expected header setting,count,shots, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<RawRecord>() {
        let row = row?;
        if row.shots == 0 {
            return Err(Error::InvalidInput(format!(
                "setting {} has zero nominal shots",
                row.setting
            )));
        }
        out.push(CountRecord {
            setting: row.setting.parse()?,
            count: row.count,
            shots: row.shots,
        });
    }
    Ok(out)
}

pub fn parse_counts_csv(text: &str) -> Result<Vec<CountRecord>> {
    read_counts_csv(text.as_bytes())
}

pub fn write_counts_csv<W: Write>(records: &[CountRecord], mut writer: W) -> Result<()> {
    writeln!(writer, "{COUNTS_SCHEMA}")?;
    writeln!(writer, "setting,count,shots")?;
    for r in records {
        writeln!(writer, "{},{},{}", r.setting, r.count, r.shots)?;
    }
    Ok(())
}
