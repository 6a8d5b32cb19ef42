//! Single-qubit state reconstruction from projective counts.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qubit::{bloch_matrix, BlochVector, Cardinal, DensityMatrix, Mat2};
use crate::tomography::counts::{CountRecord, MeasurementSetting};
use crate::tomography::physical::{matrix_to_params, params_to_matrix, project_to_physical};

/// Frequencies per setting, pooling repeated records of the same label.
fn frequencies(records: &[CountRecord]) -> BTreeMap<Cardinal, f64> {
    let mut pooled: BTreeMap<Cardinal, (u64, u64)> = BTreeMap::new();
    for r in records {
        let e = pooled.entry(r.setting).or_default();
        e.0 = e.0.saturating_add(r.count);
        e.1 = e.1.saturating_add(r.shots);
    }
    pooled
        .into_iter()
        .filter(|(_, (_, shots))| *shots > 0)
        .map(|(k, (n, shots))| (k, n as f64 / shots as f64))
        .collect()
}

fn stokes(freq: &BTreeMap<Cardinal, f64>, plus: Cardinal) -> Result<f64> {
    let minus = plus.opposite();
    let (Some(a), Some(b)) = (freq.get(&plus), freq.get(&minus)) else {
        return Err(Error::InsufficientData(format!(
            "settings {plus} and {minus} are both required"
        )));
    };
    let total = a + b;
    if total <= 0.0 {
        return Err(Error::InsufficientData(format!(
            "no counts in the {plus}/{minus} basis"
        )));
    }
    Ok((a - b) / total)
}

/// Stokes-parameter reconstruction `ρ = (𝟙 + Sx σx + Sy σy + Sz σz)/2`.
///
/// `Sz` comes from H/V, `Sx` from D/A and `Sy` from L/R. The result is
/// Hermitian with unit trace but may have a negative eigenvalue.
pub fn linear_inversion(records: &[CountRecord]) -> Result<Mat2> {
    let freq = frequencies(records);
    let b = BlochVector::new(
        stokes(&freq, Cardinal::D)?,
        stokes(&freq, Cardinal::L)?,
        stokes(&freq, Cardinal::H)?,
    );
    Ok(bloch_matrix(&b))
}

/// Poisson log-likelihood `Σ n ln λ − λ` (dropping `ln n!`) with
/// `λ = shots · tr(Π ρ)`.
pub fn poisson_log_likelihood(records: &[CountRecord], rho: &DensityMatrix) -> f64 {
    log_likelihood_of(records, rho.matrix())
}

fn log_likelihood_of(records: &[CountRecord], rho: &Mat2) -> f64 {
    records
        .iter()
        .map(|r| {
            let projector = MeasurementSetting::new(r.setting);
            let lambda = r.shots as f64 * (projector.projector().matrix() * rho).trace().re.max(0.0);
            let n = r.count as f64;
            if r.count == 0 {
                -lambda
            } else if lambda > 0.0 {
                n * lambda.ln() - lambda
            } else {
                f64::NEG_INFINITY
            }
        })
        .sum()
}

/// Half Poisson deviance `Σ n ln(n/λ) − n + λ` divided by the total count:
/// the log-likelihood gap to the saturated model, which is zero for a
/// perfect fit and keeps full relative precision near the optimum.
fn normalized_deviance(records: &[CountRecord], rho: &Mat2, total: f64) -> f64 {
    records
        .iter()
        .map(|r| {
            let projector = MeasurementSetting::new(r.setting);
            let lambda = r.shots as f64 * (projector.projector().matrix() * rho).trace().re.max(0.0);
            let n = r.count as f64;
            if r.count == 0 {
                lambda
            } else if lambda > 0.0 {
                n * (n / lambda).ln() - n + lambda
            } else {
                f64::INFINITY
            }
        })
        .sum::<f64>()
        / total
}

/// Smallest convergence tolerance applied to the normalized objective;
/// below this the comparison drowns in rounding.
const MIN_NORMALIZED_TOLERANCE: f64 = 1e-14;

/// Settings for [`mle_state_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MleOptions {
    /// `tolerance` is in raw log-likelihood units.
    pub optimizer: NelderMead,
}

/// Maximum-likelihood density matrix with default options.
pub fn mle_state(records: &[CountRecord]) -> Result<DensityMatrix> {
    mle_state_with(records, &MleOptions::default())
}

/// Maximum-likelihood density matrix.
///
/// Searches over `ρ = L·L†/tr(L·L†)` starting from the projected
/// linear-inversion estimate, so the returned likelihood is never below
/// that estimate's.
pub fn mle_state_with(records: &[CountRecord], opts: &MleOptions) -> Result<DensityMatrix> {
    let linear = linear_inversion(records)?;
    let mut start = project_to_physical(&linear)?;
    let total: f64 = records.iter().map(|r| r.count as f64).sum::<f64>().max(1.0);
    if !normalized_deviance(records, &start, total).is_finite() {
        start = start.scale(0.999) + Mat2::identity().scale(0.0005);
    }
    let optimizer = NelderMead {
        tolerance: (opts.optimizer.tolerance / total).max(MIN_NORMALIZED_TOLERANCE),
        ..opts.optimizer
    };
    let objective = |x: &[f64]| match params_to_matrix::<2>(x) {
        Some(rho) => normalized_deviance(records, &rho, total),
        None => f64::INFINITY,
    };
    let found = optimizer.minimize(objective, &matrix_to_params(&start));
    let rho = params_to_matrix::<2>(&found.x).unwrap_or(start);
    let best = DensityMatrix::from_matrix_unchecked(rho);
    if !found.converged {
        return Err(Error::NotConverged {
            evaluations: found.evaluations,
            best: Box::new(best),
        });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{fidelity_pure, max_abs};
    use crate::rng;
    use crate::tomography::counts::{simulate_counts, NoiseModel};

    fn counts(rho: &DensityMatrix, noise: &NoiseModel, seed: u64) -> Vec<CountRecord> {
        simulate_counts(rho, &MeasurementSetting::standard(), noise, seed).unwrap()
    }

    #[test]
    fn linear_inversion_exact_cases() {
        let h = Cardinal::H.state().density();
        let li = linear_inversion(&counts(&h, &NoiseModel::noiseless(10_000), 0)).unwrap();
        assert!(max_abs(&(li - h.matrix())) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed();
        let li = linear_inversion(&counts(&mixed, &NoiseModel::noiseless(10_000), 0)).unwrap();
        assert!(max_abs(&(li - mixed.matrix())) < 1e-15);
        for label in Cardinal::ALL {
            let rho = label.state().density();
            let li = linear_inversion(&counts(&rho, &NoiseModel::noiseless(1000), 0)).unwrap();
            assert!(max_abs(&(li - rho.matrix())) < 1e-15, "{label}");
        }
    }

    #[test]
    fn linear_inversion_poisson_l_state() {
        let l = Cardinal::L.state().density();
        let noise = NoiseModel {
            shots_per_setting: 100_000,
            ..NoiseModel::default()
        };
        let li = linear_inversion(&counts(&l, &noise, 5)).unwrap();
        assert!(max_abs(&(li - l.matrix())) < 0.02);
    }

    #[test]
    fn linear_inversion_requires_all_bases() {
        let h = Cardinal::H.state().density();
        let mut recs = counts(&h, &NoiseModel::noiseless(100), 0);
        recs.retain(|r| r.setting != Cardinal::A);
        assert!(matches!(linear_inversion(&recs), Err(Error::InsufficientData(_))));
        let zero: Vec<CountRecord> = Cardinal::ALL
            .iter()
            .map(|&s| CountRecord {
                setting: s,
                count: if matches!(s, Cardinal::R | Cardinal::L) { 0 } else { 5 },
                shots: 10,
            })
            .collect();
        assert!(matches!(linear_inversion(&zero), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn mle_noiseless_h() {
        let h = Cardinal::H.state();
        let rho = mle_state(&counts(&h.density(), &NoiseModel::noiseless(10_000), 0)).unwrap();
        assert!((fidelity_pure(&h, &rho) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mle_repairs_unphysical_linear_inversion() {
        // A near-pure state at 50 shots: find a seed whose linear inversion
        // leaves the Bloch ball.
        let target = crate::qubit::PureState::from_bloch(BlochVector::new(0.55, 0.55, 0.62)).unwrap();
        let noise = NoiseModel {
            shots_per_setting: 50,
            ..NoiseModel::default()
        };
        let (recs, li) = (0..500)
            .map(|seed| {
                let recs = counts(&target.density(), &noise, seed);
                let li = linear_inversion(&recs).unwrap();
                (recs, li)
            })
            .find(|(_, li)| crate::tomography::physical::min_eigenvalue(li) < -1e-3)
            .expect("some seed yields an unphysical estimate");
        assert!(crate::tomography::physical::min_eigenvalue(&li) < 0.0);
        let rho = mle_state(&recs).unwrap();
        assert!(rho.eigenvalues()[0] >= -1e-10);
        let projected = DensityMatrix::from_matrix_unchecked(project_to_physical(&li).unwrap());
        assert!(poisson_log_likelihood(&recs, &rho) >= poisson_log_likelihood(&recs, &projected));
    }

    #[test]
    fn mle_haar_roundtrip_poisson() {
        let noise = NoiseModel {
            shots_per_setting: 100_000,
            ..NoiseModel::default()
        };
        let states = rng::haar_states(100, 17);
        let mean: f64 = states
            .iter()
            .enumerate()
            .map(|(i, s)| fidelity_pure(s, &mle_state(&counts(&s.density(), &noise, i as u64)).unwrap()))
            .sum::<f64>()
            / states.len() as f64;
        assert!(mean >= 0.995, "{mean}");
    }

    #[test]
    fn not_converged_carries_best_iterate() {
        let opts = MleOptions {
            optimizer: NelderMead {
                max_evaluations: 3,
                ..NelderMead::default()
            },
        };
        let s = crate::qubit::PureState::from_bloch(BlochVector::new(0.3, -0.2, 0.9)).unwrap();
        let noise = NoiseModel {
            shots_per_setting: 1000,
            ..NoiseModel::default()
        };
        match mle_state_with(&counts(&s.density(), &noise, 1), &opts) {
            Err(Error::NotConverged { evaluations, best }) => {
                assert!(evaluations >= 3);
                assert!(best.eigenvalues()[0] >= -1e-10);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
