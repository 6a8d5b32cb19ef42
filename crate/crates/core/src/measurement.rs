//! The partial-collapse measurement, its reversal, and trajectory sampling.
//!
//! A detector clicks with probability `p` when the qubit is in `|1⟩` and
//! never when it is in `|0⟩`. The click branch is a projection; the null
//! branch applies the contraction `M₂ = diag(1, √(1-p))`. Reversal is a bit
//! flip, a second null-outcome measurement, and another bit flip, which
//! gives `M₂ʳᵉᵛ = X·M₂·X = diag(√(1-p), 1)` and `M₂ʳᵉᵛ·M₂ = √(1-p)·𝟙`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::{c, sigma_x, DensityMatrix, Mat2, MeasurementOperator, OperatorLabel, PureState, BRANCH_EPS};
use crate::rng;

/// Click probability for a `|1⟩` input; `0 ≤ p ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PartialCollapseStrength(f64);

impl PartialCollapseStrength {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "partial-collapse strength {p} outside [0, 1]"
            )));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether a reversal exists (`p < 1`).
    pub fn is_reversible(self) -> bool {
        self.0 < 1.0
    }

    fn require_reversible(self) -> Result<Self> {
        if self.is_reversible() {
            Ok(self)
        } else {
            Err(Error::NoReversal(self.0))
        }
    }
}

impl TryFrom<f64> for PartialCollapseStrength {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<PartialCollapseStrength> for f64 {
    fn from(p: PartialCollapseStrength) -> f64 {
        p.0
    }
}

impl fmt::Display for PartialCollapseStrength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn diag(a: f64, b: f64) -> Mat2 {
    Mat2::new(c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0))
}

/// Click operator `M₁ = √p|1⟩⟨1|` and null operator `M₂ = |0⟩⟨0| + √(1-p)|1⟩⟨1|`.
pub fn weak_ops(p: PartialCollapseStrength) -> (MeasurementOperator, MeasurementOperator) {
    let p = p.value();
    let m1 = MeasurementOperator::new(diag(0.0, p.sqrt()), OperatorLabel::Click);
    let m2 = MeasurementOperator::new(diag(1.0, (1.0 - p).sqrt()), OperatorLabel::NoClick);
    (
        m1.expect("√p ≤ 1 is a contraction"),
        m2.expect("√(1-p) ≤ 1 is a contraction"),
    )
}

/// Null-outcome post-measurement state and its probability `P₂`.
///
/// Uses the closed form `α' = α/√(1-|β|²p)`, `β' = β√(1-p)/√(1-|β|²p)`.
pub fn partial_collapse(psi: &PureState, p: PartialCollapseStrength) -> Result<(PureState, f64)> {
    let p = p.value();
    let b2 = psi.beta().norm_sqr();
    let p_null = psi.alpha().norm_sqr() + (1.0 - p) * b2;
    if p_null <= BRANCH_EPS {
        return Err(Error::ImpossibleBranch { probability: p_null });
    }
    let denom = (1.0 - b2 * p).sqrt();
    let alpha = psi.alpha() / denom;
    let beta = psi.beta() * (1.0 - p).sqrt() / denom;
    Ok((PureState::new(alpha, beta)?, p_null))
}

/// `M₂ʳᵉᵛ = diag(√(1-p), 1)` in closed form.
pub fn reversal_op(p: PartialCollapseStrength) -> Result<MeasurementOperator> {
    let p = p.require_reversible()?.value();
    MeasurementOperator::new(diag((1.0 - p).sqrt(), 1.0), OperatorLabel::NoClick)
}

/// `M₂ʳᵉᵛ` built literally as bit flip, null-outcome measurement, bit flip.
pub fn reversal_op_composed(p: PartialCollapseStrength) -> Result<MeasurementOperator> {
    let p = p.require_reversible()?;
    let (_, m2) = weak_ops(p);
    let x = sigma_x();
    MeasurementOperator::new(x * m2.matrix() * x, OperatorLabel::NoClick)
}

/// Applies the reversal stage to a partially collapsed state.
///
/// Returns the recovered state and the conditional success probability of
/// the reversal stage alone. The joint probability with the preceding null
/// outcome is `P₂ · prob_rev = 1 - p`.
pub fn reverse(psi_m: &PureState, p: PartialCollapseStrength) -> Result<(PureState, f64)> {
    let p = p.require_reversible()?;
    let (_, m2) = weak_ops(p);
    let flipped = sigma_x() * psi_m.ket();
    let measured = m2.matrix() * flipped;
    let out = sigma_x() * measured;
    // Relative to the input norm, so an identity stage gives exactly 1.
    let prob = out.norm_squared() / psi_m.ket().norm_squared();
    if prob <= BRANCH_EPS {
        return Err(Error::ImpossibleBranch { probability: prob });
    }
    Ok((PureState::from_ket(&out)?, prob))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Click,
    NoClick,
}

/// One sampled run of the weak measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOutcome {
    pub branch: Branch,
    pub post_state: PureState,
    pub branch_probability: f64,
}

/// Click and null branch probabilities `(P₁, P₂) = (p|β|², |α|² + (1-p)|β|²)`.
pub fn branch_probabilities(psi: &PureState, p: PartialCollapseStrength) -> (f64, f64) {
    let p = p.value();
    let b2 = psi.beta().norm_sqr();
    (p * b2, psi.alpha().norm_sqr() + (1.0 - p) * b2)
}

fn sample_with<R: Rng + ?Sized>(psi: &PureState, p: PartialCollapseStrength, rng: &mut R) -> TrajectoryOutcome {
    let (p_click, p_null) = branch_probabilities(psi, p);
    let u: f64 = rng.random();
    if u < p_click {
        return TrajectoryOutcome {
            branch: Branch::Click,
            post_state: crate::qubit::Cardinal::V.state(),
            branch_probability: p_click,
        };
    }
    // p_click < 1 here, so the null branch has nonzero weight.
    let (post_state, _) = partial_collapse(psi, p).expect("null branch reached with zero probability");
    TrajectoryOutcome {
        branch: Branch::NoClick,
        post_state,
        branch_probability: p_null,
    }
}

/// Samples one weak-measurement run; a pure function of `(psi, p, seed)`.
pub fn sample_trajectory(psi: &PureState, p: PartialCollapseStrength, seed: u64) -> TrajectoryOutcome {
    sample_with(psi, p, &mut rng::stream(seed))
}

/// Result of measure-then-reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReversalOutcome {
    ReversedOk(PureState),
    LostAtMeasurement,
    LostAtReversal,
}

impl ReversalOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ReversalOutcome::ReversedOk(_))
    }
}

/// Weak measurement followed by its reversal.
///
/// The reversal strength defaults to the measurement strength; a different
/// value models a miscalibrated reversal plate stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalChain {
    measure: PartialCollapseStrength,
    reverse: PartialCollapseStrength,
}

impl ReversalChain {
    pub fn new(p: PartialCollapseStrength) -> Result<Self> {
        Self::with_reversal_strength(p, p)
    }

    pub fn with_reversal_strength(p: PartialCollapseStrength, p_rev: PartialCollapseStrength) -> Result<Self> {
        Ok(Self {
            measure: p.require_reversible()?,
            reverse: p_rev.require_reversible()?,
        })
    }

    pub fn measurement_strength(&self) -> PartialCollapseStrength {
        self.measure
    }

    pub fn reversal_strength(&self) -> PartialCollapseStrength {
        self.reverse
    }

    /// Combined Kraus operator `M₂ʳᵉᵛ(p_rev)·M₂(p)` of the success branch.
    pub fn kraus(&self) -> Mat2 {
        let (_, m2) = weak_ops(self.measure);
        let rev = reversal_op_composed(self.reverse).expect("checked reversible");
        rev.matrix() * m2.matrix()
    }

    /// Analytic probability that both stages report no click.
    pub fn success_probability(&self, psi: &PureState) -> f64 {
        (self.kraus() * psi.ket()).norm_squared() / psi.ket().norm_squared()
    }

    /// Success-conditioned output state for a pure input.
    pub fn recover(&self, psi: &PureState) -> Result<(PureState, f64)> {
        let (collapsed, p_null) = partial_collapse(psi, self.measure)?;
        let (out, p_rev) = reverse(&collapsed, self.reverse)?;
        Ok((out, p_null * p_rev))
    }

    /// Success-conditioned (renormalized) channel applied to a density matrix.
    pub fn conditioned_output(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let k = self.kraus();
        let out = k * rho.matrix() * k.adjoint();
        let prob = out.trace().re;
        if prob <= BRANCH_EPS {
            return Err(Error::ImpossibleBranch { probability: prob });
        }
        Ok(DensityMatrix::from_matrix_unchecked(out.unscale(prob)))
    }

    /// Samples measure-then-reverse; a pure function of `(psi, chain, seed)`.
    pub fn sample(&self, psi: &PureState, seed: u64) -> ReversalOutcome {
        let mut rng = rng::stream(seed);
        let first = sample_with(psi, self.measure, &mut rng);
        if first.branch == Branch::Click {
            return ReversalOutcome::LostAtMeasurement;
        }
        // The reversal plate sees the flipped state, so it clicks on |0⟩ of ψ_m.
        let x = sigma_x();
        let flipped = PureState::from_ket(&(x * first.post_state.ket())).expect("normalized");
        let second = sample_with(&flipped, self.reverse, &mut rng);
        match second.branch {
            Branch::Click => ReversalOutcome::LostAtReversal,
            Branch::NoClick => {
                let out = PureState::from_ket(&(x * second.post_state.ket())).expect("normalized");
                ReversalOutcome::ReversedOk(out)
            }
        }
    }
}

/// Samples measure-then-reverse at matched strength `p < 1`.
pub fn sample_reversal_trajectory(psi: &PureState, p: PartialCollapseStrength, seed: u64) -> Result<ReversalOutcome> {
    Ok(ReversalChain::new(p)?.sample(psi, seed))
}

/// Default per-plate intensity transmittance of vertical polarization.
pub const DEFAULT_PLATE_TRANSMITTANCE: f64 = 0.85;

/// A stack of Brewster-angle plates. Horizontal polarization is fully
/// transmitted; vertical polarization survives each plate with intensity
/// transmittance `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateStack {
    pub n_plates: u32,
    pub per_plate_v_transmittance: f64,
}

impl PlateStack {
    pub fn new(n_plates: u32, per_plate_v_transmittance: f64) -> Result<Self> {
        if !(per_plate_v_transmittance > 0.0 && per_plate_v_transmittance <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "plate transmittance {per_plate_v_transmittance} outside (0, 1]"
            )));
        }
        Ok(Self {
            n_plates,
            per_plate_v_transmittance,
        })
    }

    pub fn with_default_plates(n_plates: u32) -> Self {
        Self {
            n_plates,
            per_plate_v_transmittance: DEFAULT_PLATE_TRANSMITTANCE,
        }
    }
}

/// `p = 1 - Tⁿ`.
pub fn brewster_stack(stack: &PlateStack) -> PartialCollapseStrength {
    let t = stack.per_plate_v_transmittance.clamp(f64::MIN_POSITIVE, 1.0);
    let exp = i32::try_from(stack.n_plates).unwrap_or(i32::MAX);
    PartialCollapseStrength((1.0 - t.powi(exp)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{identity2, max_abs, Cardinal};

    fn p(v: f64) -> PartialCollapseStrength {
        PartialCollapseStrength::new(v).unwrap()
    }

    #[test]
    fn strength_range() {
        assert!(PartialCollapseStrength::new(-0.01).is_err());
        assert!(PartialCollapseStrength::new(1.01).is_err());
        assert!(PartialCollapseStrength::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<PartialCollapseStrength>("1.5").is_err());
        assert_eq!(
            serde_json::from_str::<PartialCollapseStrength>("0.25").unwrap().value(),
            0.25
        );
    }

    #[test]
    fn weak_ops_examples() {
        let (m1, m2) = weak_ops(p(0.0));
        assert_eq!(max_abs(m1.matrix()), 0.0);
        assert_eq!(*m2.matrix(), identity2());

        let (_, m2) = weak_ops(p(1.0));
        assert_eq!(*m2.matrix(), *MeasurementOperator::projector0().matrix());

        let (_, m2) = weak_ops(p(0.895));
        assert!((m2.matrix()[(1, 1)].re - 0.32404).abs() < 5e-6);
        assert_eq!(m2.label(), OperatorLabel::NoClick);
    }

    #[test]
    fn partial_collapse_examples() {
        for pv in [0.0, 0.3, 0.9, 1.0] {
            let (s, pn) = partial_collapse(&Cardinal::H.state(), p(pv)).unwrap();
            assert!(s.same_ray(&Cardinal::H.state(), 1e-15));
            assert_eq!(pn, 1.0);
        }
        let (s, pn) = partial_collapse(&Cardinal::D.state(), p(0.5)).unwrap();
        assert!((s.alpha().re - 0.816_496_580_927_726).abs() < 1e-12);
        assert!((s.beta().re - 0.577_350_269_189_626).abs() < 1e-12);
        assert!((pn - 0.75).abs() < 1e-15);

        let (s, pn) = partial_collapse(&Cardinal::V.state(), p(0.6)).unwrap();
        assert!(s.same_ray(&Cardinal::V.state(), 1e-15));
        assert!((pn - 0.4).abs() < 1e-15);

        assert!(matches!(
            partial_collapse(&Cardinal::V.state(), p(1.0)),
            Err(Error::ImpossibleBranch { .. })
        ));
    }

    #[test]
    fn reversal_op_examples() {
        assert_eq!(*reversal_op(p(0.0)).unwrap().matrix(), identity2());
        let r = reversal_op(p(0.5)).unwrap();
        assert!((r.matrix()[(0, 0)].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(r.matrix()[(1, 1)].re, 1.0);
        let r = reversal_op(p(0.895)).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.32404).abs() < 5e-6);
        assert!(matches!(reversal_op(p(1.0)), Err(Error::NoReversal(_))));
        assert!(matches!(reversal_op_composed(p(1.0)), Err(Error::NoReversal(_))));
    }

    #[test]
    fn closed_form_and_composed_reversal_agree() {
        for i in 0..50 {
            let pv = p(i as f64 / 50.0);
            let a = reversal_op(pv).unwrap();
            let b = reversal_op_composed(pv).unwrap();
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-14);
        }
    }

    #[test]
    fn reverse_examples() {
        let (m, _) = partial_collapse(&Cardinal::D.state(), p(0.5)).unwrap();
        let (back, prob) = reverse(&m, p(0.5)).unwrap();
        assert!(back.same_ray(&Cardinal::D.state(), 1e-12));
        assert!((prob - 2.0 / 3.0).abs() < 1e-12);

        let s = Cardinal::R.state();
        let (back, prob) = reverse(&s, p(0.0)).unwrap();
        assert!(back.same_ray(&s, 1e-15));
        assert_eq!(prob, 1.0);

        let chain = ReversalChain::new(p(0.6)).unwrap();
        assert!((chain.success_probability(&Cardinal::V.state()) - 0.4).abs() < 1e-12);
        let (_, joint) = chain.recover(&Cardinal::V.state()).unwrap();
        assert!((joint - 0.4).abs() < 1e-12);

        assert!(matches!(
            reverse(&Cardinal::H.state(), p(1.0)),
            Err(Error::NoReversal(_))
        ));
    }

    #[test]
    fn sampler_edge_cases() {
        for seed in 0..200 {
            let o = sample_trajectory(&Cardinal::H.state(), p(0.9), seed);
            assert_eq!(o.branch, Branch::NoClick);
            let o = sample_trajectory(&Cardinal::V.state(), p(1.0), seed);
            assert_eq!(o.branch, Branch::Click);
            assert!(o.post_state.same_ray(&Cardinal::V.state(), 1e-15));
            assert!(sample_reversal_trajectory(&Cardinal::L.state(), p(0.0), seed)
                .unwrap()
                .is_success());
        }
        assert_eq!(
            sample_trajectory(&Cardinal::D.state(), p(0.5), 11),
            sample_trajectory(&Cardinal::D.state(), p(0.5), 11)
        );
        assert!(sample_reversal_trajectory(&Cardinal::D.state(), p(1.0), 0).is_err());
    }

    #[test]
    fn click_frequency_matches_born_rule() {
        let n = 1_000_000u64;
        let clicks = (0..n)
            .filter(|&s| {
                sample_trajectory(&Cardinal::D.state(), p(0.5), rng::derive_seed(3, &[s])).branch == Branch::Click
            })
            .count() as f64;
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        assert!((clicks / n as f64 - 0.25).abs() < 3.0 * sigma);
    }

    #[test]
    fn successful_reversal_restores_input() {
        let chain = ReversalChain::new(p(0.7)).unwrap();
        let psi = Cardinal::L.state();
        let mut ok = 0;
        for seed in 0..2000 {
            if let ReversalOutcome::ReversedOk(out) = chain.sample(&psi, seed) {
                assert!(out.same_ray(&psi, 1e-10));
                ok += 1;
            }
        }
        assert!(ok > 0);
    }

    #[test]
    fn conditioned_channel_is_identity_when_matched() {
        let chain = ReversalChain::new(p(0.895)).unwrap();
        let k = chain.kraus();
        assert!(max_abs(&(k - identity2().scale(0.105_f64.sqrt()))) < 1e-14);
        let rho = Cardinal::A.state().density();
        let out = chain.conditioned_output(&rho).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-14);
    }

    #[test]
    fn plate_stack() {
        assert_eq!(brewster_stack(&PlateStack::with_default_plates(0)).value(), 0.0);
        let one = brewster_stack(&PlateStack::new(1, 0.85).unwrap()).value();
        assert!((one - 0.15).abs() < 1e-15);
        let four = brewster_stack(&PlateStack::new(4, 0.80).unwrap()).value();
        assert!((four - 0.5904).abs() < 1e-12);
        assert!(PlateStack::new(2, 0.0).is_err());
        assert!(PlateStack::new(2, 1.2).is_err());
        let lo = brewster_stack(&PlateStack::with_default_plates(3)).value();
        let hi = brewster_stack(&PlateStack::with_default_plates(14)).value();
        assert!(lo < 0.4 + 0.02 && hi > 0.89 && hi < 0.9);
    }
}
