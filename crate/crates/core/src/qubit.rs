//! Exact single-qubit linear algebra.
//!
//! Basis convention: `|0⟩ ≡ |H⟩`, `|1⟩ ≡ |V⟩`, and `|H⟩` sits at the +z pole
//! of the Bloch sphere. `|D⟩` is +x and `|L⟩ = (|H⟩ + i|V⟩)/√2` is +y.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Ket = Vector2<C64>;

/// Tolerance for physical invariants (hermiticity, trace, positivity).
pub const PHYSICAL_TOL: f64 = 1e-10;
/// Tolerance for exact-arithmetic identities.
pub const ARITHMETIC_TOL: f64 = 1e-12;
/// Branch probabilities at or below this are treated as impossible.
pub const BRANCH_EPS: f64 = 1e-15;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = c(0.0, 0.0);
const ONE: C64 = c(1.0, 0.0);
const I: C64 = c(0.0, 1.0);

pub fn identity2() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, ONE)
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// Pauli basis in the order (I, X, Y, Z).
pub fn pauli_basis() -> [Mat2; 4] {
    [identity2(), sigma_x(), sigma_y(), sigma_z()]
}

/// Largest absolute entry of a matrix.
pub fn max_abs<R: nalgebra::Dim, Cc: nalgebra::Dim, S>(m: &nalgebra::Matrix<C64, R, Cc, S>) -> f64
where
    S: nalgebra::RawStorage<C64, R, Cc>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitize2(m: &Mat2) -> Mat2 {
    (m + m.adjoint()).scale(0.5)
}

/// Closed-form eigen-decomposition of a 2×2 Hermitian matrix.
///
/// Eigenvalues are returned in ascending order together with orthonormal
/// eigenvectors. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen2(m: &Mat2) -> ([f64; 2], [Ket; 2]) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = half.hypot(b.norm());
    if r == 0.0 {
        return ([mean, mean], [Ket::new(ZERO, ONE), Ket::new(ONE, ZERO)]);
    }
    let upper = if half >= 0.0 {
        Ket::new(c(r + half, 0.0), b.conj())
    } else {
        Ket::new(b, c(r - half, 0.0))
    };
    let upper = upper.unscale(upper.norm());
    let lower = Ket::new(-upper[1].conj(), upper[0].conj());
    ([mean - r, mean + r], [lower, upper])
}

/// A normalized qubit state `α|0⟩ + β|1⟩`.
///
/// Global phase is unphysical; use [`PureState::overlap_probability`] or
/// [`PureState::same_ray`] for comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    alpha: C64,
    beta: C64,
}

impl PureState {
    /// Builds a state from (possibly unnormalized) amplitudes.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm().hypot(beta.norm());
        if !norm.is_finite() || norm <= BRANCH_EPS {
            return Err(Error::InvalidInput(format!(
                "amplitudes ({alpha}, {beta}) cannot be normalized"
            )));
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn from_ket(ket: &Ket) -> Result<Self> {
        Self::new(ket[0], ket[1])
    }

    /// The pure state with the given Bloch direction. The vector is
    /// normalized; a zero vector is rejected.
    pub fn from_bloch(b: BlochVector) -> Result<Self> {
        let n = b.norm();
        if !n.is_finite() || n <= ARITHMETIC_TOL {
            return Err(Error::InvalidInput(format!("Bloch vector {b} has no direction")));
        }
        let (x, y, z) = (b.x / n, b.y / n, b.z / n);
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        Self::new(c((0.5 * theta).cos(), 0.0), C64::from_polar((0.5 * theta).sin(), phi))
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn ket(&self) -> Ket {
        Ket::new(self.alpha, self.beta)
    }

    pub fn density(&self) -> DensityMatrix {
        let k = self.ket();
        DensityMatrix::from_matrix_unchecked(k * k.adjoint())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_probability(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Equality up to global phase.
    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        (1.0 - self.inner(other).norm()).abs() <= tol
    }

    pub fn bloch(&self) -> BlochVector {
        let cross = self.alpha.conj() * self.beta;
        BlochVector {
            x: 2.0 * cross.re,
            y: 2.0 * cross.im,
            z: self.alpha.norm_sqr() - self.beta.norm_sqr(),
        }
    }
}

/// The six polarization states used as tomography settings and probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cardinal {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Cardinal {
    pub const ALL: [Cardinal; 6] = [
        Cardinal::H,
        Cardinal::V,
        Cardinal::D,
        Cardinal::A,
        Cardinal::R,
        Cardinal::L,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Cardinal::H => "H",
            Cardinal::V => "V",
            Cardinal::D => "D",
            Cardinal::A => "A",
            Cardinal::R => "R",
            Cardinal::L => "L",
        }
    }

    pub fn state(self) -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (alpha, beta) = match self {
            Cardinal::H => (ONE, ZERO),
            Cardinal::V => (ZERO, ONE),
            Cardinal::D => (c(s, 0.0), c(s, 0.0)),
            Cardinal::A => (c(s, 0.0), c(-s, 0.0)),
            Cardinal::R => (c(s, 0.0), c(0.0, -s)),
            Cardinal::L => (c(s, 0.0), c(0.0, s)),
        };
        PureState { alpha, beta }
    }

    /// The orthogonal partner in the same measurement basis.
    pub fn opposite(self) -> Cardinal {
        match self {
            Cardinal::H => Cardinal::V,
            Cardinal::V => Cardinal::H,
            Cardinal::D => Cardinal::A,
            Cardinal::A => Cardinal::D,
            Cardinal::R => Cardinal::L,
            Cardinal::L => Cardinal::R,
        }
    }
}

impl fmt::Display for Cardinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Cardinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(Cardinal::H),
            "V" | "v" => Ok(Cardinal::V),
            "D" | "d" => Ok(Cardinal::D),
            "A" | "a" => Ok(Cardinal::A),
            "R" | "r" => Ok(Cardinal::R),
            "L" | "l" => Ok(Cardinal::L),
            other => Err(Error::InvalidInput(format!(
                "unknown state label {other:?}; expected one of H, V, D, A, R, L"
            ))),
        }
    }
}

/// Looks up one of the six cardinal polarization states by label.
pub fn named_state(label: &str) -> Result<PureState> {
    label.parse::<Cardinal>().map(Cardinal::state)
}

/// A Hermitian, unit-trace, positive-semidefinite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Validates `m` against the physical invariants (within
    /// [`PHYSICAL_TOL`]) and stores its Hermitian part.
    pub fn new(m: Mat2) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let skew = max_abs(&(m - m.adjoint()));
        if skew > PHYSICAL_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (deviation {skew:e})"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > PHYSICAL_TOL {
            return Err(Error::InvalidInput(format!("trace {tr} is not 1")));
        }
        let h = hermitize2(&m);
        let (vals, _) = hermitian_eigen2(&h);
        if vals[0] < -PHYSICAL_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix has negative eigenvalue {:e}",
                vals[0]
            )));
        }
        Ok(Self(h))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat2) -> Self {
        Self(hermitize2(&m))
    }

    pub fn maximally_mixed() -> Self {
        Self(identity2().scale(0.5))
    }

    /// `diag(p0, p1)`, renormalized. Both entries must be nonnegative.
    pub fn diagonal(p0: f64, p1: f64) -> Result<Self> {
        Self::new(Mat2::new(c(p0, 0.0), ZERO, ZERO, c(p1, 0.0)))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Population of `|0⟩` and `|1⟩`.
    pub fn populations(&self) -> [f64; 2] {
        [self.0[(0, 0)].re, self.0[(1, 1)].re]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigen2(&self.0).0
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Born-rule probability `tr(Π ρ)` for a Hermitian effect `Π`.
    pub fn expectation(&self, op: &Mat2) -> f64 {
        (op * self.0).trace().re
    }

    pub fn bloch(&self) -> BlochVector {
        bloch_from(self)
    }
}

/// Which detector outcome an operator describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorLabel {
    Click,
    NoClick,
    Other,
}

/// A 2×2 contraction describing one measurement outcome branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOperator {
    matrix: Mat2,
    label: OperatorLabel,
}

impl MeasurementOperator {
    pub fn new(matrix: Mat2, label: OperatorLabel) -> Result<Self> {
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite operator entry".into()));
        }
        let s = largest_singular_value(&matrix);
        if s > 1.0 + ARITHMETIC_TOL {
            return Err(Error::InvalidInput(format!(
                "operator norm {s} exceeds 1; not a physical measurement operator"
            )));
        }
        Ok(Self { matrix, label })
    }

    pub fn identity() -> Self {
        Self {
            matrix: identity2(),
            label: OperatorLabel::Other,
        }
    }

    /// `ℙ₀ = |0⟩⟨0|`.
    pub fn projector0() -> Self {
        Self {
            matrix: Mat2::new(ONE, ZERO, ZERO, ZERO),
            label: OperatorLabel::Other,
        }
    }

    /// `ℙ₁ = |1⟩⟨1|`.
    pub fn projector1() -> Self {
        Self {
            matrix: Mat2::new(ZERO, ZERO, ZERO, ONE),
            label: OperatorLabel::Other,
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    /// Applies the operator to a ket without renormalizing.
    pub fn apply_ket(&self, psi: &PureState) -> Ket {
        self.matrix * psi.ket()
    }

    /// The effect `M†M`.
    pub fn effect(&self) -> Mat2 {
        self.matrix.adjoint() * self.matrix
    }
}

/// Operator 2-norm via the closed-form spectrum of `M†M`.
pub fn largest_singular_value(m: &Mat2) -> f64 {
    let (vals, _) = hermitian_eigen2(&(m.adjoint() * m));
    vals[1].max(0.0).sqrt()
}

/// Real Bloch coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        BlochVector::new(self.x - other.x, self.y - other.y, self.z - other.z).norm()
    }

    /// `ρ = (𝟙 + xσx + yσy + zσz)/2`; rejects vectors outside the ball.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        if self.norm() > 1.0 + PHYSICAL_TOL {
            return Err(Error::InvalidInput(format!(
                "Bloch vector {self} lies outside the unit ball"
            )));
        }
        Ok(DensityMatrix::from_matrix_unchecked(bloch_matrix(self)))
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

pub(crate) fn bloch_matrix(b: &BlochVector) -> Mat2 {
    (identity2() + sigma_x().scale(b.x) + sigma_y().scale(b.y) + sigma_z().scale(b.z)).scale(0.5)
}

pub fn bloch_from(rho: &DensityMatrix) -> BlochVector {
    BlochVector {
        x: rho.expectation(&sigma_x()),
        y: rho.expectation(&sigma_y()),
        z: rho.expectation(&sigma_z()),
    }
}

/// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
pub fn fidelity_pure(psi: &PureState, rho: &DensityMatrix) -> f64 {
    let k = psi.ket();
    let v = (k.adjoint() * rho.matrix() * k)[(0, 0)].re;
    v.clamp(0.0, 1.0)
}

/// Applies a measurement operator and renormalizes the branch.
///
/// Returns the post-measurement state `MρM†/tr(MρM†)` and the branch
/// probability `tr(MρM†)`.
pub fn apply_operator(m: &MeasurementOperator, rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    let out = m.matrix() * rho.matrix() * m.matrix().adjoint();
    let probability = out.trace().re;
    if probability <= BRANCH_EPS {
        return Err(Error::ImpossibleBranch { probability });
    }
    Ok((
        DensityMatrix::from_matrix_unchecked(out.unscale(probability)),
        probability,
    ))
}
