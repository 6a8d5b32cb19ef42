//! Process tomography in the Pauli basis.
//!
//! A channel is written `E(ρ) = Σ_mn χ_mn σ_m ρ σ_n` with `σ = (I, X, Y, Z)`.
//! With column-stacked vectorization `vec(AXB) = (Bᵀ ⊗ A) vec(X)`, so the
//! superoperator is `S = Σ_mn χ_mn (σ̄_n ⊗ σ_m)`. Those sixteen matrices are
//! orthogonal with norm² 4, which gives `χ_mn = tr((σ̄_n ⊗ σ_m)† S)/4`.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::qubit::{c, max_abs, pauli_basis, DensityMatrix, Mat2, PureState, C64, PHYSICAL_TOL};
use crate::tomography::physical::{matrix_to_params, min_eigenvalue, params_to_matrix, project_to_physical};

pub type Mat4 = Matrix4<C64>;

/// Pauli labels in basis order.
pub const PAULI_LABELS: [&str; 4] = ["I", "X", "Y", "Z"];

const CHI_TRACE_TOL: f64 = 1e-8;

/// Hermitian, PSD, unit-trace process matrix in the (I, X, Y, Z) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiMatrix(Mat4);

impl ChiMatrix {
    pub fn new(m: Mat4) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite χ entry".into()));
        }
        let skew = max_abs(&(m - m.adjoint()));
        if skew > PHYSICAL_TOL {
            return Err(Error::InvalidInput(format!("χ is not Hermitian (deviation {skew:e})")));
        }
        let tr = m.trace();
        if (tr - c(1.0, 0.0)).norm() > CHI_TRACE_TOL {
            return Err(Error::InvalidInput(format!("χ trace {tr} is not 1")));
        }
        let h = (m + m.adjoint()).scale(0.5);
        let low = min_eigenvalue(&h);
        if low < -PHYSICAL_TOL {
            return Err(Error::InvalidInput(format!("χ has negative eigenvalue {low:e}")));
        }
        Ok(Self(h))
    }

    fn from_matrix_unchecked(m: Mat4) -> Self {
        Self((m + m.adjoint()).scale(0.5))
    }

    /// χ of the identity channel: a single 1 at (I, I).
    pub fn identity_channel() -> Self {
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(1.0, 0.0);
        Self(m)
    }

    /// χ of a channel given by Kraus operators, normalized to unit trace.
    pub fn from_kraus(ops: &[Mat2]) -> Result<Self> {
        let basis = pauli_basis();
        let mut m = Mat4::zeros();
        for k in ops {
            let coeffs = Vector4::from_fn(|i, _| (basis[i] * k).trace() * 0.5);
            m += coeffs * coeffs.adjoint();
        }
        let tr = m.trace().re;
        if tr <= 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(Self::from_matrix_unchecked(m.unscale(tr)))
    }

    pub fn from_unitary(u: &Mat2) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// `Σ_mn χ_mn σ_m ρ σ_n` (not renormalized).
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        apply_chi(&self.0, rho)
    }
}

fn apply_chi(chi: &Mat4, rho: &Mat2) -> Mat2 {
    let basis = pauli_basis();
    let mut out = Mat2::zeros();
    for m in 0..4 {
        let left = basis[m] * rho;
        for n in 0..4 {
            let w = chi[(m, n)];
            if w != c(0.0, 0.0) {
                out += left * basis[n] * w;
            }
        }
    }
    out
}

fn vectorize(m: &Mat2) -> Vector4<C64> {
    Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

/// Inverts the superoperator into χ coefficients.
fn superoperator_to_chi(s: &Mat4) -> Mat4 {
    let basis = pauli_basis();
    Mat4::from_fn(|m, n| {
        let b = basis[n].map(|z| z.conj()).kronecker(&basis[m]);
        (b.adjoint() * s).trace() * 0.25
    })
}

/// Sum of squared Frobenius residuals between renormalized channel outputs
/// and the observed output states.
fn residual(chi: &Mat4, inputs: &[Mat2; 4], outputs: &[Mat2; 4]) -> f64 {
    inputs
        .iter()
        .zip(outputs)
        .map(|(rin, rout)| {
            let e = apply_chi(chi, rin);
            let tr = e.trace().re;
            if tr.is_nan() || tr <= 0.0 {
                return f64::INFINITY;
            }
            (e.unscale(tr) - rout).iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum()
}

/// Process matrix from four probe inputs and their (renormalized) outputs.
///
/// Linear inversion of the superoperator gives a first estimate that is
/// projected onto the physical set; a simplex search over the Cholesky
/// factor of χ then minimizes the squared output residuals, starting from
/// that estimate so the fit never gets worse.
pub fn qpt_chi(probes: &[PureState; 4], outputs: &[DensityMatrix; 4]) -> Result<ChiMatrix> {
    qpt_chi_with(probes, outputs, &NelderMead::default())
}

pub fn qpt_chi_with(
    probes: &[PureState; 4],
    outputs: &[DensityMatrix; 4],
    optimizer: &NelderMead,
) -> Result<ChiMatrix> {
    let inputs: [Mat2; 4] = std::array::from_fn(|j| *probes[j].density().matrix());
    let outs: [Mat2; 4] = std::array::from_fn(|j| *outputs[j].matrix());
    let input_cols = Mat4::from_fn(|i, j| vectorize(&inputs[j])[i]);
    let output_cols = Mat4::from_fn(|i, j| vectorize(&outs[j])[i]);
    if input_cols.determinant().norm() < 1e-10 {
        return Err(Error::InvalidInput(
            "probe states are linearly dependent; need four spanning inputs".into(),
        ));
    }
    let inverse = input_cols
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("probe matrix is singular".into()))?;
    let superop = output_cols * inverse;
    let raw = superoperator_to_chi(&superop);
    let raw = (raw + raw.adjoint()).scale(0.5);
    let start = project_to_physical(&raw)?;
    if residual(&start, &inputs, &outs) < 1e-24 {
        return Ok(ChiMatrix::from_matrix_unchecked(start));
    }
    let found = optimizer.minimize(
        |x| match params_to_matrix::<4>(x) {
            Some(chi) => residual(&chi, &inputs, &outs),
            None => f64::INFINITY,
        },
        &matrix_to_params(&start),
    );
    let chi = params_to_matrix::<4>(&found.x).unwrap_or(start);
    Ok(ChiMatrix::from_matrix_unchecked(chi))
}

/// `F = Re tr(χ_exp · χ_ideal)`.
pub fn process_fidelity(chi_exp: &ChiMatrix, chi_ideal: &ChiMatrix) -> f64 {
    (chi_exp.matrix() * chi_ideal.matrix()).trace().re
}
