//! Hermitian spectra, projection onto physical matrices, and the
//! Cholesky-factor parametrization used by the likelihood searches.

use nalgebra::{DMatrix, SMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::qubit::{c, hermitian_eigen2, max_abs, Mat2, C64, PHYSICAL_TOL};

pub type SquareMatrix<const N: usize> = SMatrix<C64, N, N>;

fn hermitize<const N: usize>(m: &SquareMatrix<N>) -> SquareMatrix<N> {
    (m + m.adjoint()).scale(0.5)
}

/// Ascending eigenvalues and matching eigenvectors (as columns).
///
/// 2×2 matrices use the closed form; larger ones use a symmetric
/// eigen-solver.
fn hermitian_spectrum<const N: usize>(m: &SquareMatrix<N>) -> (Vec<f64>, SquareMatrix<N>) {
    if N == 2 {
        let small = Mat2::from_fn(|i, j| m[(i, j)]);
        let (vals, vecs) = hermitian_eigen2(&small);
        let vectors = SquareMatrix::<N>::from_fn(|i, j| vecs[j][i]);
        return (vals.to_vec(), vectors);
    }
    let h = hermitize(m);
    let eig = SymmetricEigen::new(DMatrix::from_fn(N, N, |i, j| h[(i, j)]));
    let mut idx: Vec<usize> = (0..N).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = SquareMatrix::<N>::from_fn(|i, j| eig.eigenvectors[(i, idx[j])]);
    (vals, vectors)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue<const N: usize>(m: &SquareMatrix<N>) -> f64 {
    hermitian_spectrum(m).0[0]
}

/// Clips negative eigenvalues to zero and renormalizes the trace.
///
/// Physical inputs come back unchanged (up to rounding), which makes the
/// map idempotent.
pub fn project_to_physical<const N: usize>(m: &SquareMatrix<N>) -> Result<SquareMatrix<N>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let skew = max_abs(&(m - m.adjoint()));
    if skew > PHYSICAL_TOL {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (deviation {skew:e})"
        )));
    }
    let h = hermitize(m);
    let (vals, vecs) = hermitian_spectrum(&h);
    if vals[0] >= 0.0 {
        let tr = h.trace().re;
        if tr <= 0.0 {
            return Err(Error::Degenerate);
        }
        return Ok(h.unscale(tr));
    }
    let kept: f64 = vals.iter().filter(|&&v| v > 0.0).sum();
    if kept <= 0.0 {
        return Err(Error::Degenerate);
    }
    let mut out = SquareMatrix::<N>::zeros();
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            out += (col * col.adjoint()).scale(v / kept);
        }
    }
    Ok(hermitize(&out))
}

/// Lower-triangular `L` with `m = L·L†` for a Hermitian PSD `m`.
/// Pivots that vanish (rank deficiency) zero out their column.
pub fn cholesky_psd<const N: usize>(m: &SquareMatrix<N>) -> SquareMatrix<N> {
    let scale = (0..N)
        .map(|i| m[(i, i)].re.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut l = SquareMatrix::<N>::zeros();
    for j in 0..N {
        let d = m[(j, j)].re - (0..j).map(|k| l[(j, k)].norm_sqr()).sum::<f64>();
        if d <= 1e-14 * scale {
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = c(pivot, 0.0);
        for i in j + 1..N {
            let s: C64 = (0..j).map(|k| l[(i, k)] * l[(j, k)].conj()).sum();
            l[(i, j)] = (m[(i, j)] - s) / pivot;
        }
    }
    l
}

/// Flattens a lower-triangular factor: the `N` diagonal entries first, then
/// real and imaginary parts of the strictly-lower entries row by row.
pub fn factor_to_params<const N: usize>(l: &SquareMatrix<N>) -> Vec<f64> {
    let mut out = Vec::with_capacity(N * N);
    out.extend((0..N).map(|i| l[(i, i)].re));
    for i in 1..N {
        for j in 0..i {
            out.push(l[(i, j)].re);
            out.push(l[(i, j)].im);
        }
    }
    out
}

pub fn params_to_factor<const N: usize>(params: &[f64]) -> SquareMatrix<N> {
    debug_assert_eq!(params.len(), N * N);
    let mut l = SquareMatrix::<N>::zeros();
    for i in 0..N {
        l[(i, i)] = c(params[i], 0.0);
    }
    let mut k = N;
    for i in 1..N {
        for j in 0..i {
            l[(i, j)] = c(params[k], params[k + 1]);
            k += 2;
        }
    }
    l
}

/// `L·L†/tr(L·L†)`; `None` when the factor is zero or non-finite.
pub fn params_to_matrix<const N: usize>(params: &[f64]) -> Option<SquareMatrix<N>> {
    let l = params_to_factor::<N>(params);
    let m = l * l.adjoint();
    let tr = m.trace().re;
    (tr.is_finite() && tr > 0.0).then(|| hermitize(&m.unscale(tr)))
}

pub fn matrix_to_params<const N: usize>(m: &SquareMatrix<N>) -> Vec<f64> {
    factor_to_params(&cholesky_psd(m))
}
