//! JSON encoding of density and process matrices as row-major nested
//! arrays of `[re, im]` pairs.

use nalgebra::{Dim, Matrix, RawStorage};
use serde::ser::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qubit::{c, DensityMatrix, Mat2, C64};
use crate::tomography::process::{ChiMatrix, Mat4};

pub fn matrix_rows<R: Dim, Cc: Dim, S: RawStorage<C64, R, Cc>>(m: &Matrix<C64, R, Cc, S>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn square_from_json(text: &str, n: usize) -> Result<Vec<C64>> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("expected a {n}×{n} matrix")));
    }
    Ok(rows.into_iter().flatten().map(|[re, im]| c(re, im)).collect())
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_rows(self.matrix()).serialize(s)
    }
}

impl Serialize for ChiMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_rows(self.matrix()).serialize(s)
    }
}

impl DensityMatrix {
    /// Parses and validates a 2×2 density matrix.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v = square_from_json(text, 2)?;
        DensityMatrix::new(Mat2::from_row_slice(&v))
    }
}

impl ChiMatrix {
    /// Parses and validates a 4×4 process matrix.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v = square_from_json(text, 4)?;
        ChiMatrix::new(Mat4::from_row_slice(&v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::Cardinal;

    #[test]
    fn density_json_layout() {
        let rho = Cardinal::L.state().density();
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.starts_with("[[[0.5"));
        // Row 0, column 1 holds ⟨H|ρ|V⟩ = -i/2 for |L⟩.
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).unwrap();
        assert!((rows[0][1][1] + 0.5).abs() < 1e-15);
        let back = DensityMatrix::from_json_str(&text).unwrap();
        assert!(crate::qubit::max_abs(&(back.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn chi_json_roundtrip() {
        let chi = ChiMatrix::identity_channel();
        let text = serde_json::to_string(&chi).unwrap();
        assert_eq!(ChiMatrix::from_json_str(&text).unwrap(), chi);
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(DensityMatrix::from_json_str("[[[1,0]]]").is_err());
        assert!(DensityMatrix::from_json_str("[[[1,0],[0,0]],[[0,0],[1,0]]]").is_err());
        assert!(DensityMatrix::from_json_str("nope").is_err());
        assert!(ChiMatrix::from_json_str("[[[1,0],[0,0]],[[0,0],[0,0]]]").is_err());
    }
}
