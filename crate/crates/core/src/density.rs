//! Validated density matrices over `N` two-level systems.
//!
//! Basis order is detector-major: detector 0 is the most significant bit and
//! `down = 0 < up = 1`, so index 1 of a three-qubit matrix is `|↓↓↑⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-9;
pub const TRACE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    entries: CMatrix,
}

impl DensityMatrix {
    /// Accepts `m` only if it is Hermitian, PSD and has unit trace within the module tolerances.
    pub fn try_new(m: CMatrix) -> Result<Self> {
        let num_qubits = qubits_for_dim(m.nrows())?;
        if m.ncols() != m.nrows() {
            return Err(Error::InvalidDensityMatrix(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let rho = Self { num_qubits, entries: m };
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Skips validation; for matrices that are valid by construction.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        let num_qubits = m.nrows().trailing_zeros() as usize;
        Self { num_qubits, entries: m }
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("state vector norm² is {norm}, expected 1")));
        }
        let m = CMatrix::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj());
        Self::try_new(m)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let m = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { num_qubits, entries: m }
    }

    /// Convex combination `Σ w_k ρ_k`; weights are normalized first.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::invalid("empty mixture"));
        };
        let dim = first.dim();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if total <= 0.0 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::invalid("mixture weights must be nonnegative with positive sum"));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rho.dim(),
                });
            }
            m += &rho.entries * Complex64::new(w / total, 0.0);
        }
        Self::try_new(m)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.entries).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.entries).0
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.entries * &self.entries)).re
    }

    /// Sum of `|ρ_ij|` over `i ≠ j`.
    pub fn offdiag_norm(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.entries[(i, j)].norm();
                }
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `½ ‖ρ − σ‖₁`
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.entries - &other.entries;
        let (values, _) = linalg::hermitian_eigen(&diff);
        Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = linalg::max_hermitian_deviation(&self.entries);
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = linalg::trace(&self.entries);
        if (tr - ONE).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}, expected 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        Ok(())
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidDensityMatrix(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Projector onto a computational basis state.
pub fn basis_projector(num_qubits: usize, index: usize) -> DensityMatrix {
    let dim = 1usize << num_qubits;
    let mut m = CMatrix::from_element(dim, dim, ZERO);
    m[(index, index)] = ONE;
    DensityMatrix::from_matrix_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        let mut m = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::try_new(m.clone()).is_err());
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::try_new(m.clone()).is_ok());
        m[(0, 1)] = Complex64::new(0.9, 0.0);
        m[(1, 0)] = Complex64::new(0.9, 0.0);
        let err = DensityMatrix::try_new(m).unwrap_err();
        assert!(err.to_string().contains("semidefinite"));
        assert!(DensityMatrix::try_new(CMatrix::identity(3, 3) / Complex64::new(3.0, 0.0)).is_err());
        assert!(DensityMatrix::try_new(CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn mixed_state_quantities() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert_eq!(rho.dim(), 8);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 0.125).abs() < 1e-15);
        assert_eq!(rho.offdiag_norm(), 0.0);
        let p = basis_projector(3, 0);
        assert!((rho.trace_distance(&p).unwrap() - 0.875).abs() < 1e-12);
    }
}
