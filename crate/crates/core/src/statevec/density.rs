use nalgebra::DMatrix;
use num_complex::Complex64;

use super::StateError;
use crate::tol;

/// A density matrix: Hermitian, trace 1, positive semidefinite (all to
/// within 1e-10), with power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validate and wrap a matrix.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self, StateError> {
        if mat.nrows() != mat.ncols() {
            return Err(StateError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let dim = mat.nrows();
        if !dim.is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(dim));
        }
        let herm_dev = max_entry_norm(&(&mat - mat.adjoint()));
        if herm_dev > tol::MATRIX {
            return Err(StateError::NotHermitian(herm_dev));
        }
        let trace = mat.trace();
        let trace_dev = (trace - Complex64::ONE).norm();
        if trace_dev > tol::MATRIX {
            return Err(StateError::BadTrace(trace_dev));
        }
        let out = Self { mat };
        if let Some(&min) = out.eigenvalues().first().filter(|&&e| e < -tol::MATRIX) {
            return Err(StateError::NegativeEigenvalue(min));
        }
        Ok(out)
    }

    /// For matrices valid by construction (pure-state projectors, convex
    /// mixtures of validated matrices).
    pub(crate) fn from_trusted(mat: DMatrix<Complex64>) -> Self {
        debug_assert!(mat.is_square());
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim.is_power_of_two(), "dimension must be a power of two");
        Self {
            mat: DMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Eigenvalues in ascending order (real: the matrix is Hermitian).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// Number of eigenvalues strictly above `threshold`.
    pub fn rank_at(&self, threshold: f64) -> usize {
        self.eigenvalues()
            .iter()
            .filter(|&&e| e > threshold)
            .count()
    }

    /// Trace distance ½‖ρ−σ‖₁.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let diff = &self.mat - &other.mat;
        0.5 * hermitian_eigenvalues(&diff)
            .iter()
            .map(|e| e.abs())
            .sum::<f64>()
    }

    /// Convex combination Σ wᵢρᵢ; weights are not re-normalized.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Option<Self> {
        let dim = parts.first()?.1.dim();
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, rho) in parts {
            acc += rho.matrix().scale(*w);
        }
        Some(Self { mat: acc })
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(mat: &DMatrix<Complex64>) -> Vec<f64> {
    if mat.nrows() == 1 {
        return vec![mat[(0, 0)].re];
    }
    let mut eigs: Vec<f64> = mat
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    eigs
}

/// Largest entry magnitude (zero for empty matrices).
pub(crate) fn max_entry_norm(mat: &DMatrix<Complex64>) -> f64 {
    mat.iter().map(|e| e.norm()).fold(0.0, f64::max)
}
