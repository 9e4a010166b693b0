use nalgebra::DMatrix;
use num_complex::Complex64;

use super::density::max_entry_norm;
use super::StateError;
use crate::tol;

/// A unitary matrix (U†U = I within 1e-10) of power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    mat: DMatrix<Complex64>,
}

impl Unitary {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self, StateError> {
        if mat.nrows() != mat.ncols() {
            return Err(StateError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if !mat.nrows().is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(mat.nrows()));
        }
        let dev = max_entry_norm(
            &(mat.adjoint() * &mat - DMatrix::<Complex64>::identity(mat.nrows(), mat.ncols())),
        );
        if dev > tol::MATRIX {
            return Err(StateError::NotUnitary(dev));
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim.is_power_of_two());
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            mat: DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::ZERO,
                    Complex64::ONE,
                    Complex64::ONE,
                    Complex64::ZERO,
                ],
            ),
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            mat: DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::ZERO,
                    -Complex64::i(),
                    Complex64::i(),
                    Complex64::ZERO,
                ],
            ),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            mat: DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::ONE,
                    Complex64::ZERO,
                    Complex64::ZERO,
                    -Complex64::ONE,
                ],
            ),
        }
    }

    pub fn hadamard() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            mat: DMatrix::from_row_slice(2, 2, &[r, r, r, -r]),
        }
    }

    /// Tensor product of single-qubit Paulis, e.g. "XZ" for σx⊗σz.
    pub fn pauli_string(symbols: &str) -> Result<Self, StateError> {
        let mut factors = Vec::new();
        for ch in symbols.chars() {
            factors.push(match ch {
                'I' => Self::identity(2),
                'X' => Self::pauli_x(),
                'Y' => Self::pauli_y(),
                'Z' => Self::pauli_z(),
                other => return Err(StateError::UnknownPauli(other)),
            });
        }
        let mut it = factors.into_iter();
        let first = it.next().ok_or(StateError::EmptyQubitList)?;
        Ok(it.fold(first, |acc, f| acc.tensor(&f)))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Crate-internal constructor for matrices unitary by construction.
    pub(crate) fn from_trusted(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    /// Maximum deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        max_entry_norm(
            &(self.mat.adjoint() * &self.mat
                - DMatrix::<Complex64>::identity(self.dim(), self.dim())),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paulis_are_unitary_and_square_to_identity() {
        for u in [
            Unitary::pauli_x(),
            Unitary::pauli_y(),
            Unitary::pauli_z(),
            Unitary::hadamard(),
        ] {
            assert!(u.unitarity_deviation() < 1e-15);
            let sq = u.matrix() * u.matrix();
            assert!(max_entry_norm(&(sq - DMatrix::<Complex64>::identity(2, 2))) < 1e-15);
        }
    }

    #[test]
    fn pauli_string_builds_tensor_products() {
        let xz = Unitary::pauli_string("XZ").unwrap();
        assert_eq!(xz.dim(), 4);
        assert_eq!(xz.matrix()[(0, 2)], Complex64::ONE);
        assert_eq!(xz.matrix()[(1, 3)], -Complex64::ONE);
        assert!(Unitary::pauli_string("Q").is_err());
    }

    #[test]
    fn rejects_non_unitary() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::ONE,
                Complex64::ONE,
                Complex64::ZERO,
                Complex64::ONE,
            ],
        );
        assert!(matches!(Unitary::new(m), Err(StateError::NotUnitary(_))));
    }
}
