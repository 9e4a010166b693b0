//! Dense pure-state simulation: composition, unitaries on sub-registers,
//! projective measurements in arbitrary bases, partial trace, fidelity, and
//! operator reshaping.
//!
//! Qubits are labeled 1..=N with qubit 1 the most significant bit: the basis
//! ket |b₁b₂…b_N⟩ lives at amplitude index Σ bⱼ·2^(N−j). All operations are
//! pure functions; values are immutable after construction.

mod basis;
mod density;
mod state;
mod unitary;

pub use basis::MeasurementBasis;
pub use density::DensityMatrix;
pub use state::{random_state, spanning_states, BranchEnsemble, MeasuredBranch, PureState};
pub use unitary::Unitary;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("amplitude vector has {got} entries, expected {expected}")]
    AmplitudeCount { expected: usize, got: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("duplicate qubit {0} in index list")]
    DuplicateQubit(usize),
    #[error("empty qubit list")]
    EmptyQubitList,
    #[error("operator dimension {dim} does not match {qubits} qubits")]
    OperatorDimension { dim: usize, qubits: usize },
    #[error("basis arity {arity} does not match {qubits} measured qubits")]
    ArityMismatch { arity: usize, qubits: usize },
    #[error("register sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("row and column qubits must disjointly cover the register")]
    BadBipartition,
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace deviates from 1 by {0:.3e}")]
    BadTrace(f64),
    #[error("negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("basis vectors are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("basis needs {expected} vectors, got {got}")]
    BasisSize { expected: usize, got: usize },
    #[error("unknown Pauli symbol '{0}'")]
    UnknownPauli(char),
}

/// Bit position (shift) of 1-based `qubit` in an `num_qubits` register.
#[inline]
pub(crate) fn bit_shift(num_qubits: usize, qubit: usize) -> usize {
    num_qubits - qubit
}

/// Scatter the bits of `sub` onto the listed qubits (first listed qubit gets
/// the most significant bit of `sub`), producing a full-register index mask.
pub(crate) fn scatter(num_qubits: usize, qubits: &[usize], sub: usize) -> usize {
    let q = qubits.len();
    qubits.iter().enumerate().fold(0usize, |acc, (i, &qb)| {
        let bit = (sub >> (q - 1 - i)) & 1;
        acc | (bit << bit_shift(num_qubits, qb))
    })
}

/// Validate a qubit index list: in range, no duplicates.
pub(crate) fn check_qubits(num_qubits: usize, qubits: &[usize]) -> Result<(), StateError> {
    for (i, &q) in qubits.iter().enumerate() {
        if q == 0 || q > num_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit: q,
                num_qubits,
            });
        }
        if qubits[..i].contains(&q) {
            return Err(StateError::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Ascending complement of `qubits` within 1..=num_qubits.
pub(crate) fn complement(num_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    (1..=num_qubits).filter(|q| !qubits.contains(q)).collect()
}
