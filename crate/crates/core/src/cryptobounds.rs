//! The quantum-encryption side of the dealer bound: mixtures of unitaries,
//! the completely depolarizing condition T(|ψ⟩) = I/D, and the Choi-rank
//! count of independent terms.
//!
//! A channel T(ρ) = Σⱼ wⱼ UⱼρUⱼ† that hides every input state must send all
//! of them to I/D. Its Choi matrix then has rank D², so the key index j
//! spans at least D² values and the dealer of an n-qubit secret must
//! announce log₂(D²) = 2n classical bits. The necessity of P ≥ D² is
//! verified here as a property sweep (random under-sized mixtures fail
//! depolarization), not as a proof.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::statevec::{DensityMatrix, PureState, Unitary};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixtureError {
    #[error("mixture needs at least one unitary")]
    Empty,
    #[error("mixture has {unitaries} unitaries but {weights} weights")]
    WeightCount { unitaries: usize, weights: usize },
    #[error("unitary {index} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("state dimension {state} does not match mixture dimension {mixture}")]
    StateDimension { state: usize, mixture: usize },
}

/// A convex mixture Σⱼ wⱼ Uⱼ·Uⱼ† of same-dimension unitaries.
#[derive(Debug, Clone)]
pub struct UnitaryMixture {
    unitaries: Vec<Unitary>,
    weights: Vec<f64>,
}

impl UnitaryMixture {
    pub fn new(unitaries: Vec<Unitary>, weights: Vec<f64>) -> Result<Self, MixtureError> {
        if unitaries.is_empty() {
            return Err(MixtureError::Empty);
        }
        if unitaries.len() != weights.len() {
            return Err(MixtureError::WeightCount {
                unitaries: unitaries.len(),
                weights: weights.len(),
            });
        }
        let dim = unitaries[0].dim();
        for (index, u) in unitaries.iter().enumerate() {
            if u.dim() != dim {
                return Err(MixtureError::DimensionMismatch {
                    index,
                    expected: dim,
                    got: u.dim(),
                });
            }
        }
        if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(MixtureError::NegativeWeight(w));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol::NORM {
            return Err(MixtureError::WeightSum(sum));
        }
        Ok(Self { unitaries, weights })
    }

    /// Equal weights 1/P.
    pub fn uniform(unitaries: Vec<Unitary>) -> Result<Self, MixtureError> {
        let p = unitaries.len();
        if p == 0 {
            return Err(MixtureError::Empty);
        }
        let weights = vec![1.0 / p as f64; p];
        Self::new(unitaries, weights)
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    pub fn num_terms(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[Unitary] {
        &self.unitaries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// All 4^n tensor products of {I, σx, σy, σz}, ordered as base-4 digits
/// (most significant digit = first qubit, I < X < Y < Z).
pub fn pauli_strings(num_qubits: usize) -> Vec<Unitary> {
    assert!(num_qubits >= 1);
    let singles = [
        Unitary::identity(2),
        Unitary::pauli_x(),
        Unitary::pauli_y(),
        Unitary::pauli_z(),
    ];
    let mut out = Vec::with_capacity(4usize.pow(num_qubits as u32));
    for code in 0..4usize.pow(num_qubits as u32) {
        let mut digits = Vec::with_capacity(num_qubits);
        let mut rem = code;
        for _ in 0..num_qubits {
            digits.push(rem % 4);
            rem /= 4;
        }
        digits.reverse();
        let mut u = singles[digits[0]].clone();
        for &d in &digits[1..] {
            u = u.tensor(&singles[d]);
        }
        out.push(u);
    }
    out
}

/// Σⱼ wⱼ Uⱼ|ψ⟩⟨ψ|Uⱼ†.
pub fn mixture_output(
    mixture: &UnitaryMixture,
    psi: &PureState,
) -> Result<DensityMatrix, MixtureError> {
    if psi.dim() != mixture.dim() {
        return Err(MixtureError::StateDimension {
            state: psi.dim(),
            mixture: mixture.dim(),
        });
    }
    let v = DVector::from_column_slice(psi.amplitudes());
    let mut acc = DMatrix::<Complex64>::zeros(mixture.dim(), mixture.dim());
    for (u, w) in mixture.unitaries.iter().zip(&mixture.weights) {
        let uv = u.matrix() * &v;
        acc += (&uv * uv.adjoint()).scale(*w);
    }
    Ok(DensityMatrix::from_trusted(acc))
}

/// (T ⊗ id) applied to the maximally entangled state |Φ+⟩⟨Φ+| on D·D:
/// Σⱼ wⱼ |uⱼ⟩⟨uⱼ| with |uⱼ⟩ = (Uⱼ ⊗ I)|Φ+⟩. Trace 1; rank counts the
/// independent terms of the mixture.
pub fn choi_matrix(mixture: &UnitaryMixture) -> DensityMatrix {
    let d = mixture.dim();
    let scale = 1.0 / (d as f64).sqrt();
    let mut acc = DMatrix::<Complex64>::zeros(d * d, d * d);
    for (u, w) in mixture.unitaries.iter().zip(&mixture.weights) {
        let mut vec = DVector::<Complex64>::zeros(d * d);
        for row in 0..d {
            for col in 0..d {
                vec[row * d + col] = u.matrix()[(row, col)] * scale;
            }
        }
        acc += (&vec * vec.adjoint()).scale(*w);
    }
    DensityMatrix::from_trusted(acc)
}

/// Audit of a mixture as a quantum one-time pad.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EncryptionAudit {
    /// Does the mixture send a spanning probe set of D² states to I/D?
    pub depolarizing: bool,
    /// Rank of the Choi matrix at the 1e-9 eigenvalue threshold.
    pub choi_rank: usize,
    /// log₂(choi_rank): classical bits the key must carry.
    pub min_bits: f64,
}

/// Probe the mixture on the spanning set {|i⟩} ∪ {(|i⟩+|j⟩)/√2} ∪
/// {(|i⟩+i|j⟩)/√2} (exactly D² states) and report the Choi rank.
pub fn encryption_audit(mixture: &UnitaryMixture) -> EncryptionAudit {
    let d = mixture.dim();
    let target = DensityMatrix::maximally_mixed(d);
    let mut depolarizing = true;
    for probe in spanning_probes(d) {
        let out = mixture_output(mixture, &probe).expect("probe dimension matches");
        if out.trace_distance(&target) > tol::SIGNALING {
            depolarizing = false;
            break;
        }
    }
    let choi_rank = choi_matrix(mixture).rank_at(tol::RANK_EIGENVALUE);
    EncryptionAudit {
        depolarizing,
        choi_rank,
        min_bits: (choi_rank as f64).log2(),
    }
}

/// D² pure states whose projectors span the Hermitian operators on C^D.
pub fn spanning_probes(dim: usize) -> Vec<PureState> {
    let num_qubits = dim.trailing_zeros() as usize;
    assert_eq!(1 << num_qubits, dim, "dimension must be a power of two");
    crate::statevec::spanning_states(num_qubits)
}

/// Haar-like random unitary: QR of a Ginibre matrix with the R diagonal
/// phases folded into Q.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Unitary {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r_diag: Vec<Complex64> = (0..dim).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (col, d) in r_diag.iter().enumerate() {
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::ONE
        };
        for row in 0..dim {
            q[(row, col)] *= phase;
        }
    }
    Unitary::new(q).expect("QR factor is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_strings_counts_and_unitarity() {
        assert_eq!(pauli_strings(1).len(), 4);
        assert_eq!(pauli_strings(2).len(), 16);
        for u in pauli_strings(2) {
            assert!(u.unitarity_deviation() < 1e-12);
        }
        // ordering: code 6 = (1,2) = X⊗Y
        let xy = Unitary::pauli_x().tensor(&Unitary::pauli_y());
        assert_eq!(pauli_strings(2)[6], xy);
    }

    #[test]
    fn uniform_pauli_mixture_depolarizes_random_states() {
        let mixture = UnitaryMixture::uniform(pauli_strings(1)).unwrap();
        let target = DensityMatrix::maximally_mixed(2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let psi = crate::statevec::random_state(1, &mut rng);
            let out = mixture_output(&mixture, &psi).unwrap();
            assert!(out.trace_distance(&target) < 1e-10);
        }
    }

    #[test]
    fn single_unitary_mixture_is_conjugation() {
        let mixture = UnitaryMixture::uniform(vec![Unitary::pauli_x()]).unwrap();
        let psi = PureState::basis_state(1, 0);
        let out = mixture_output(&mixture, &psi).unwrap();
        let expect = PureState::basis_state(1, 1).density();
        assert!(out.trace_distance(&expect) < 1e-12);
    }

    #[test]
    fn two_element_mixture_leaks_its_fixed_states() {
        // {I, σx}/2 leaves the σx eigenstate |+⟩ untouched: P = 2 < 4 fails.
        let mixture =
            UnitaryMixture::uniform(vec![Unitary::identity(2), Unitary::pauli_x()]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(1, vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)]).unwrap();
        let out = mixture_output(&mixture, &plus).unwrap();
        assert!(out.trace_distance(&plus.density()) < 1e-12);
        assert!(out.trace_distance(&DensityMatrix::maximally_mixed(2)) > 0.4);
    }

    #[test]
    fn choi_of_identity_channel_is_rank_one() {
        let mixture = UnitaryMixture::uniform(vec![Unitary::identity(2)]).unwrap();
        let choi = choi_matrix(&mixture);
        assert_eq!(choi.dim(), 4);
        assert_eq!(choi.rank_at(tol::RANK_EIGENVALUE), 1);
        assert!((choi.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choi_of_uniform_pauli_mixture_is_maximally_mixed() {
        let choi = choi_matrix(&UnitaryMixture::uniform(pauli_strings(1)).unwrap());
        assert!(choi.trace_distance(&DensityMatrix::maximally_mixed(4)) < 1e-12);
        assert_eq!(choi.rank_at(tol::RANK_EIGENVALUE), 4);
    }

    #[test]
    fn audit_of_pauli_mixtures() {
        let one = encryption_audit(&UnitaryMixture::uniform(pauli_strings(1)).unwrap());
        assert!(one.depolarizing);
        assert_eq!(one.choi_rank, 4);
        assert!((one.min_bits - 2.0).abs() < 1e-12);

        let two = encryption_audit(&UnitaryMixture::uniform(pauli_strings(2)).unwrap());
        assert!(two.depolarizing);
        assert_eq!(two.choi_rank, 16);
        assert!((two.min_bits - 4.0).abs() < 1e-12);
    }

    #[test]
    fn undersized_mixtures_never_depolarize() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let us = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
            let audit = encryption_audit(&UnitaryMixture::uniform(us).unwrap());
            assert!(!audit.depolarizing);
            assert!(audit.choi_rank <= 3);
        }
        let single = UnitaryMixture::uniform(vec![Unitary::identity(2)]).unwrap();
        assert!(!encryption_audit(&single).depolarizing);
    }

    #[test]
    fn depolarizing_implies_full_choi_rank_across_random_sweep() {
        for dim_qubits in 1..=2usize {
            let d = 1usize << dim_qubits;
            let mut rng = ChaCha8Rng::seed_from_u64(7 + dim_qubits as u64);
            for trial in 0..500 {
                let p = 1 + (trial % 5);
                let us: Vec<Unitary> = (0..p).map(|_| random_unitary(d, &mut rng)).collect();
                let mixture = UnitaryMixture::uniform(us).unwrap();
                let audit = encryption_audit(&mixture);
                assert!(audit.choi_rank <= p, "Choi is a sum of {p} rank-1 terms");
                if audit.depolarizing {
                    assert_eq!(audit.choi_rank, d * d);
                }
                let out = mixture_output(&mixture, &spanning_probes(d)[0]).unwrap();
                assert!((out.trace().re - 1.0).abs() < 1e-10);
                assert!(out.eigenvalues().iter().all(|&e| e >= -1e-10));
            }
        }
    }

    #[test]
    fn mixture_validation() {
        assert!(matches!(
            UnitaryMixture::uniform(vec![]),
            Err(MixtureError::Empty)
        ));
        assert!(matches!(
            UnitaryMixture::new(vec![Unitary::identity(2)], vec![0.9]),
            Err(MixtureError::WeightSum(_))
        ));
        assert!(matches!(
            UnitaryMixture::new(
                vec![Unitary::identity(2), Unitary::identity(4)],
                vec![0.5, 0.5]
            ),
            Err(MixtureError::DimensionMismatch { .. })
        ));
        let m = UnitaryMixture::uniform(vec![Unitary::identity(2)]).unwrap();
        assert!(matches!(
            mixture_output(&m, &PureState::basis_state(2, 0)),
            Err(MixtureError::StateDimension { .. })
        ));
    }
}
