use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{
    bit_shift, check_qubits, complement, scatter, DensityMatrix, MeasurementBasis, StateError,
    Unitary,
};
use crate::tol;

/// A normalized complex amplitude vector over a labeled qubit register.
///
/// Qubit 1 is the most significant bit of the amplitude index. A zero-qubit
/// register is the complex unit scalar; it appears when every qubit of a
/// state has been measured away.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

/// One outcome of a projective measurement.
#[derive(Debug, Clone)]
pub struct MeasuredBranch {
    /// Index of the basis vector that fired.
    pub outcome: usize,
    pub probability: f64,
    /// Renormalized residual on the unmeasured qubits.
    pub state: PureState,
}

/// All outcomes of one projective measurement, ordered by outcome index.
///
/// Branches below the zero-probability cutoff are omitted from `branches`
/// and recorded in `dropped`. `kept_qubits` lists the original labels of the
/// surviving register in ascending order; position i of a residual register
/// corresponds to original qubit `kept_qubits[i]`.
#[derive(Debug, Clone)]
pub struct BranchEnsemble {
    pub branches: Vec<MeasuredBranch>,
    pub dropped: Vec<usize>,
    pub kept_qubits: Vec<usize>,
}

impl BranchEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

impl PureState {
    /// Build a state from raw amplitudes; the norm must be 1 within 1e-12.
    pub fn new(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self, StateError> {
        let dim = 1usize << num_qubits;
        if amps.len() != dim {
            return Err(StateError::AmplitudeCount {
                expected: dim,
                got: amps.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let dev = (norm_sqr - 1.0).abs();
        if dev > tol::NORM {
            return Err(StateError::NotNormalized(dev));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Crate-internal constructor for values normalized by construction.
    pub(crate) fn from_normalized(num_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        Self { num_qubits, amps }
    }

    /// The computational basis state |index⟩.
    pub fn basis_state(num_qubits: usize, index: usize) -> Self {
        assert!(index < (1 << num_qubits), "basis index out of range");
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[index] = Complex64::ONE;
        Self { num_qubits, amps }
    }

    /// A single qubit α|0⟩ + β|1⟩.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self, StateError> {
        Self::new(1, vec![alpha, beta])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<Complex64, StateError> {
        if self.num_qubits != other.num_qubits {
            return Err(StateError::SizeMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|², symmetric, in \[0,1\].
    pub fn fidelity(&self, other: &Self) -> Result<f64, StateError> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Kronecker product; `self`'s qubits become the leading (most
    /// significant) labels of the combined register.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }

    /// Apply `u` to the listed qubits (in the given order), identity elsewhere.
    pub fn apply_on(&self, qubits: &[usize], u: &Unitary) -> Result<Self, StateError> {
        if qubits.is_empty() {
            return Err(StateError::EmptyQubitList);
        }
        check_qubits(self.num_qubits, qubits)?;
        let sub_dim = 1usize << qubits.len();
        if u.dim() != sub_dim {
            return Err(StateError::OperatorDimension {
                dim: u.dim(),
                qubits: qubits.len(),
            });
        }
        let rest = complement(self.num_qubits, qubits);
        let sub_indices: Vec<usize> = (0..sub_dim)
            .map(|x| scatter(self.num_qubits, qubits, x))
            .collect();
        let mut out = self.amps.clone();
        for y in 0..(1usize << rest.len()) {
            let offset = scatter(self.num_qubits, &rest, y);
            let col = DVector::from_fn(sub_dim, |x, _| self.amps[offset | sub_indices[x]]);
            let col = u.matrix() * col;
            for x in 0..sub_dim {
                out[offset | sub_indices[x]] = col[x];
            }
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            amps: out,
        })
    }

    /// Projective measurement of the listed qubits (in the given order) in
    /// `basis`, with the default zero-probability cutoff.
    ///
    /// Branch j carries probability ‖⟨φⱼ|ψ⟩‖² (inner product over the
    /// measured qubits) and the renormalized residual on the unmeasured
    /// qubits; measured qubits are removed from the register.
    pub fn measure(
        &self,
        qubits: &[usize],
        basis: &MeasurementBasis,
    ) -> Result<BranchEnsemble, StateError> {
        self.measure_with(qubits, basis, tol::ZERO_PROB)
    }

    /// As [`measure`](Self::measure) with an explicit cutoff.
    pub fn measure_with(
        &self,
        qubits: &[usize],
        basis: &MeasurementBasis,
        zero_cutoff: f64,
    ) -> Result<BranchEnsemble, StateError> {
        if qubits.is_empty() {
            return Err(StateError::EmptyQubitList);
        }
        check_qubits(self.num_qubits, qubits)?;
        if basis.arity() != qubits.len() {
            return Err(StateError::ArityMismatch {
                arity: basis.arity(),
                qubits: qubits.len(),
            });
        }
        let rest = complement(self.num_qubits, qubits);
        let rest_dim = 1usize << rest.len();
        let sub_dim = 1usize << qubits.len();
        let sub_indices: Vec<usize> = (0..sub_dim)
            .map(|x| scatter(self.num_qubits, qubits, x))
            .collect();
        let rest_indices: Vec<usize> = (0..rest_dim)
            .map(|y| scatter(self.num_qubits, &rest, y))
            .collect();

        let mut branches = Vec::new();
        let mut dropped = Vec::new();
        for (j, phi) in basis.vectors().iter().enumerate() {
            let mut residual = vec![Complex64::ZERO; rest_dim];
            for (x, &base) in sub_indices.iter().enumerate() {
                let cx = phi[x].conj();
                if cx == Complex64::ZERO {
                    continue;
                }
                for (y, r) in residual.iter_mut().enumerate() {
                    *r += cx * self.amps[base | rest_indices[y]];
                }
            }
            let p: f64 = residual.iter().map(|a| a.norm_sqr()).sum();
            if p < zero_cutoff {
                dropped.push(j);
                continue;
            }
            let scale = 1.0 / p.sqrt();
            for r in &mut residual {
                *r *= scale;
            }
            branches.push(MeasuredBranch {
                outcome: j,
                probability: p,
                state: PureState {
                    num_qubits: rest.len(),
                    amps: residual,
                },
            });
        }
        Ok(BranchEnsemble {
            branches,
            dropped,
            kept_qubits: rest,
        })
    }

    /// Reduced density matrix on `keep` (treated as a set; rows and columns
    /// are ordered by ascending qubit label).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, StateError> {
        if keep.is_empty() {
            return Err(StateError::EmptyQubitList);
        }
        check_qubits(self.num_qubits, keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let env = complement(self.num_qubits, &keep);
        let keep_dim = 1usize << keep.len();
        let env_dim = 1usize << env.len();
        let keep_indices: Vec<usize> = (0..keep_dim)
            .map(|r| scatter(self.num_qubits, &keep, r))
            .collect();
        let env_indices: Vec<usize> = (0..env_dim)
            .map(|e| scatter(self.num_qubits, &env, e))
            .collect();
        let mut mat = DMatrix::<Complex64>::zeros(keep_dim, keep_dim);
        for r in 0..keep_dim {
            for c in 0..=r {
                let mut sum = Complex64::ZERO;
                for &e in &env_indices {
                    sum += self.amps[keep_indices[r] | e] * self.amps[keep_indices[c] | e].conj();
                }
                mat[(r, c)] = sum;
                if c != r {
                    mat[(c, r)] = sum.conj();
                }
            }
        }
        DensityMatrix::new(mat)
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let v = DVector::from_column_slice(&self.amps);
        DensityMatrix::from_trusted(&v * v.adjoint())
    }

    /// Reshape the state into a matrix M with M\[r\]\[c\] the amplitude of
    /// |r⟩ on `row_qubits` and |c⟩ on `col_qubits` (each in the given order).
    /// The two lists must disjointly cover the register.
    pub fn as_operator(
        &self,
        row_qubits: &[usize],
        col_qubits: &[usize],
    ) -> Result<DMatrix<Complex64>, StateError> {
        let all: Vec<usize> = row_qubits.iter().chain(col_qubits).copied().collect();
        check_qubits(self.num_qubits, &all).map_err(|e| match e {
            StateError::DuplicateQubit(_) => StateError::BadBipartition,
            other => other,
        })?;
        if all.len() != self.num_qubits {
            return Err(StateError::BadBipartition);
        }
        let rows = 1usize << row_qubits.len();
        let cols = 1usize << col_qubits.len();
        let mut m = DMatrix::<Complex64>::zeros(rows, cols);
        for r in 0..rows {
            let base = scatter(self.num_qubits, row_qubits, r);
            for c in 0..cols {
                m[(r, c)] = self.amps[base | scatter(self.num_qubits, col_qubits, c)];
            }
        }
        Ok(m)
    }

    /// Marginal probability of reading bit `value` on `qubit` in the
    /// computational basis.
    pub fn bit_probability(&self, qubit: usize, value: u8) -> Result<f64, StateError> {
        check_qubits(self.num_qubits, &[qubit])?;
        let shift = bit_shift(self.num_qubits, qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i >> shift) & 1) as u8 == value)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// A random state: complex entries uniform on a centered square, then
/// normalized. Deterministic for a seeded generator.
pub fn random_state(num_qubits: usize, rng: &mut impl rand::Rng) -> PureState {
    let dim = 1usize << num_qubits;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    PureState::from_normalized(num_qubits, amps)
}

/// 4^n pure states whose projectors span the Hermitian operators on the
/// n-qubit register: the basis states |x⟩ plus (|x⟩+|y⟩)/√2 and
/// (|x⟩+i|y⟩)/√2 for every x < y. Any linear statement checked on all of
/// them holds for every input state.
pub fn spanning_states(num_qubits: usize) -> Vec<PureState> {
    let dim = 1usize << num_qubits;
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut states = Vec::with_capacity(dim * dim);
    for x in 0..dim {
        states.push(PureState::basis_state(num_qubits, x));
    }
    for x in 0..dim {
        for y in (x + 1)..dim {
            let mut plus = vec![Complex64::ZERO; dim];
            plus[x] = r;
            plus[y] = r;
            states.push(PureState::from_normalized(num_qubits, plus));
            let mut phased = vec![Complex64::ZERO; dim];
            phased[x] = r;
            phased[y] = Complex64::new(0.0, r.re);
            states.push(PureState::from_normalized(num_qubits, phased));
        }
    }
    states
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tensor_basis_states() {
        // |0⟩ ⊗ |1⟩ = |01⟩, amplitude 1 at index 1
        let s = PureState::basis_state(1, 0).tensor(&PureState::basis_state(1, 1));
        assert_eq!(s.num_qubits(), 2);
        assert_eq!(s.amplitude(1), Complex64::ONE);
        assert_eq!(s.amplitude(0), Complex64::ZERO);
    }

    #[test]
    fn tensor_secret_with_ghz3() {
        // (α|0⟩+β|1⟩) ⊗ (|000⟩+|111⟩)/√2 puts α/√2 at |0000⟩,|0111⟩ and
        // β/√2 at |1000⟩,|1111⟩.
        let alpha = c(0.6, 0.0);
        let beta = c(0.0, 0.8);
        let secret = PureState::qubit(alpha, beta).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let ghz3 = PureState::new(
            3,
            vec![
                c(r, 0.0),
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::ZERO,
                Complex64::ZERO,
                c(r, 0.0),
            ],
        )
        .unwrap();
        let s = secret.tensor(&ghz3);
        assert!((s.amplitude(0) - alpha * r).norm() < 1e-15);
        assert!((s.amplitude(7) - alpha * r).norm() < 1e-15);
        assert!((s.amplitude(8) - beta * r).norm() < 1e-15);
        assert!((s.amplitude(15) - beta * r).norm() < 1e-15);
    }

    #[test]
    fn tensor_preserves_norm_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = random_state(2, &mut rng);
            let b = random_state(3, &mut rng);
            assert!((a.tensor(&b).norm_sqr() - 1.0).abs() < tol::NORM);
        }
    }

    #[test]
    fn apply_bit_flip_on_second_qubit() {
        let s = PureState::basis_state(2, 0)
            .apply_on(&[2], &Unitary::pauli_x())
            .unwrap();
        assert_eq!(s.amplitude(1), Complex64::ONE);
    }

    #[test]
    fn apply_hadamard_makes_plus() {
        let s = PureState::basis_state(1, 0)
            .apply_on(&[1], &Unitary::hadamard())
            .unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(0).re - r).abs() < 1e-15);
        assert!((s.amplitude(1).re - r).abs() < 1e-15);
    }

    #[test]
    fn pauli_corrections_invert() {
        // U† applied to U|ψ⟩ returns |ψ⟩ for every single-qubit Pauli.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let paulis = [
            Unitary::identity(2),
            Unitary::pauli_x(),
            Unitary::pauli_y(),
            Unitary::pauli_z(),
        ];
        for _ in 0..50 {
            let psi = random_state(3, &mut rng);
            for u in &paulis {
                let back = psi
                    .apply_on(&[2], u)
                    .unwrap()
                    .apply_on(&[2], &u.dagger())
                    .unwrap();
                assert!(psi.fidelity(&back).unwrap() > 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn apply_norm_preserved_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h2 = Unitary::hadamard().tensor(&Unitary::hadamard());
        for _ in 0..1000 {
            let s = random_state(4, &mut rng);
            let t = s.apply_on(&[3, 1], &h2).unwrap();
            assert!((t.norm_sqr() - 1.0).abs() < tol::NORM);
        }
    }

    #[test]
    fn apply_rejects_bad_indices() {
        let s = PureState::basis_state(2, 0);
        assert!(matches!(
            s.apply_on(&[3], &Unitary::pauli_x()),
            Err(StateError::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            s.apply_on(&[1], &Unitary::identity(4)),
            Err(StateError::OperatorDimension { .. })
        ));
    }

    #[test]
    fn measure_plus_in_computational_basis() {
        let s = PureState::basis_state(1, 0)
            .apply_on(&[1], &Unitary::hadamard())
            .unwrap();
        let ens = s
            .measure(&[1], &MeasurementBasis::computational(1))
            .unwrap();
        assert_eq!(ens.branches.len(), 2);
        for b in &ens.branches {
            assert!((b.probability - 0.5).abs() < 1e-12);
            assert_eq!(b.state.num_qubits(), 0);
        }
        assert!(ens.kept_qubits.is_empty());
    }

    #[test]
    fn measure_deterministic_on_basis_state() {
        let s = PureState::basis_state(1, 0);
        let ens = s
            .measure(&[1], &MeasurementBasis::computational(1))
            .unwrap();
        assert_eq!(ens.branches.len(), 1);
        assert_eq!(ens.branches[0].outcome, 0);
        assert!((ens.branches[0].probability - 1.0).abs() < 1e-12);
        assert_eq!(ens.dropped, vec![1]);
    }

    #[test]
    fn bell_measurement_of_secret_and_ghz_qubit() {
        // Bell measurement on (secret, A) of |ψ⟩⊗GHZ₃: four branches of
        // probability 1/4 with residuals (U_x ⊗ I)(α|00⟩+β|11⟩).
        let alpha = c(0.48, 0.36);
        let beta = c(0.64, -0.48);
        let secret = PureState::qubit(alpha, beta).unwrap();
        let ghz3 = {
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![Complex64::ZERO; 8];
            amps[0] = c(r, 0.0);
            amps[7] = c(r, 0.0);
            PureState::from_normalized(3, amps)
        };
        let s = secret.tensor(&ghz3);
        let ens = s.measure(&[1, 2], &MeasurementBasis::bell()).unwrap();
        assert_eq!(ens.branches.len(), 4);
        assert_eq!(ens.kept_qubits, vec![3, 4]);
        let expected: Vec<Vec<Complex64>> = vec![
            // Φ+: α|00⟩+β|11⟩ ; Φ−: α|00⟩−β|11⟩ ; Ψ+: β|00⟩+α|11⟩ ; Ψ−: −β|00⟩+α|11⟩
            vec![alpha, Complex64::ZERO, Complex64::ZERO, beta],
            vec![alpha, Complex64::ZERO, Complex64::ZERO, -beta],
            vec![beta, Complex64::ZERO, Complex64::ZERO, alpha],
            vec![-beta, Complex64::ZERO, Complex64::ZERO, alpha],
        ];
        for (b, exp) in ens.branches.iter().zip(&expected) {
            assert!((b.probability - 0.25).abs() < 1e-12);
            let want = PureState::new(2, exp.clone()).unwrap();
            assert!(b.state.fidelity(&want).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn measure_rejects_bad_arguments() {
        let s = PureState::basis_state(2, 0);
        assert!(matches!(
            s.measure(&[], &MeasurementBasis::computational(1)),
            Err(StateError::EmptyQubitList)
        ));
        assert!(matches!(
            s.measure(&[1], &MeasurementBasis::bell()),
            Err(StateError::ArityMismatch {
                arity: 2,
                qubits: 1
            })
        ));
        assert!(matches!(
            s.measure(&[1, 1], &MeasurementBasis::bell()),
            Err(StateError::DuplicateQubit(1))
        ));
    }

    #[test]
    fn measurement_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let bases = [
            MeasurementBasis::computational(2),
            MeasurementBasis::hadamard(2),
            MeasurementBasis::bell(),
            MeasurementBasis::ghz(2),
        ];
        for _ in 0..200 {
            let s = random_state(4, &mut rng);
            for basis in &bases {
                let ens = s.measure(&[2, 4], basis).unwrap();
                assert!((ens.total_probability() - 1.0).abs() < 1e-10);
            }
        }
    }

    /// Oracle: rebuild the pre-measurement state from the branch data.
    /// The coherent sum Σⱼ √pⱼ |φⱼ⟩⊗|postⱼ⟩ (each term embedded back at the
    /// original qubit positions) must reproduce the input vector, and the
    /// branch mixture must match the independently computed projector
    /// sandwich Σⱼ (Πⱼ⊗I)ρ(Πⱼ⊗I).
    #[test]
    fn measurement_decomposition_reconstructs_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let s = random_state(4, &mut rng);
            let qubits = [3, 1];
            let basis = MeasurementBasis::bell();
            let ens = s.measure_with(&qubits, &basis, 0.0).unwrap();

            let n = s.num_qubits();
            let mut rebuilt = vec![Complex64::ZERO; s.dim()];
            let mut sandwich = DMatrix::<Complex64>::zeros(s.dim(), s.dim());
            for b in &ens.branches {
                let phi = &basis.vectors()[b.outcome];
                let w = b.probability.sqrt();
                let mut embedded = vec![Complex64::ZERO; s.dim()];
                for (x, px) in phi.iter().enumerate() {
                    let base = scatter(n, &qubits, x);
                    for (y, ry) in b.state.amplitudes().iter().enumerate() {
                        embedded[base | scatter(n, &ens.kept_qubits, y)] = px * ry;
                    }
                }
                for (i, e) in embedded.iter().enumerate() {
                    rebuilt[i] += w * e;
                }
                let v = DVector::from_column_slice(&embedded);
                sandwich += (&v * v.adjoint()).scale(b.probability);
            }
            for (r, a) in rebuilt.iter().zip(s.amplitudes()) {
                assert!((r - a).norm() < 1e-9);
            }

            // independent projector route
            let rho = {
                let v = DVector::from_column_slice(s.amplitudes());
                &v * v.adjoint()
            };
            let mut expected = DMatrix::<Complex64>::zeros(s.dim(), s.dim());
            for phi in basis.vectors() {
                let mut proj = DMatrix::<Complex64>::zeros(s.dim(), s.dim());
                for (x, px) in phi.iter().enumerate() {
                    for (xp, pxp) in phi.iter().enumerate() {
                        let bx = scatter(n, &qubits, x);
                        let bxp = scatter(n, &qubits, xp);
                        for y in 0..(1usize << ens.kept_qubits.len()) {
                            let e = scatter(n, &ens.kept_qubits, y);
                            proj[(bx | e, bxp | e)] = px * pxp.conj();
                        }
                    }
                }
                expected += &proj * &rho * &proj;
            }
            assert!((&sandwich - &expected).norm() < 1e-9);
        }
    }

    #[test]
    fn partial_trace_of_entangled_pairs_is_maximally_mixed() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(
            2,
            vec![c(r, 0.0), Complex64::ZERO, Complex64::ZERO, c(r, 0.0)],
        )
        .unwrap();
        let rho = bell.partial_trace(&[1]).unwrap();
        assert!(rho.trace_distance(&DensityMatrix::maximally_mixed(2)) < 1e-12);

        let mut ghz = vec![Complex64::ZERO; 8];
        ghz[0] = c(r, 0.0);
        ghz[7] = c(r, 0.0);
        let ghz3 = PureState::from_normalized(3, ghz);
        let rho_b = ghz3.partial_trace(&[2]).unwrap();
        assert!(rho_b.trace_distance(&DensityMatrix::maximally_mixed(2)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = PureState::basis_state(2, 1); // |01⟩
        let rho = s.partial_trace(&[2]).unwrap();
        assert!((rho.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(rho.matrix()[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let s = PureState::basis_state(2, 0);
        assert!(matches!(
            s.partial_trace(&[]),
            Err(StateError::EmptyQubitList)
        ));
    }

    #[test]
    fn partial_trace_output_is_valid_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..100 {
            let s = random_state(5, &mut rng);
            let rho = s.partial_trace(&[2, 5]).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(rho.eigenvalues().iter().all(|&e| e >= -1e-10));
        }
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::basis_state(1, 0);
        let one = PureState::basis_state(1, 1);
        let plus = zero.apply_on(&[1], &Unitary::hadamard()).unwrap();
        assert!((zero.fidelity(&zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(zero.fidelity(&one).unwrap() < 1e-15);
        assert!((zero.fidelity(&plus).unwrap() - 0.5).abs() < 1e-12);
        assert!(zero.fidelity(&PureState::basis_state(2, 0)).is_err());
    }

    #[test]
    fn as_operator_of_bell_pair_is_identity_over_sqrt2() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(
            2,
            vec![c(r, 0.0), Complex64::ZERO, Complex64::ZERO, c(r, 0.0)],
        )
        .unwrap();
        let m = bell.as_operator(&[1], &[2]).unwrap();
        assert!((m[(0, 0)].re - r).abs() < 1e-15);
        assert!((m[(1, 1)].re - r).abs() < 1e-15);
        assert!(m[(0, 1)].norm() < 1e-15);
        assert!(m[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn as_operator_of_product_state_is_rank_one() {
        let m = PureState::basis_state(2, 1)
            .as_operator(&[1], &[2])
            .unwrap();
        // |01⟩ → e₀e₁ᵀ
        assert_eq!(m[(0, 1)], Complex64::ONE);
        assert_eq!(m[(0, 0)], Complex64::ZERO);
        assert_eq!(m[(1, 0)], Complex64::ZERO);
        assert_eq!(m[(1, 1)], Complex64::ZERO);
    }

    #[test]
    fn as_operator_rejects_bad_bipartitions() {
        let s = PureState::basis_state(2, 0);
        assert!(matches!(
            s.as_operator(&[1], &[1]),
            Err(StateError::BadBipartition)
        ));
        assert!(matches!(
            s.as_operator(&[1], &[]),
            Err(StateError::BadBipartition)
        ));
    }

    #[test]
    fn as_operator_round_trips_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..50 {
            let s = random_state(4, &mut rng);
            let rows = [3, 1];
            let cols = [4, 2];
            let m = s.as_operator(&rows, &cols).unwrap();
            let mut flat = vec![Complex64::ZERO; s.dim()];
            for r in 0..m.nrows() {
                for col in 0..m.ncols() {
                    flat[scatter(4, &rows, r) | scatter(4, &cols, col)] = m[(r, col)];
                }
            }
            // bit-exact: reshaping moves amplitudes without arithmetic
            assert_eq!(flat, s.amplitudes());
        }
    }

    proptest! {
        #[test]
        fn prop_measure_completeness(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(3, &mut rng);
            let ens = s.measure(&[1, 3], &MeasurementBasis::hadamard(2)).unwrap();
            prop_assert!((ens.total_probability() - 1.0).abs() < 1e-10);
            for b in &ens.branches {
                prop_assert!((b.state.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn prop_tensor_then_trace_recovers_factor(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_state(2, &mut rng);
            let b = random_state(1, &mut rng);
            let joint = a.tensor(&b);
            let rho_a = joint.partial_trace(&[1, 2]).unwrap();
            prop_assert!(rho_a.trace_distance(&a.density()) < 1e-9);
        }
    }
}
