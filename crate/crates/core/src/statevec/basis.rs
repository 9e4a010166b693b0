use num_complex::Complex64;

use super::StateError;
use crate::tol;

/// An orthonormal set of 2^q vectors on q qubits, with outcome labels.
///
/// Canonical families: computational, hadamard (H^⊗q image of the
/// computational basis), bell (q = 2), and the GHZ family
/// (|x⟩ ± |x̄⟩)/√2 together with its Hadamard-dressed variants.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    name: String,
    arity: usize,
    vectors: Vec<Vec<Complex64>>,
    labels: Vec<String>,
}

impl MeasurementBasis {
    /// Validate pairwise orthonormality (within 1e-10) and wrap.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        vectors: Vec<Vec<Complex64>>,
    ) -> Result<Self, StateError> {
        Self::with_tolerance(name, arity, vectors, tol::MATRIX)
    }

    /// As [`new`](Self::new) with an explicit orthonormality tolerance.
    pub fn with_tolerance(
        name: impl Into<String>,
        arity: usize,
        vectors: Vec<Vec<Complex64>>,
        orthonormality: f64,
    ) -> Result<Self, StateError> {
        let dim = 1usize << arity;
        if vectors.len() != dim {
            return Err(StateError::BasisSize {
                expected: dim,
                got: vectors.len(),
            });
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(StateError::AmplitudeCount {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let mut worst = 0.0f64;
        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate().skip(i) {
                let ip: Complex64 = vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((ip - target).norm());
            }
        }
        if worst > orthonormality {
            return Err(StateError::NotOrthonormal(worst));
        }
        let labels = (0..dim).map(|j| j.to_string()).collect();
        Ok(Self {
            name: name.into(),
            arity,
            vectors,
            labels,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn num_outcomes(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn label(&self, outcome: usize) -> &str {
        &self.labels[outcome]
    }

    /// The computational basis {|j⟩}.
    pub fn computational(arity: usize) -> Self {
        assert!(arity >= 1);
        let dim = 1usize << arity;
        let vectors = (0..dim)
            .map(|j| {
                let mut v = vec![Complex64::ZERO; dim];
                v[j] = Complex64::ONE;
                v
            })
            .collect();
        Self::trusted("computational", arity, vectors)
    }

    /// {H^⊗q |j⟩}: entries 2^(−q/2)·(−1)^popcount(j AND x).
    pub fn hadamard(arity: usize) -> Self {
        assert!(arity >= 1);
        let dim = 1usize << arity;
        // powers of the same constant the single-qubit H uses, so products
        // of single-qubit factors coincide bit for bit
        let scale = std::f64::consts::FRAC_1_SQRT_2.powi(arity as i32);
        let vectors = (0..dim)
            .map(|j| {
                (0..dim)
                    .map(|x| {
                        let sign = if (j & x).count_ones() % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        Complex64::new(sign * scale, 0.0)
                    })
                    .collect()
            })
            .collect();
        Self::trusted("hadamard", arity, vectors)
    }

    /// The four maximally entangled two-qubit states, ordered
    /// Φ+, Φ−, Ψ+, Ψ−.
    pub fn bell() -> Self {
        let mut b = Self::ghz(2);
        b.name = "bell".into();
        b
    }

    /// The GHZ-type basis {(|x⟩ + (−1)^s |x̄⟩)/√2} with x running over the
    /// 2^(q−1) strings whose leading bit is 0; outcome label = (x << 1) | s.
    pub fn ghz(arity: usize) -> Self {
        assert!(arity >= 1);
        let dim = 1usize << arity;
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut vectors = Vec::with_capacity(dim);
        for x in 0..dim / 2 {
            for s in 0..2 {
                let mut v = vec![Complex64::ZERO; dim];
                v[x] = r;
                v[x ^ (dim - 1)] = if s == 0 { r } else { -r };
                vectors.push(v);
            }
        }
        Self::trusted("ghz", arity, vectors)
    }

    /// GHZ basis dressed per qubit with H (true) or I (false).
    pub fn dressed_ghz(arity: usize, dressing: &[bool]) -> Self {
        assert_eq!(dressing.len(), arity);
        let mut basis = Self::ghz(arity);
        for (pos, &apply_h) in dressing.iter().enumerate() {
            if !apply_h {
                continue;
            }
            for v in &mut basis.vectors {
                hadamard_in_place(v, arity, pos);
            }
        }
        let tag: String = dressing
            .iter()
            .map(|&h| if h { 'H' } else { 'I' })
            .collect();
        if dressing.iter().any(|&h| h) {
            basis.name = format!("ghz[{tag}]");
        }
        basis
    }

    /// Tensor product; `self` measures the leading qubits of the combined
    /// block, and outcome labels compose as self·2^(other.arity) + other.
    pub fn product(&self, other: &Self) -> Self {
        let arity = self.arity + other.arity;
        let mut vectors = Vec::with_capacity(1 << arity);
        for a in &self.vectors {
            for b in &other.vectors {
                let mut v = Vec::with_capacity(1 << arity);
                for ai in a {
                    for bi in b {
                        v.push(ai * bi);
                    }
                }
                vectors.push(v);
            }
        }
        Self::trusted(format!("{}⊗{}", self.name, other.name), arity, vectors)
    }

    fn trusted(name: impl Into<String>, arity: usize, vectors: Vec<Vec<Complex64>>) -> Self {
        let labels = (0..vectors.len()).map(|j| j.to_string()).collect();
        Self {
            name: name.into(),
            arity,
            vectors,
            labels,
        }
    }
}

/// Apply H to block position `pos` (0-based, position 0 = most significant)
/// of a 2^arity amplitude vector.
fn hadamard_in_place(v: &mut [Complex64], arity: usize, pos: usize) {
    let shift = arity - 1 - pos;
    let step = 1usize << shift;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for base in 0..v.len() {
        if base & step == 0 {
            let hi = base | step;
            let a = v[base];
            let b = v[hi];
            v[base] = (a + b) * r;
            v[hi] = (a - b) * r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthonormal(b: &MeasurementBasis) {
        MeasurementBasis::new(b.name().to_string(), b.arity(), b.vectors().to_vec())
            .expect("orthonormal");
    }

    #[test]
    fn canonical_families_are_orthonormal() {
        for q in 1..=4 {
            assert_orthonormal(&MeasurementBasis::computational(q));
            assert_orthonormal(&MeasurementBasis::hadamard(q));
            assert_orthonormal(&MeasurementBasis::ghz(q));
        }
        assert_orthonormal(&MeasurementBasis::bell());
        assert_orthonormal(&MeasurementBasis::dressed_ghz(3, &[true, false, true]));
    }

    #[test]
    fn bell_ordering_matches_phi_psi_convention() {
        let b = MeasurementBasis::bell();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // Φ+ = (|00⟩+|11⟩)/√2
        assert!((b.vectors()[0][0].re - r).abs() < 1e-15);
        assert!((b.vectors()[0][3].re - r).abs() < 1e-15);
        // Ψ− = (|01⟩−|10⟩)/√2
        assert!((b.vectors()[3][1].re - r).abs() < 1e-15);
        assert!((b.vectors()[3][2].re + r).abs() < 1e-15);
    }

    #[test]
    fn dressed_ghz_reproduces_the_four_term_cluster_basis_vector() {
        // (H⊗I⊗I) applied to (|000⟩+|111⟩)/√2 gives
        // (|000⟩+|100⟩+|011⟩−|111⟩)/2.
        let b = MeasurementBasis::dressed_ghz(3, &[true, false, false]);
        let v = &b.vectors()[0];
        assert!((v[0].re - 0.5).abs() < 1e-12);
        assert!((v[4].re - 0.5).abs() < 1e-12);
        assert!((v[3].re - 0.5).abs() < 1e-12);
        assert!((v[7].re + 0.5).abs() < 1e-12);
        for idx in [1, 2, 5, 6] {
            assert!(v[idx].norm() < 1e-12);
        }
    }

    #[test]
    fn ghz_arity_one_is_the_hadamard_pair() {
        let g = MeasurementBasis::ghz(1);
        let h = MeasurementBasis::hadamard(1);
        assert_eq!(g.vectors(), h.vectors());
    }

    #[test]
    fn product_composes_labels_most_significant_first() {
        let p = MeasurementBasis::bell().product(&MeasurementBasis::computational(1));
        assert_eq!(p.arity(), 3);
        assert_eq!(p.num_outcomes(), 8);
        // outcome 2·2+1 = 5 is Φ− ⊗ |1⟩
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = &p.vectors()[3];
        assert!((v[1].re - r).abs() < 1e-15);
        assert!((v[7].re + r).abs() < 1e-15);
        assert_orthonormal(&p);
    }

    #[test]
    fn rejects_non_orthonormal_vectors() {
        let v = vec![
            vec![Complex64::ONE, Complex64::ZERO],
            vec![Complex64::ONE, Complex64::ZERO],
        ];
        assert!(matches!(
            MeasurementBasis::new("dup", 1, v),
            Err(StateError::NotOrthonormal(_))
        ));
    }
}
