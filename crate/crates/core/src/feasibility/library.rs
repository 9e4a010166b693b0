use crate::statevec::MeasurementBasis;

/// Generator for the canonical measurement bases tried during a feasibility
/// search: the full dressed-GHZ family plus all tensor products of
/// computational/hadamard single-qubit factors and Bell-pair factors over a
/// block. Blocks larger than the cap are not searched.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BasisLibrary {
    cap: usize,
}

impl BasisLibrary {
    /// The default library over blocks of up to four qubits.
    pub fn canonical() -> Self {
        Self { cap: 4 }
    }

    pub fn with_cap(cap: usize) -> Self {
        Self { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn supports(&self, arity: usize) -> bool {
        arity >= 1 && arity <= self.cap
    }

    /// Candidate bases for one measured block, in deterministic order:
    /// dressed-GHZ family (identity dressing first), then products.
    /// Duplicates are merged and renamed to their canonical family.
    pub fn candidates(&self, arity: usize) -> Vec<MeasurementBasis> {
        if !self.supports(arity) {
            return Vec::new();
        }
        let mut raw = ghz_family(arity);
        raw.extend(product_bases(arity));
        let mut out: Vec<MeasurementBasis> = Vec::new();
        for basis in raw {
            let basis = canonicalize(basis);
            if !out.iter().any(|seen| same_basis(seen, &basis)) {
                out.push(basis);
            }
        }
        out
    }
}

/// All 2^q Hadamard dressings of the GHZ-type basis on q qubits; dressing
/// mask bit i toggles H on block position i (identity dressing is mask 0).
pub fn ghz_family(arity: usize) -> Vec<MeasurementBasis> {
    (0..1usize << arity)
        .map(|mask| {
            let dressing: Vec<bool> = (0..arity).map(|pos| (mask >> pos) & 1 == 1).collect();
            MeasurementBasis::dressed_ghz(arity, &dressing)
        })
        .collect()
}

/// Tensor products over the block: contiguous factors of one qubit
/// (computational or hadamard) or two qubits (Bell).
pub fn product_bases(arity: usize) -> Vec<MeasurementBasis> {
    let mut out = Vec::new();
    for parts in compositions_of_ones_and_twos(arity) {
        let choices: Vec<Vec<MeasurementBasis>> = parts
            .iter()
            .map(|&p| {
                if p == 1 {
                    vec![
                        MeasurementBasis::computational(1),
                        MeasurementBasis::hadamard(1),
                    ]
                } else {
                    vec![MeasurementBasis::bell()]
                }
            })
            .collect();
        let mut stack: Vec<MeasurementBasis> = Vec::new();
        build_products(&choices, &mut stack, &mut out);
    }
    out
}

fn build_products(
    choices: &[Vec<MeasurementBasis>],
    stack: &mut Vec<MeasurementBasis>,
    out: &mut Vec<MeasurementBasis>,
) {
    if stack.len() == choices.len() {
        let mut it = stack.iter();
        let first = it.next().expect("at least one factor").clone();
        out.push(it.fold(first, |acc, b| acc.product(b)));
        return;
    }
    for basis in &choices[stack.len()] {
        stack.push(basis.clone());
        build_products(choices, stack, out);
        stack.pop();
    }
}

fn compositions_of_ones_and_twos(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in [1usize, 2] {
        if first > total {
            continue;
        }
        for mut rest in compositions_of_ones_and_twos(total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Rename a basis to its canonical family when the vectors coincide.
fn canonicalize(basis: MeasurementBasis) -> MeasurementBasis {
    let arity = basis.arity();
    let mut canon = vec![
        MeasurementBasis::computational(arity),
        MeasurementBasis::hadamard(arity),
    ];
    if arity == 2 {
        canon.push(MeasurementBasis::bell());
    }
    canon.push(MeasurementBasis::ghz(arity));
    for candidate in canon {
        if same_basis(&candidate, &basis) {
            return candidate;
        }
    }
    basis
}

fn same_basis(a: &MeasurementBasis, b: &MeasurementBasis) -> bool {
    a.vectors()
        .iter()
        .zip(b.vectors())
        .all(|(va, vb)| va.iter().zip(vb).all(|(x, y)| (x - y).norm() < 1e-12))
}
