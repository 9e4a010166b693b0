//! Built-in splitting protocols over the built-in channels.

use super::{
    BasisChoice, CorrectionMode, CorrectionTable, PartyAssignment, ProtocolSpec, Step, StepQubit,
};
use crate::channels::{self, ChannelDescriptor};
use crate::statevec::{MeasurementBasis, Unitary};

/// A protocol bundled with the channel it runs on.
#[derive(Debug, Clone)]
pub struct NamedScript {
    pub name: &'static str,
    pub channel: ChannelDescriptor,
    pub spec: ProtocolSpec,
}

/// Single-qubit splitting over the three-qubit GHZ channel: the dealer
/// Bell-measures (secret, qubit 1), the middle party measures qubit 2 in
/// the Hadamard basis, the receiver corrects.
pub fn hillery() -> NamedScript {
    let assignment = PartyAssignment::contiguous(3, 1, &[1, 1, 1]).expect("valid sizes");
    let spec = ProtocolSpec::new(
        assignment,
        vec![
            Step::Measure {
                party: 1,
                qubits: vec![StepQubit::Secret(1), StepQubit::Channel(1)],
                basis: BasisChoice::Fixed(MeasurementBasis::bell()),
            },
            Step::Measure {
                party: 2,
                qubits: vec![StepQubit::Channel(2)],
                basis: BasisChoice::Fixed(MeasurementBasis::hadamard(1)),
            },
            Step::Correct {
                mode: CorrectionMode::Auto,
            },
        ],
    );
    NamedScript {
        name: "hillery",
        channel: channels::ghz(3).expect("ghz3 exists"),
        spec,
    }
}

/// [`hillery`] with the corrections written out as an explicit Pauli table
/// instead of synthesized: outcome (Bell, Hadamard) → U ∈ {I, X, Y, Z}.
pub fn hillery_explicit() -> NamedScript {
    let mut script = hillery();
    let pauli = |s: &str| Unitary::pauli_string(s).expect("valid Pauli symbol");
    let entries = vec![
        (vec![0, 0], pauli("I")),
        (vec![0, 1], pauli("Z")),
        (vec![1, 0], pauli("Z")),
        (vec![1, 1], pauli("I")),
        (vec![2, 0], pauli("X")),
        (vec![2, 1], pauli("Y")),
        (vec![3, 0], pauli("Y")),
        (vec![3, 1], pauli("X")),
    ];
    if let Some(Step::Correct { mode }) = script.spec.steps.last_mut() {
        *mode = CorrectionMode::Explicit(CorrectionTable::new(entries));
    }
    script.name = "hillery-explicit";
    script
}

/// First four-qubit GHZ protocol: dealer holds qubit 1, the middle party
/// qubits 2 and 3, the receiver qubit 4; two Bell measurements in a chain.
pub fn ghz4_bell_chain() -> NamedScript {
    let assignment = PartyAssignment::contiguous(4, 1, &[1, 2, 1]).expect("valid sizes");
    let spec = ProtocolSpec::new(
        assignment,
        vec![
            Step::Measure {
                party: 1,
                qubits: vec![StepQubit::Secret(1), StepQubit::Channel(1)],
                basis: BasisChoice::Fixed(MeasurementBasis::bell()),
            },
            Step::Measure {
                party: 2,
                qubits: vec![StepQubit::Channel(2), StepQubit::Channel(3)],
                basis: BasisChoice::Fixed(MeasurementBasis::bell()),
            },
            Step::Correct {
                mode: CorrectionMode::Auto,
            },
        ],
    );
    NamedScript {
        name: "ghz4-bell-chain",
        channel: channels::ghz(4).expect("ghz4 exists"),
        spec,
    }
}

/// Second four-qubit GHZ protocol: dealer holds qubits 1 and 2 and makes a
/// three-particle GHZ-basis measurement; the middle party measures qubit 3
/// in the Hadamard basis.
pub fn ghz4_ghz_hadamard() -> NamedScript {
    let assignment = PartyAssignment::contiguous(4, 1, &[2, 1, 1]).expect("valid sizes");
    let spec = ProtocolSpec::new(
        assignment,
        vec![
            Step::Measure {
                party: 1,
                qubits: vec![
                    StepQubit::Secret(1),
                    StepQubit::Channel(1),
                    StepQubit::Channel(2),
                ],
                basis: BasisChoice::Fixed(MeasurementBasis::ghz(3)),
            },
            Step::Measure {
                party: 2,
                qubits: vec![StepQubit::Channel(3)],
                basis: BasisChoice::Fixed(MeasurementBasis::hadamard(1)),
            },
            Step::Correct {
                mode: CorrectionMode::Auto,
            },
        ],
    );
    NamedScript {
        name: "ghz4-ghz-hadamard",
        channel: channels::ghz(4).expect("ghz4 exists"),
        spec,
    }
}

/// The failing two-qubit splitting attempt over the four-qubit cluster
/// state: the dealer (one channel qubit only) measures (s₁, s₂, qubit 1) in
/// the H-dressed GHZ basis whose first vector is
/// (|000⟩+|100⟩+|011⟩−|111⟩)/2. The dealer broadcasts 3 bits where 2n = 4
/// would be needed, so some branches cannot be corrected.
pub fn cluster4_attempt() -> NamedScript {
    let assignment = PartyAssignment::contiguous(4, 2, &[1, 1, 2]).expect("valid sizes");
    let spec = ProtocolSpec::new(
        assignment,
        vec![
            Step::Measure {
                party: 1,
                qubits: vec![
                    StepQubit::Secret(1),
                    StepQubit::Secret(2),
                    StepQubit::Channel(1),
                ],
                basis: BasisChoice::Fixed(MeasurementBasis::dressed_ghz(3, &[true, false, false])),
            },
            Step::Measure {
                party: 2,
                qubits: vec![StepQubit::Channel(2)],
                basis: BasisChoice::Fixed(MeasurementBasis::hadamard(1)),
            },
            Step::Correct {
                mode: CorrectionMode::Auto,
            },
        ],
    );
    NamedScript {
        name: "cluster4-attempt",
        channel: channels::cluster4(),
        spec,
    }
}

/// Every built-in script, including the deliberately failing one.
pub fn all() -> Vec<NamedScript> {
    vec![
        hillery(),
        hillery_explicit(),
        ghz4_bell_chain(),
        ghz4_ghz_hadamard(),
        cluster4_attempt(),
    ]
}

/// Look a built-in script up by name.
pub fn by_name(name: &str) -> Option<NamedScript> {
    all().into_iter().find(|s| s.name == name)
}
