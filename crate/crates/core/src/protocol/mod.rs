//! Splitting protocols: party assignments, measurement/broadcast/correction
//! steps, branch-by-branch execution with an explicit secret or with the
//! entanglement-transfer reference method.
//!
//! Broadcast is modeled as universal availability of outcomes at the final
//! correction step; the only cost tracked is the total classical bits each
//! party must announce.

mod executor;
pub mod format;
pub mod scripts;

pub use executor::{
    averaged_marginal, conditional_receiver_marginals, no_signaling_check, run_reference,
    run_with_secret, synthesize_correction, BranchResult, CorrectionOutcome, ReferenceRun,
    SynthesisFailure,
};

use std::fmt;

use thiserror::Error;

use crate::channels::MAX_QUBITS;
use crate::statevec::{MeasurementBasis, StateError, Unitary};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid protocol: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("channel has {channel} qubits but the assignment expects {expected}")]
    ChannelMismatch { channel: usize, expected: usize },
    #[error("secret has {got} qubits, expected {expected}")]
    SecretSize { expected: usize, got: usize },
    #[error("composite register of {0} qubits exceeds the dense limit of {MAX_QUBITS}")]
    RegisterTooLarge(usize),
    #[error("outcome {outcomes:?} was reached but has no entry in the explicit correction table")]
    UnlistedOutcome { outcomes: Vec<usize> },
    #[error("step {step} has no adaptive basis arm for outcome prefix {outcomes:?}")]
    MissingAdaptiveBasis { step: usize, outcomes: Vec<usize> },
    #[error("residual register after the measurements is not the receiver block")]
    ResidualMismatch,
    #[error("unknown party {party} (protocol has {parties})")]
    UnknownParty { party: usize, parties: usize },
    #[error("stage {stage} exceeds the {measures} measurement steps")]
    UnknownStage { stage: usize, measures: usize },
    #[error("assignment: {0}")]
    Assignment(String),
    #[error(transparent)]
    State(#[from] StateError),
}

/// An ordered partition of the channel qubits into party blocks. Party 1 is
/// the dealer (who also holds the secret qubits); the last party is the
/// receiver and holds exactly `secret_qubits` channel qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyAssignment {
    channel_qubits: usize,
    secret_qubits: usize,
    blocks: Vec<Vec<usize>>,
}

impl PartyAssignment {
    pub fn new(
        channel_qubits: usize,
        secret_qubits: usize,
        blocks: Vec<Vec<usize>>,
    ) -> Result<Self, ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::Assignment(msg));
        if secret_qubits < 1 {
            return bad("secret must have at least one qubit".into());
        }
        if blocks.len() < 2 {
            return bad(format!(
                "need at least dealer and receiver, got {} blocks",
                blocks.len()
            ));
        }
        let mut seen = vec![false; channel_qubits + 1];
        for (i, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return bad(format!("block {} is empty", i + 1));
            }
            for &q in block {
                if q == 0 || q > channel_qubits {
                    return bad(format!("qubit {q} out of range 1..={channel_qubits}"));
                }
                if seen[q] {
                    return bad(format!("qubit {q} assigned twice"));
                }
                seen[q] = true;
            }
        }
        if let Some(q) = (1..=channel_qubits).find(|&q| !seen[q]) {
            return bad(format!("qubit {q} not assigned to any party"));
        }
        let receiver = blocks.last().expect("nonempty");
        if receiver.len() != secret_qubits {
            return bad(format!(
                "receiver holds {} qubits but the secret has {}",
                receiver.len(),
                secret_qubits
            ));
        }
        let mut blocks = blocks;
        for block in &mut blocks {
            block.sort_unstable();
        }
        Ok(Self {
            channel_qubits,
            secret_qubits,
            blocks,
        })
    }

    /// Contiguous blocks from ordered sizes; the last size must equal the
    /// secret size.
    pub fn contiguous(
        channel_qubits: usize,
        secret_qubits: usize,
        sizes: &[usize],
    ) -> Result<Self, ProtocolError> {
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut next = 1usize;
        for &s in sizes {
            blocks.push((next..next + s).collect());
            next += s;
        }
        if next != channel_qubits + 1 {
            return Err(ProtocolError::Assignment(format!(
                "sizes sum to {}, expected {channel_qubits}",
                next - 1
            )));
        }
        Self::new(channel_qubits, secret_qubits, blocks)
    }

    pub fn channel_qubits(&self) -> usize {
        self.channel_qubits
    }

    pub fn secret_qubits(&self) -> usize {
        self.secret_qubits
    }

    pub fn num_parties(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// 1-based party block.
    pub fn block(&self, party: usize) -> &[usize] {
        &self.blocks[party - 1]
    }

    pub fn dealer_block(&self) -> &[usize] {
        &self.blocks[0]
    }

    pub fn receiver_block(&self) -> &[usize] {
        self.blocks.last().expect("nonempty")
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// True when the blocks are consecutive runs in qubit order.
    pub fn is_contiguous(&self) -> bool {
        let mut next = 1usize;
        for block in &self.blocks {
            for &q in block {
                if q != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }
}

/// A qubit reference inside a protocol step: one of the dealer's secret
/// qubits or a channel qubit, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StepQubit {
    Secret(usize),
    Channel(usize),
}

impl fmt::Display for StepQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepQubit::Secret(i) => write!(f, "secret qubit {i}"),
            StepQubit::Channel(j) => write!(f, "channel qubit {j}"),
        }
    }
}

/// Basis selection for a measurement step. The adaptive form keys a basis
/// on the tuple of all earlier outcomes; none of the built-in protocols
/// need it, but the executor supports it.
#[derive(Debug, Clone)]
pub enum BasisChoice {
    Fixed(MeasurementBasis),
    ByOutcome(Vec<(Vec<usize>, MeasurementBasis)>),
}

impl BasisChoice {
    fn arities(&self) -> Vec<usize> {
        match self {
            BasisChoice::Fixed(b) => vec![b.arity()],
            BasisChoice::ByOutcome(arms) => arms.iter().map(|(_, b)| b.arity()).collect(),
        }
    }
}

/// Outcome-tuple-indexed correction unitaries for the receiver.
#[derive(Debug, Clone, Default)]
pub struct CorrectionTable {
    entries: Vec<(Vec<usize>, Unitary)>,
}

impl CorrectionTable {
    pub fn new(entries: Vec<(Vec<usize>, Unitary)>) -> Self {
        Self { entries }
    }

    pub fn get(&self, outcomes: &[usize]) -> Option<&Unitary> {
        self.entries
            .iter()
            .find(|(key, _)| key == outcomes)
            .map(|(_, u)| u)
    }

    pub fn entries(&self) -> &[(Vec<usize>, Unitary)] {
        &self.entries
    }
}

#[derive(Debug, Clone)]
pub enum CorrectionMode {
    /// Synthesize the correction from the branch residual (the reference
    /// method is the ground truth for success).
    Auto,
    /// Look the correction up by outcome tuple.
    Explicit(CorrectionTable),
}

#[derive(Debug, Clone)]
pub enum Step {
    Measure {
        party: usize,
        qubits: Vec<StepQubit>,
        basis: BasisChoice,
    },
    Correct {
        mode: CorrectionMode,
    },
}

/// A complete splitting protocol: an assignment plus an ordered step list
/// ending in the receiver's correction.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub assignment: PartyAssignment,
    pub steps: Vec<Step>,
}

impl ProtocolSpec {
    pub fn new(assignment: PartyAssignment, steps: Vec<Step>) -> Self {
        Self { assignment, steps }
    }

    pub fn measure_steps(&self) -> impl Iterator<Item = (usize, &Step)> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Step::Measure { .. }))
    }

    pub fn num_measure_steps(&self) -> usize {
        self.measure_steps().count()
    }

    pub fn correction_mode(&self) -> Option<&CorrectionMode> {
        match self.steps.last() {
            Some(Step::Correct { mode }) => Some(mode),
            _ => None,
        }
    }

    /// Check every structural invariant, collecting all violations.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("protocol must end with a correction step")]
    NoFinalCorrect,
    #[error("step {step}: correction must be the final step")]
    EarlyCorrect { step: usize },
    #[error("step {step}: party {party} does not exist")]
    UnknownParty { step: usize, party: usize },
    #[error("step {step}: the receiver (party {party}) must not measure")]
    ReceiverMeasures { step: usize, party: usize },
    #[error("step {step}: party {party} acts after party {previous}")]
    OutOfOrder {
        step: usize,
        party: usize,
        previous: usize,
    },
    #[error("step {step}: empty qubit list")]
    EmptyMeasurement { step: usize },
    #[error("step {step}: duplicate {qubit} within the step")]
    DuplicateInStep { step: usize, qubit: StepQubit },
    #[error("step {step}: {qubit} does not exist")]
    UnknownQubit { step: usize, qubit: StepQubit },
    #[error("step {step}: party {party} does not own {qubit}")]
    NotOwned {
        step: usize,
        party: usize,
        qubit: StepQubit,
    },
    #[error("step {step}: basis arity {arity} differs from the {qubits} measured qubits")]
    ArityMismatch {
        step: usize,
        arity: usize,
        qubits: usize,
    },
    #[error("step {step}: {qubit} was already measured")]
    MeasuredTwice { step: usize, qubit: StepQubit },
    #[error("{qubit} is never measured")]
    Unmeasured { qubit: StepQubit },
    #[error(
        "correction table entry {index}: outcome tuple has {got} entries, expected {expected}"
    )]
    TableTupleLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error(
        "correction table entry {index}: outcome {outcome} out of range for measurement {step}"
    )]
    TableOutcomeRange {
        index: usize,
        step: usize,
        outcome: usize,
    },
    #[error("correction table entry {index}: unitary dimension {got}, expected {expected}")]
    TableUnitaryDim {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("step {step}, adaptive arm {index}: prefix has {got} outcomes, expected {expected}")]
    AdaptivePrefixLength {
        step: usize,
        index: usize,
        expected: usize,
        got: usize,
    },
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Check a protocol against every structural invariant; all violations are
/// returned, not just the first.
pub fn validate(spec: &ProtocolSpec) -> Vec<Violation> {
    let mut violations = Vec::new();
    let assignment = &spec.assignment;
    let parties = assignment.num_parties();
    let n = assignment.secret_qubits();

    match spec.steps.last() {
        Some(Step::Correct { .. }) => {}
        _ => violations.push(Violation::NoFinalCorrect),
    }
    for (step, s) in spec.steps.iter().enumerate() {
        if matches!(s, Step::Correct { .. }) && step + 1 != spec.steps.len() {
            violations.push(Violation::EarlyCorrect { step });
        }
    }

    let mut measured: Vec<StepQubit> = Vec::new();
    let mut measure_arities: Vec<usize> = Vec::new();
    let mut previous_party = 0usize;
    for (step, s) in spec.steps.iter().enumerate() {
        let Step::Measure {
            party,
            qubits,
            basis,
        } = s
        else {
            continue;
        };
        let party = *party;
        if party == 0 || party > parties {
            violations.push(Violation::UnknownParty { step, party });
            continue;
        }
        if party == parties {
            violations.push(Violation::ReceiverMeasures { step, party });
        }
        if party < previous_party {
            violations.push(Violation::OutOfOrder {
                step,
                party,
                previous: previous_party,
            });
        }
        previous_party = previous_party.max(party);

        if qubits.is_empty() {
            violations.push(Violation::EmptyMeasurement { step });
        }
        for (i, &qubit) in qubits.iter().enumerate() {
            if qubits[..i].contains(&qubit) {
                violations.push(Violation::DuplicateInStep { step, qubit });
                continue;
            }
            let exists = match qubit {
                StepQubit::Secret(i) => i >= 1 && i <= n,
                StepQubit::Channel(j) => j >= 1 && j <= assignment.channel_qubits(),
            };
            if !exists {
                violations.push(Violation::UnknownQubit { step, qubit });
                continue;
            }
            let owned = match qubit {
                StepQubit::Secret(_) => party == 1,
                StepQubit::Channel(j) => assignment.block(party).contains(&j),
            };
            if !owned {
                violations.push(Violation::NotOwned { step, party, qubit });
            }
            if measured.contains(&qubit) {
                violations.push(Violation::MeasuredTwice { step, qubit });
            } else {
                measured.push(qubit);
            }
        }
        for arity in basis.arities() {
            if arity != qubits.len() {
                violations.push(Violation::ArityMismatch {
                    step,
                    arity,
                    qubits: qubits.len(),
                });
            }
        }
        if let BasisChoice::ByOutcome(arms) = basis {
            let expected = measure_arities.len();
            for (index, (prefix, _)) in arms.iter().enumerate() {
                if prefix.len() != expected {
                    violations.push(Violation::AdaptivePrefixLength {
                        step,
                        index,
                        expected,
                        got: prefix.len(),
                    });
                }
            }
        }
        measure_arities.push(qubits.len());
    }

    // every secret and non-receiver channel qubit must be consumed
    for i in 1..=n {
        let q = StepQubit::Secret(i);
        if !measured.contains(&q) {
            violations.push(Violation::Unmeasured { qubit: q });
        }
    }
    for party in 1..parties {
        for &j in assignment.block(party) {
            let q = StepQubit::Channel(j);
            if !measured.contains(&q) {
                violations.push(Violation::Unmeasured { qubit: q });
            }
        }
    }

    if let Some(CorrectionMode::Explicit(table)) = spec.correction_mode() {
        let expected_dim = 1usize << n;
        for (index, (outcomes, unitary)) in table.entries().iter().enumerate() {
            if outcomes.len() != measure_arities.len() {
                violations.push(Violation::TableTupleLength {
                    index,
                    expected: measure_arities.len(),
                    got: outcomes.len(),
                });
            } else {
                for (step, (&outcome, &arity)) in outcomes.iter().zip(&measure_arities).enumerate()
                {
                    if outcome >= (1usize << arity) {
                        violations.push(Violation::TableOutcomeRange {
                            index,
                            step,
                            outcome,
                        });
                    }
                }
            }
            if unitary.dim() != expected_dim {
                violations.push(Violation::TableUnitaryDim {
                    index,
                    expected: expected_dim,
                    got: unitary.dim(),
                });
            }
        }
    }

    violations
}

/// Classical communication, in bits, each party must broadcast: the total
/// number of qubits it measures (2^q outcomes take q bits to convey).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ClassicalCost {
    /// Index 0 is the dealer.
    pub bits_per_party: Vec<usize>,
}

impl ClassicalCost {
    pub fn dealer_bits(&self) -> usize {
        self.bits_per_party[0]
    }

    pub fn total_bits(&self) -> usize {
        self.bits_per_party.iter().sum()
    }
}

pub fn classical_cost(spec: &ProtocolSpec) -> ClassicalCost {
    let mut bits = vec![0usize; spec.assignment.num_parties()];
    for (_, step) in spec.measure_steps() {
        if let Step::Measure { party, qubits, .. } = step {
            if *party >= 1 && *party <= bits.len() {
                bits[*party - 1] += qubits.len();
            }
        }
    }
    ClassicalCost {
        bits_per_party: bits,
    }
}
