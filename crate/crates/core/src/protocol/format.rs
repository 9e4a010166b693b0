//! JSON protocol files.
//!
//! ```json
//! { "assignment": {"N": 3, "n": 1, "k": 3, "blocks": [[1],[2],[3]]},
//!   "steps": [
//!     {"measure": {"party": 1, "qubits": ["s1", 1], "basis": "bell"}},
//!     {"measure": {"party": 2, "qubits": [2], "basis": "hadamard"}},
//!     {"correct": {"mode": "auto"}} ] }
//! ```
//!
//! Secret qubits are referenced as `"s1"`, `"s2"`, …; channel qubits by
//! their plain 1-based number. A basis is a family name, a
//! `{"custom": [[…vectors…]]}` matrix, or `{"by_outcome": […]}` arms for
//! adaptive measurements. Explicit correction tables list outcome tuples
//! with either a `"pauli"` string or a full `"matrix"`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    BasisChoice, CorrectionMode, CorrectionTable, PartyAssignment, ProtocolSpec, Step, StepQubit,
};
use crate::statevec::{MeasurementBasis, StateError, Unitary};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unknown basis name '{0}'")]
    UnknownBasis(String),
    #[error("basis '{name}' cannot act on {qubits} qubits")]
    BasisArity { name: String, qubits: usize },
    #[error("bad qubit reference '{0}' (use channel numbers or \"s<i>\")")]
    BadQubitRef(String),
    #[error("correction mode must be \"auto\" or \"explicit\", got '{0}'")]
    BadMode(String),
    #[error("explicit correction mode requires a table")]
    MissingTable,
    #[error("table entry {0} needs exactly one of \"pauli\" or \"matrix\"")]
    BadTableEntry(usize),
    #[error("assignment: {0}")]
    Assignment(String),
    #[error("party count {k} does not match {blocks} blocks")]
    PartyCount { k: usize, blocks: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error("malformed protocol file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub assignment: AssignmentDto,
    pub steps: Vec<StepDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignmentDto {
    #[serde(rename = "N")]
    pub channel_qubits: usize,
    pub n: usize,
    pub k: usize,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepDto {
    Measure(MeasureDto),
    Correct(CorrectDto),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureDto {
    pub party: usize,
    pub qubits: Vec<QubitDto>,
    pub basis: BasisDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitDto {
    Channel(usize),
    Secret(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisDto {
    Named(String),
    Custom { custom: Vec<Vec<[f64; 2]>> },
    ByOutcome { by_outcome: Vec<AdaptiveArmDto> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptiveArmDto {
    pub outcomes: Vec<usize>,
    pub basis: BasisDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectDto {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableEntryDto>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntryDto {
    pub outcomes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl ProtocolFile {
    pub fn from_spec(spec: &ProtocolSpec) -> Self {
        let assignment = AssignmentDto {
            channel_qubits: spec.assignment.channel_qubits(),
            n: spec.assignment.secret_qubits(),
            k: spec.assignment.num_parties(),
            blocks: spec.assignment.blocks().to_vec(),
        };
        let steps = spec
            .steps
            .iter()
            .map(|step| match step {
                Step::Measure {
                    party,
                    qubits,
                    basis,
                } => StepDto::Measure(MeasureDto {
                    party: *party,
                    qubits: qubits.iter().map(qubit_to_dto).collect(),
                    basis: basis_choice_to_dto(basis),
                }),
                Step::Correct { mode } => StepDto::Correct(match mode {
                    CorrectionMode::Auto => CorrectDto {
                        mode: "auto".into(),
                        table: None,
                    },
                    CorrectionMode::Explicit(table) => CorrectDto {
                        mode: "explicit".into(),
                        table: Some(
                            table
                                .entries()
                                .iter()
                                .map(|(outcomes, u)| TableEntryDto {
                                    outcomes: outcomes.clone(),
                                    pauli: None,
                                    matrix: Some(matrix_to_rows(u.matrix())),
                                })
                                .collect(),
                        ),
                    },
                }),
            })
            .collect();
        Self { assignment, steps }
    }

    pub fn into_spec(self) -> Result<ProtocolSpec, FormatError> {
        if self.assignment.k != self.assignment.blocks.len() {
            return Err(FormatError::PartyCount {
                k: self.assignment.k,
                blocks: self.assignment.blocks.len(),
            });
        }
        let assignment = PartyAssignment::new(
            self.assignment.channel_qubits,
            self.assignment.n,
            self.assignment.blocks,
        )
        .map_err(|e| FormatError::Assignment(e.to_string()))?;
        let secret_qubits = assignment.secret_qubits();
        let steps = self
            .steps
            .into_iter()
            .map(|dto| match dto {
                StepDto::Measure(m) => {
                    let qubits = m
                        .qubits
                        .iter()
                        .map(qubit_from_dto)
                        .collect::<Result<Vec<_>, _>>()?;
                    let basis = basis_choice_from_dto(&m.basis, qubits.len())?;
                    Ok(Step::Measure {
                        party: m.party,
                        qubits,
                        basis,
                    })
                }
                StepDto::Correct(c) => {
                    let mode = match c.mode.as_str() {
                        "auto" => CorrectionMode::Auto,
                        "explicit" => {
                            let entries = c.table.ok_or(FormatError::MissingTable)?;
                            let entries = entries
                                .into_iter()
                                .enumerate()
                                .map(|(i, e)| {
                                    let unitary = match (e.pauli, e.matrix) {
                                        (Some(p), None) => Unitary::pauli_string(&p)?,
                                        (None, Some(rows)) => Unitary::new(rows_to_matrix(&rows))?,
                                        _ => return Err(FormatError::BadTableEntry(i)),
                                    };
                                    if unitary.dim() != 1 << secret_qubits {
                                        return Err(FormatError::State(
                                            StateError::OperatorDimension {
                                                dim: unitary.dim(),
                                                qubits: secret_qubits,
                                            },
                                        ));
                                    }
                                    Ok((e.outcomes, unitary))
                                })
                                .collect::<Result<Vec<_>, FormatError>>()?;
                            CorrectionMode::Explicit(CorrectionTable::new(entries))
                        }
                        other => return Err(FormatError::BadMode(other.to_string())),
                    };
                    Ok(Step::Correct { mode })
                }
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(ProtocolSpec::new(assignment, steps))
    }
}

fn qubit_to_dto(q: &StepQubit) -> QubitDto {
    match q {
        StepQubit::Channel(j) => QubitDto::Channel(*j),
        StepQubit::Secret(i) => QubitDto::Secret(format!("s{i}")),
    }
}

fn qubit_from_dto(dto: &QubitDto) -> Result<StepQubit, FormatError> {
    match dto {
        QubitDto::Channel(j) => Ok(StepQubit::Channel(*j)),
        QubitDto::Secret(s) => s
            .strip_prefix('s')
            .and_then(|rest| rest.parse::<usize>().ok())
            .map(StepQubit::Secret)
            .ok_or_else(|| FormatError::BadQubitRef(s.clone())),
    }
}

fn basis_choice_to_dto(choice: &BasisChoice) -> BasisDto {
    match choice {
        BasisChoice::Fixed(b) => basis_to_dto(b),
        BasisChoice::ByOutcome(arms) => BasisDto::ByOutcome {
            by_outcome: arms
                .iter()
                .map(|(outcomes, b)| AdaptiveArmDto {
                    outcomes: outcomes.clone(),
                    basis: basis_to_dto(b),
                })
                .collect(),
        },
    }
}

fn basis_to_dto(basis: &MeasurementBasis) -> BasisDto {
    match basis.name() {
        name @ ("computational" | "hadamard" | "bell" | "ghz") => BasisDto::Named(name.into()),
        _ => BasisDto::Custom {
            custom: basis
                .vectors()
                .iter()
                .map(|v| v.iter().map(|a| [a.re, a.im]).collect())
                .collect(),
        },
    }
}

fn basis_choice_from_dto(dto: &BasisDto, qubits: usize) -> Result<BasisChoice, FormatError> {
    match dto {
        BasisDto::ByOutcome { by_outcome } => {
            let arms = by_outcome
                .iter()
                .map(|arm| {
                    let basis = fixed_basis_from_dto(&arm.basis, qubits)?;
                    Ok((arm.outcomes.clone(), basis))
                })
                .collect::<Result<Vec<_>, FormatError>>()?;
            Ok(BasisChoice::ByOutcome(arms))
        }
        fixed => Ok(BasisChoice::Fixed(fixed_basis_from_dto(fixed, qubits)?)),
    }
}

fn fixed_basis_from_dto(dto: &BasisDto, qubits: usize) -> Result<MeasurementBasis, FormatError> {
    match dto {
        BasisDto::Named(name) => match name.as_str() {
            "computational" => Ok(MeasurementBasis::computational(qubits)),
            "hadamard" => Ok(MeasurementBasis::hadamard(qubits)),
            "ghz" => Ok(MeasurementBasis::ghz(qubits)),
            "bell" => {
                if qubits != 2 {
                    return Err(FormatError::BasisArity {
                        name: name.clone(),
                        qubits,
                    });
                }
                Ok(MeasurementBasis::bell())
            }
            other => Err(FormatError::UnknownBasis(other.to_string())),
        },
        BasisDto::Custom { custom } => {
            let vectors = custom
                .iter()
                .map(|v| v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
                .collect();
            Ok(MeasurementBasis::new("custom", qubits, vectors)?)
        }
        BasisDto::ByOutcome { .. } => Err(FormatError::UnknownBasis(
            "nested adaptive bases are not supported".into(),
        )),
    }
}

fn matrix_to_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> DMatrix<Complex64> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(nrows, ncols, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re, im)
    })
}

impl Serialize for ProtocolSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ProtocolFile::from_spec(self).serialize(serializer)
    }
}

pub fn load_protocol(path: impl AsRef<Path>) -> Result<ProtocolSpec, FormatError> {
    let text = fs::read_to_string(path)?;
    let file: ProtocolFile = serde_json::from_str(&text)?;
    file.into_spec()
}

pub fn save_protocol(spec: &ProtocolSpec, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let file = ProtocolFile::from_spec(spec);
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}
