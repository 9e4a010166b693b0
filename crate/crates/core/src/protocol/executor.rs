use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use super::{BasisChoice, CorrectionMode, ProtocolError, ProtocolSpec, Step, StepQubit};
use crate::channels::{bell_pairs, ChannelDescriptor, MAX_QUBITS};
use crate::statevec::{spanning_states, DensityMatrix, PureState, Unitary};
use crate::tol;

/// Why a correction could not be synthesized from a branch residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisFailure {
    /// rank(M) < 2^n: the branch destroyed part of the secret.
    #[error("residual operator is singular")]
    Singular,
    /// M†M is not a multiple of the identity: no unitary can undo the branch.
    #[error("residual operator is not proportional to a unitary")]
    NotProportional,
}

/// Correction applied (or not) on one branch.
#[derive(Debug, Clone)]
pub enum CorrectionOutcome {
    Applied(Unitary),
    Failed(SynthesisFailure),
}

impl CorrectionOutcome {
    pub fn is_applied(&self) -> bool {
        matches!(self, CorrectionOutcome::Applied(_))
    }
}

/// Per-outcome record of a protocol run.
#[derive(Debug, Clone)]
pub struct BranchResult {
    /// One outcome index per measurement step, in step order.
    pub outcomes: Vec<usize>,
    pub probability: f64,
    pub correction: CorrectionOutcome,
    /// Fidelity of the corrected state against the target; absent when the
    /// correction failed.
    pub fidelity: Option<f64>,
    /// Residual operator M (reference method only).
    pub residual_operator: Option<DMatrix<Complex64>>,
}

/// Outcome of the secret-independent reference run.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub branches: Vec<BranchResult>,
    /// True when every branch admits a correction: the protocol transfers
    /// entanglement intact and therefore works for every secret.
    pub all_correctable: bool,
}

/// Role of one position in the working register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// Reference half of Bell pair i (never touched by the protocol).
    Ref(usize),
    /// Secret qubit i, or the input half of Bell pair i standing in for it.
    Secret(usize),
    Channel(usize),
}

#[derive(Debug, Clone)]
struct ExecBranch {
    outcomes: Vec<usize>,
    probability: f64,
    state: PureState,
}

/// Execute the first `stages` measurement steps over all branches.
/// Returns the surviving branches (ordered lexicographically by outcome
/// tuple) and the roles of the remaining register positions.
fn execute_measurements(
    initial: PureState,
    slots: Vec<Slot>,
    spec: &ProtocolSpec,
    stages: usize,
) -> Result<(Vec<ExecBranch>, Vec<Slot>), ProtocolError> {
    let mut branches = vec![ExecBranch {
        outcomes: Vec::new(),
        probability: 1.0,
        state: initial,
    }];
    let mut slots = slots;
    for (step_index, (_, step)) in spec.measure_steps().enumerate().take(stages) {
        let Step::Measure { qubits, basis, .. } = step else {
            unreachable!("measure_steps yields only measurements");
        };
        let positions: Vec<usize> = qubits
            .iter()
            .map(|q| {
                let role = match q {
                    StepQubit::Secret(i) => Slot::Secret(*i),
                    StepQubit::Channel(j) => Slot::Channel(*j),
                };
                slots
                    .iter()
                    .position(|&s| s == role)
                    .map(|p| p + 1)
                    .ok_or(ProtocolError::ResidualMismatch)
            })
            .collect::<Result<_, _>>()?;

        let mut next = Vec::with_capacity(branches.len() * (1 << positions.len()));
        let mut kept: Option<Vec<usize>> = None;
        for branch in branches {
            let chosen = match basis {
                BasisChoice::Fixed(b) => b,
                BasisChoice::ByOutcome(arms) => arms
                    .iter()
                    .find(|(prefix, _)| prefix == &branch.outcomes)
                    .map(|(_, b)| b)
                    .ok_or_else(|| ProtocolError::MissingAdaptiveBasis {
                        step: step_index,
                        outcomes: branch.outcomes.clone(),
                    })?,
            };
            let ensemble = branch.state.measure(&positions, chosen)?;
            kept.get_or_insert_with(|| ensemble.kept_qubits.clone());
            for measured in ensemble.branches {
                let mut outcomes = branch.outcomes.clone();
                outcomes.push(measured.outcome);
                next.push(ExecBranch {
                    outcomes,
                    probability: branch.probability * measured.probability,
                    state: measured.state,
                });
            }
        }
        branches = next;
        let kept = kept.ok_or(ProtocolError::ResidualMismatch)?;
        slots = kept.into_iter().map(|p| slots[p - 1]).collect();
    }
    Ok((branches, slots))
}

fn check_runnable(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
    composite_qubits: usize,
) -> Result<(), ProtocolError> {
    let violations = spec.validate();
    if !violations.is_empty() {
        return Err(ProtocolError::Invalid(violations));
    }
    if channel.num_qubits != spec.assignment.channel_qubits() {
        return Err(ProtocolError::ChannelMismatch {
            channel: channel.num_qubits,
            expected: spec.assignment.channel_qubits(),
        });
    }
    if composite_qubits > MAX_QUBITS {
        return Err(ProtocolError::RegisterTooLarge(composite_qubits));
    }
    Ok(())
}

/// Execute the protocol on an explicit secret, exhaustively over all
/// measurement branches, and score every branch by the fidelity of the
/// receiver's corrected state against the input secret.
///
/// In auto mode the per-branch correction comes from the reference run and
/// is therefore independent of the secret, as a broadcast correction rule
/// must be.
pub fn run_with_secret(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
    secret: &PureState,
) -> Result<Vec<BranchResult>, ProtocolError> {
    let n = spec.assignment.secret_qubits();
    check_runnable(channel, spec, n + channel.num_qubits)?;
    if secret.num_qubits() != n {
        return Err(ProtocolError::SecretSize {
            expected: n,
            got: secret.num_qubits(),
        });
    }

    let reference_corrections: Option<Vec<(Vec<usize>, CorrectionOutcome)>> =
        match spec.correction_mode() {
            Some(CorrectionMode::Auto) => Some(
                run_reference(channel, spec)?
                    .branches
                    .into_iter()
                    .map(|b| (b.outcomes, b.correction))
                    .collect(),
            ),
            _ => None,
        };

    let composite = secret.tensor(&channel.state);
    let slots: Vec<Slot> = (1..=n)
        .map(Slot::Secret)
        .chain((1..=channel.num_qubits).map(Slot::Channel))
        .collect();
    let stages = spec.num_measure_steps();
    let (branches, remaining) = execute_measurements(composite, slots, spec, stages)?;
    expect_slots(&remaining, &receiver_slots(spec))?;

    let receiver_positions: Vec<usize> = (1..=n).collect();
    let mut results = Vec::with_capacity(branches.len());
    for branch in branches {
        let correction = match spec.correction_mode() {
            Some(CorrectionMode::Auto) => reference_corrections
                .as_ref()
                .expect("computed for auto mode")
                .iter()
                .find(|(outcomes, _)| outcomes == &branch.outcomes)
                .map(|(_, c)| c.clone())
                // any branch reachable with some secret is reachable in the
                // reference run, whose input is maximally mixed on the
                // secret slots
                .ok_or_else(|| ProtocolError::UnlistedOutcome {
                    outcomes: branch.outcomes.clone(),
                })?,
            Some(CorrectionMode::Explicit(table)) => table
                .get(&branch.outcomes)
                .map(|u| CorrectionOutcome::Applied(u.clone()))
                .ok_or_else(|| ProtocolError::UnlistedOutcome {
                    outcomes: branch.outcomes.clone(),
                })?,
            None => unreachable!("validated: final step is Correct"),
        };
        let fidelity = match &correction {
            CorrectionOutcome::Applied(u) => {
                let corrected = branch.state.apply_on(&receiver_positions, u)?;
                Some(corrected.fidelity(secret)?)
            }
            CorrectionOutcome::Failed(_) => None,
        };
        results.push(BranchResult {
            outcomes: branch.outcomes,
            probability: branch.probability,
            correction,
            fidelity,
            residual_operator: None,
        });
    }
    Ok(results)
}

/// Secret-independent verdict: run the protocol with the input halves of n
/// Bell pairs standing in for the secret. A branch is correctable exactly
/// when its residual operator M satisfies M†M ∝ I; the protocol splits
/// every secret perfectly iff every branch is correctable.
pub fn run_reference(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
) -> Result<ReferenceRun, ProtocolError> {
    let n = spec.assignment.secret_qubits();
    check_runnable(channel, spec, 2 * n + channel.num_qubits)?;

    let pairs = bell_pairs(n).map_err(|_| ProtocolError::RegisterTooLarge(2 * n))?;
    let composite = pairs.state.tensor(&channel.state);
    let mut slots: Vec<Slot> = Vec::with_capacity(2 * n + channel.num_qubits);
    for i in 1..=n {
        slots.push(Slot::Ref(i));
        slots.push(Slot::Secret(i));
    }
    slots.extend((1..=channel.num_qubits).map(Slot::Channel));

    let stages = spec.num_measure_steps();
    let (branches, remaining) = execute_measurements(composite, slots, spec, stages)?;
    let expected: Vec<Slot> = (1..=n).map(Slot::Ref).chain(receiver_slots(spec)).collect();
    expect_slots(&remaining, &expected)?;

    let ref_positions: Vec<usize> = (1..=n).collect();
    let receiver_positions: Vec<usize> = (n + 1..=2 * n).collect();
    let target = entangled_target(n);

    let mut results = Vec::with_capacity(branches.len());
    let mut all_correctable = true;
    for branch in branches {
        let m = branch
            .state
            .as_operator(&ref_positions, &receiver_positions)?;
        let (correction, fidelity) = match synthesize_correction(&m) {
            Ok(u) => {
                let corrected = branch.state.apply_on(&receiver_positions, &u)?;
                let f = corrected.fidelity(&target)?;
                (CorrectionOutcome::Applied(u), Some(f))
            }
            Err(reason) => {
                all_correctable = false;
                (CorrectionOutcome::Failed(reason), None)
            }
        };
        results.push(BranchResult {
            outcomes: branch.outcomes,
            probability: branch.probability,
            correction,
            fidelity,
            residual_operator: Some(m),
        });
    }
    Ok(ReferenceRun {
        branches: results,
        all_correctable,
    })
}

/// |Φ+⟩^⊗n regrouped as [all reference qubits][all receiver qubits].
fn entangled_target(n: usize) -> PureState {
    let half = 1usize << n;
    let amp = Complex64::new(1.0 / (half as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; half * half];
    for x in 0..half {
        amps[(x << n) | x] = amp;
    }
    PureState::new(2 * n, amps).expect("normalized by construction")
}

fn receiver_slots(spec: &ProtocolSpec) -> Vec<Slot> {
    spec.assignment
        .receiver_block()
        .iter()
        .map(|&j| Slot::Channel(j))
        .collect()
}

fn expect_slots(got: &[Slot], expected: &[Slot]) -> Result<(), ProtocolError> {
    if got == expected {
        Ok(())
    } else {
        Err(ProtocolError::ResidualMismatch)
    }
}

/// Synthesize the receiver's correction from the residual operator M of a
/// reference branch: the unique (up to global phase) U with
/// (I ⊗ U)·residual = |Φ+⟩^⊗n, namely (Mᵀ)⁻¹ rescaled to unitarity.
///
/// Fails with `Singular` when M is rank-deficient and with
/// `NotProportional` when M†M is not a multiple of the identity.
pub fn synthesize_correction(m: &DMatrix<Complex64>) -> Result<Unitary, SynthesisFailure> {
    assert_eq!(m.nrows(), m.ncols(), "residual operator must be square");
    let dim = m.nrows();
    let gram = m.adjoint() * m;
    let scale = gram.trace().re / dim as f64;
    let identity = DMatrix::<Complex64>::identity(dim, dim);
    let deviation = (&gram - identity.scale(scale))
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max);
    if deviation > tol::CORRECTABILITY || scale <= tol::CORRECTABILITY {
        let singular_values = m.clone().svd(false, false).singular_values;
        let smin = singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        return Err(if smin <= tol::CORRECTABILITY {
            SynthesisFailure::Singular
        } else {
            SynthesisFailure::NotProportional
        });
    }
    let inverse = m
        .transpose()
        .try_inverse()
        .ok_or(SynthesisFailure::Singular)?;
    // rescale to unitarity: ‖M v‖² = scale ‖v‖² makes √scale·(Mᵀ)⁻¹ unitary
    let u = inverse.scale(scale.sqrt());
    let check = Unitary::from_trusted(u);
    if check.unitarity_deviation() > tol::CORRECTABILITY {
        return Err(SynthesisFailure::NotProportional);
    }
    Ok(check)
}

/// Average the branches of a measurement prefix and compare party `p`'s
/// marginal with its pre-protocol value (trace distance, maximized over a
/// spanning probe family of secrets and over the reference input).
///
/// Measurement without communication cannot move a disjoint marginal, so
/// the result is bounded by numerical noise for any valid protocol; values
/// above 1e-9 indicate a simulator defect.
pub fn no_signaling_check(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
    party: usize,
    stage: usize,
) -> Result<f64, ProtocolError> {
    let n = spec.assignment.secret_qubits();
    check_runnable(channel, spec, 2 * n + channel.num_qubits)?;
    let parties = spec.assignment.num_parties();
    if party == 0 || party > parties {
        return Err(ProtocolError::UnknownParty { party, parties });
    }
    let measures = spec.num_measure_steps();
    if stage > measures {
        return Err(ProtocolError::UnknownStage { stage, measures });
    }

    // roles owned by the party, minus those consumed within the prefix
    let mut owned: Vec<Slot> = spec
        .assignment
        .block(party)
        .iter()
        .map(|&j| Slot::Channel(j))
        .collect();
    if party == 1 {
        owned.extend((1..=n).map(Slot::Secret));
    }
    let consumed = consumed_roles(spec, stage);
    let kept_roles: Vec<Slot> = owned
        .into_iter()
        .filter(|r| !consumed.contains(r))
        .collect();
    if kept_roles.is_empty() {
        // nothing of the party's remains in play: trivially unchanged
        return Ok(0.0);
    }

    let mut composites: Vec<(PureState, Vec<Slot>)> = Vec::new();
    {
        let pairs = bell_pairs(n).map_err(|_| ProtocolError::RegisterTooLarge(2 * n))?;
        let mut slots = Vec::new();
        for i in 1..=n {
            slots.push(Slot::Ref(i));
            slots.push(Slot::Secret(i));
        }
        slots.extend((1..=channel.num_qubits).map(Slot::Channel));
        composites.push((pairs.state.tensor(&channel.state), slots));
    }
    for secret in spanning_states(n) {
        let slots: Vec<Slot> = (1..=n)
            .map(Slot::Secret)
            .chain((1..=channel.num_qubits).map(Slot::Channel))
            .collect();
        composites.push((secret.tensor(&channel.state), slots));
    }

    let mut worst = 0.0f64;
    for (composite, slots) in composites {
        let initial_positions = positions_of(&slots, &kept_roles);
        let before = composite.partial_trace(&initial_positions)?;
        let (branches, remaining) = execute_measurements(composite, slots, spec, stage)?;
        let branch_positions = positions_of(&remaining, &kept_roles);
        let parts: Vec<(f64, DensityMatrix)> = branches
            .iter()
            .map(|b| {
                b.state
                    .partial_trace(&branch_positions)
                    .map(|rho| (b.probability, rho))
            })
            .collect::<Result<_, _>>()?;
        let after = DensityMatrix::mixture(&parts).expect("at least one branch survives");
        worst = worst.max(after.trace_distance(&before));
    }
    Ok(worst)
}

fn positions_of(slots: &[Slot], roles: &[Slot]) -> Vec<usize> {
    slots
        .iter()
        .enumerate()
        .filter(|(_, s)| roles.contains(s))
        .map(|(p, _)| p + 1)
        .collect()
}

/// Branch-averaged reduced state of `party`'s surviving qubits after the
/// first `stage` measurement steps, with the given secret. `None` when
/// nothing of the party's remains in play. The average is taken without
/// conditioning on any outcome: it models what the party holds before any
/// broadcast reaches it.
pub fn averaged_marginal(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
    secret: &PureState,
    party: usize,
    stage: usize,
) -> Result<Option<DensityMatrix>, ProtocolError> {
    let n = spec.assignment.secret_qubits();
    check_runnable(channel, spec, n + channel.num_qubits)?;
    let parties = spec.assignment.num_parties();
    if party == 0 || party > parties {
        return Err(ProtocolError::UnknownParty { party, parties });
    }
    let measures = spec.num_measure_steps();
    if stage > measures {
        return Err(ProtocolError::UnknownStage { stage, measures });
    }
    if secret.num_qubits() != n {
        return Err(ProtocolError::SecretSize {
            expected: n,
            got: secret.num_qubits(),
        });
    }

    let mut owned: Vec<Slot> = spec
        .assignment
        .block(party)
        .iter()
        .map(|&j| Slot::Channel(j))
        .collect();
    if party == 1 {
        owned.extend((1..=n).map(Slot::Secret));
    }
    let consumed = consumed_roles(spec, stage);
    let kept_roles: Vec<Slot> = owned
        .into_iter()
        .filter(|r| !consumed.contains(r))
        .collect();
    if kept_roles.is_empty() {
        return Ok(None);
    }

    let composite = secret.tensor(&channel.state);
    let slots: Vec<Slot> = (1..=n)
        .map(Slot::Secret)
        .chain((1..=channel.num_qubits).map(Slot::Channel))
        .collect();
    let (branches, remaining) = execute_measurements(composite, slots, spec, stage)?;
    let positions = positions_of(&remaining, &kept_roles);
    let parts: Vec<(f64, DensityMatrix)> = branches
        .iter()
        .map(|b| {
            b.state
                .partial_trace(&positions)
                .map(|rho| (b.probability, rho))
        })
        .collect::<Result<_, _>>()?;
    Ok(Some(
        DensityMatrix::mixture(&parts).expect("at least one branch survives"),
    ))
}

/// Conditional reduced states of the receiver block given each outcome
/// tuple of the first `stage` measurement steps: (outcomes, probability,
/// receiver marginal), ordered by outcome tuple.
pub fn conditional_receiver_marginals(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
    secret: &PureState,
    stage: usize,
) -> Result<Vec<(Vec<usize>, f64, DensityMatrix)>, ProtocolError> {
    let n = spec.assignment.secret_qubits();
    check_runnable(channel, spec, n + channel.num_qubits)?;
    let measures = spec.num_measure_steps();
    if stage > measures {
        return Err(ProtocolError::UnknownStage { stage, measures });
    }
    if secret.num_qubits() != n {
        return Err(ProtocolError::SecretSize {
            expected: n,
            got: secret.num_qubits(),
        });
    }
    let composite = secret.tensor(&channel.state);
    let slots: Vec<Slot> = (1..=n)
        .map(Slot::Secret)
        .chain((1..=channel.num_qubits).map(Slot::Channel))
        .collect();
    let (branches, remaining) = execute_measurements(composite, slots, spec, stage)?;
    let positions = positions_of(&remaining, &receiver_slots(spec));
    branches
        .into_iter()
        .map(|b| {
            b.state
                .partial_trace(&positions)
                .map(|rho| (b.outcomes, b.probability, rho))
                .map_err(ProtocolError::from)
        })
        .collect()
}

fn consumed_roles(spec: &ProtocolSpec, stage: usize) -> Vec<Slot> {
    let mut consumed = Vec::new();
    for (_, step) in spec.measure_steps().take(stage) {
        if let Step::Measure { qubits, .. } = step {
            consumed.extend(qubits.iter().map(|q| match q {
                StepQubit::Secret(i) => Slot::Secret(*i),
                StepQubit::Channel(j) => Slot::Channel(*j),
            }));
        }
    }
    consumed
}
