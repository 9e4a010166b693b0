//! Enumeration of qubit distributions, the dealer-minimum filter, protocol
//! search over the canonical basis library, and security audits of found
//! protocols.

mod audit;
mod library;

pub use audit::{audit_security, SecurityAudit, AUDIT_SEED};
pub use library::{ghz_family, product_bases, BasisLibrary};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::channels::ChannelDescriptor;
use crate::counting::{constrained_compositions, max_protocols, CountQuery};
use crate::protocol::{
    run_reference, BasisChoice, CorrectionMode, PartyAssignment, ProtocolError, ProtocolSpec, Step,
    StepQubit,
};
use crate::statevec::MeasurementBasis;

#[derive(Debug, Error)]
pub enum FeasibilityError {
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Every contiguous distribution of N channel qubits over k ≥ 3 parties
/// with the receiver pinned to the last n qubits and every party holding at
/// least one qubit, in lexicographic order of block sizes. No dealer-size
/// constraint is applied here.
pub fn enumerate_assignments(
    channel_qubits: usize,
    secret_qubits: usize,
    parties: usize,
) -> Result<Vec<PartyAssignment>, FeasibilityError> {
    if parties < 3 {
        return Err(FeasibilityError::Domain(format!(
            "need at least 3 parties, got {parties}"
        )));
    }
    if secret_qubits < 1 || secret_qubits > channel_qubits {
        return Err(FeasibilityError::Domain(format!(
            "secret size must satisfy N ≥ n ≥ 1, got N={channel_qubits}, n={secret_qubits}"
        )));
    }
    let free = channel_qubits - secret_qubits;
    let compositions = constrained_compositions(free, parties - 1, 1, 1);
    compositions
        .into_iter()
        .map(|mut sizes| {
            sizes.push(secret_qubits);
            PartyAssignment::contiguous(channel_qubits, secret_qubits, &sizes)
                .map_err(FeasibilityError::from)
        })
        .collect()
}

/// Split assignments by the dealer-minimum rule: a dealer holding fewer
/// channel qubits than the secret cannot broadcast the 2n bits a working
/// protocol requires. Returns (kept, removed).
pub fn dealer_minimum_filter(
    assignments: Vec<PartyAssignment>,
) -> (Vec<PartyAssignment>, Vec<PartyAssignment>) {
    assignments
        .into_iter()
        .partition(|a| a.dealer_block().len() >= a.secret_qubits())
}

/// Search configuration: the basis library and whether filtered-out
/// assignments should also be searched to confirm they fail.
#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub library: BasisLibrary,
    pub audit_filtered: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            library: BasisLibrary::canonical(),
            audit_filtered: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibleReason {
    /// Removed without search: dealer block smaller than the secret.
    DealerMinimum,
    /// Every candidate basis combination left some branch uncorrectable.
    SearchExhausted,
}

#[derive(Debug, Clone)]
pub enum VerdictStatus {
    Feasible(Box<ProtocolSpec>),
    Infeasible(InfeasibleReason),
    /// Not searched: some measured block exceeds the library cap.
    Skipped(String),
}

impl VerdictStatus {
    pub fn is_feasible(&self) -> bool {
        matches!(self, VerdictStatus::Feasible(_))
    }
}

/// What a search actually tried. Completeness of an infeasible verdict is
/// always relative to the library; the cap is recorded so every verdict
/// states the search space it exhausted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub bases_tried: usize,
    pub branches_evaluated: usize,
    pub library_cap: usize,
}

impl SearchStats {
    fn for_library(library: &BasisLibrary) -> Self {
        Self {
            library_cap: library.cap(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeasibilityVerdict {
    pub assignment: PartyAssignment,
    pub status: VerdictStatus,
    pub stats: SearchStats,
}

/// Candidate protocol for an assignment: the dealer measures the secret
/// plus its whole block in one basis, each middle party measures its whole
/// block in one basis, the receiver auto-corrects.
fn candidate_spec(
    assignment: &PartyAssignment,
    dealer_basis: &MeasurementBasis,
    middle_bases: &[MeasurementBasis],
) -> ProtocolSpec {
    let n = assignment.secret_qubits();
    let mut steps = Vec::with_capacity(assignment.num_parties());
    let dealer_qubits: Vec<StepQubit> = (1..=n)
        .map(StepQubit::Secret)
        .chain(
            assignment
                .dealer_block()
                .iter()
                .map(|&j| StepQubit::Channel(j)),
        )
        .collect();
    steps.push(Step::Measure {
        party: 1,
        qubits: dealer_qubits,
        basis: BasisChoice::Fixed(dealer_basis.clone()),
    });
    for (index, basis) in middle_bases.iter().enumerate() {
        let party = index + 2;
        steps.push(Step::Measure {
            party,
            qubits: assignment
                .block(party)
                .iter()
                .map(|&j| StepQubit::Channel(j))
                .collect(),
            basis: BasisChoice::Fixed(basis.clone()),
        });
    }
    steps.push(Step::Correct {
        mode: CorrectionMode::Auto,
    });
    ProtocolSpec::new(assignment.clone(), steps)
}

/// Exhaustive search over the library for one assignment. Returns the first
/// protocol whose reference run corrects every branch, in the deterministic
/// candidate order (dealer basis outermost, then middle parties in order).
pub fn search(
    channel: &ChannelDescriptor,
    assignment: &PartyAssignment,
    config: &SearchConfig,
) -> Result<FeasibilityVerdict, FeasibilityError> {
    if channel.num_qubits != assignment.channel_qubits() {
        return Err(FeasibilityError::Protocol(ProtocolError::ChannelMismatch {
            channel: channel.num_qubits,
            expected: assignment.channel_qubits(),
        }));
    }
    let n = assignment.secret_qubits();
    let dealer_arity = n + assignment.dealer_block().len();
    let middle_arities: Vec<usize> = (2..assignment.num_parties())
        .map(|party| assignment.block(party).len())
        .collect();

    let mut stats = SearchStats::for_library(&config.library);
    for (label, arity) in std::iter::once(("dealer", dealer_arity))
        .chain(middle_arities.iter().map(|&a| ("middle party", a)))
    {
        if !config.library.supports(arity) {
            return Ok(FeasibilityVerdict {
                assignment: assignment.clone(),
                status: VerdictStatus::Skipped(format!(
                    "{label} block of {arity} qubits exceeds the library cap of {}",
                    config.library.cap()
                )),
                stats,
            });
        }
    }

    let dealer_candidates = config.library.candidates(dealer_arity);
    let middle_candidates: Vec<Vec<MeasurementBasis>> = middle_arities
        .iter()
        .map(|&a| config.library.candidates(a))
        .collect();

    let mut selection = vec![0usize; middle_candidates.len()];
    for dealer_basis in &dealer_candidates {
        selection.iter_mut().for_each(|s| *s = 0);
        loop {
            let middles: Vec<MeasurementBasis> = selection
                .iter()
                .zip(&middle_candidates)
                .map(|(&i, c)| c[i].clone())
                .collect();
            let spec = candidate_spec(assignment, dealer_basis, &middles);
            let run = run_reference(channel, &spec)?;
            stats.bases_tried += 1;
            stats.branches_evaluated += run.branches.len();
            if run.all_correctable {
                return Ok(FeasibilityVerdict {
                    assignment: assignment.clone(),
                    status: VerdictStatus::Feasible(Box::new(spec)),
                    stats,
                });
            }
            // odometer over the middle-party candidate lists
            let mut pos = selection.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                selection[pos] += 1;
                if selection[pos] < middle_candidates[pos].len() {
                    break;
                }
                selection[pos] = 0;
                if pos == 0 {
                    break;
                }
            }
            if selection.iter().all(|&s| s == 0) {
                break;
            }
        }
    }
    Ok(FeasibilityVerdict {
        assignment: assignment.clone(),
        status: VerdictStatus::Infeasible(InfeasibleReason::SearchExhausted),
        stats,
    })
}

/// Survey of a channel: every assignment in enumeration order with its
/// verdict, plus the feasible count and the closed-form ceiling.
#[derive(Debug, Clone, Serialize)]
pub struct Survey {
    pub channel: String,
    pub channel_qubits: usize,
    pub secret_qubits: usize,
    pub parties: usize,
    pub verdicts: Vec<FeasibilityVerdict>,
    pub feasible_count: usize,
    /// C(N−2n, k−2): the count can never exceed this.
    pub bound: u64,
}

/// Enumerate, filter, and search every distribution of the channel.
pub fn survey(
    channel: &ChannelDescriptor,
    secret_qubits: usize,
    parties: usize,
    config: &SearchConfig,
) -> Result<Survey, FeasibilityError> {
    let assignments = enumerate_assignments(channel.num_qubits, secret_qubits, parties)?;
    let mut verdicts = Vec::with_capacity(assignments.len());
    for assignment in assignments {
        let filtered = assignment.dealer_block().len() < secret_qubits;
        let verdict = if filtered && !config.audit_filtered {
            FeasibilityVerdict {
                assignment,
                status: VerdictStatus::Infeasible(InfeasibleReason::DealerMinimum),
                stats: SearchStats::for_library(&config.library),
            }
        } else if filtered {
            // confirm by search; an (impossible) find would surface loudly
            let mut verdict = search(channel, &assignment, config)?;
            match &mut verdict.status {
                VerdictStatus::Infeasible(reason) => *reason = InfeasibleReason::DealerMinimum,
                // the filter verdict stands even when the confirming search
                // could not cover some block
                VerdictStatus::Skipped(_) => {
                    verdict.status = VerdictStatus::Infeasible(InfeasibleReason::DealerMinimum)
                }
                VerdictStatus::Feasible(_) => {}
            }
            verdict
        } else {
            search(channel, &assignment, config)?
        };
        verdicts.push(verdict);
    }
    let feasible_count = verdicts.iter().filter(|v| v.status.is_feasible()).count();
    let bound = CountQuery::new(channel.num_qubits, secret_qubits, parties)
        .map(|q| max_protocols(&q))
        .unwrap_or(0);
    Ok(Survey {
        channel: channel.name.clone(),
        channel_qubits: channel.num_qubits,
        secret_qubits,
        parties,
        verdicts,
        feasible_count,
        bound,
    })
}

impl Serialize for FeasibilityVerdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("FeasibilityVerdict", 6)?;
        state.serialize_field("blocks", self.assignment.blocks())?;
        state.serialize_field("sizes", &self.assignment.sizes())?;
        match &self.status {
            VerdictStatus::Feasible(spec) => {
                state.serialize_field("status", "feasible")?;
                state.serialize_field("detail", &None::<String>)?;
                state.serialize_field("protocol", spec)?;
            }
            VerdictStatus::Infeasible(reason) => {
                state.serialize_field("status", "infeasible")?;
                state.serialize_field("detail", reason)?;
                state.serialize_field("protocol", &None::<String>)?;
            }
            VerdictStatus::Skipped(why) => {
                state.serialize_field("status", "skipped")?;
                state.serialize_field("detail", why)?;
                state.serialize_field("protocol", &None::<String>)?;
            }
        }
        state.serialize_field("stats", &self.stats)?;
        state.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels;

    #[test]
    fn enumerate_known_distributions() {
        let sizes = |n, s, k| -> Vec<Vec<usize>> {
            enumerate_assignments(n, s, k)
                .unwrap()
                .iter()
                .map(|a| a.sizes())
                .collect()
        };
        assert_eq!(sizes(4, 1, 3), vec![vec![1, 2, 1], vec![2, 1, 1]]);
        assert_eq!(sizes(4, 2, 3), vec![vec![1, 1, 2]]);
        // compositions of 5 into 3 positive parts
        assert_eq!(sizes(6, 1, 4).len(), 6);
        assert!(enumerate_assignments(3, 2, 3).unwrap().is_empty());
        assert!(enumerate_assignments(4, 1, 2).is_err());
        assert!(enumerate_assignments(4, 0, 3).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_contiguous() {
        let assignments = enumerate_assignments(6, 1, 4).unwrap();
        let sizes: Vec<Vec<usize>> = assignments.iter().map(|a| a.sizes()).collect();
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sizes, sorted);
        for a in &assignments {
            assert!(a.is_contiguous());
            assert_eq!(*a.receiver_block(), vec![6]);
        }
    }

    #[test]
    fn dealer_filter_examples() {
        let (kept, removed) = dealer_minimum_filter(enumerate_assignments(4, 2, 3).unwrap());
        assert!(kept.is_empty());
        assert_eq!(removed.len(), 1);

        let (kept, removed) = dealer_minimum_filter(enumerate_assignments(4, 1, 3).unwrap());
        assert_eq!(kept.len(), 2);
        assert!(removed.is_empty());

        let (kept, _) = dealer_minimum_filter(enumerate_assignments(6, 2, 3).unwrap());
        let sizes: Vec<Vec<usize>> = kept.iter().map(|a| a.sizes()).collect();
        assert_eq!(sizes, vec![vec![2, 2, 2], vec![3, 1, 2]]);
    }

    #[test]
    fn search_recovers_the_hillery_protocol() {
        let channel = channels::ghz(3).unwrap();
        let assignment = PartyAssignment::contiguous(3, 1, &[1, 1, 1]).unwrap();
        let verdict = search(&channel, &assignment, &SearchConfig::default()).unwrap();
        let VerdictStatus::Feasible(spec) = &verdict.status else {
            panic!("expected feasible, got {:?}", verdict.status);
        };
        let Step::Measure { basis, .. } = &spec.steps[0] else {
            panic!()
        };
        let BasisChoice::Fixed(b) = basis else {
            panic!()
        };
        assert_eq!(b.name(), "bell");
    }

    #[test]
    fn search_recovers_the_ghz_basis_protocol_shape() {
        let channel = channels::ghz(4).unwrap();
        let assignment = PartyAssignment::contiguous(4, 1, &[2, 1, 1]).unwrap();
        let verdict = search(&channel, &assignment, &SearchConfig::default()).unwrap();
        let VerdictStatus::Feasible(spec) = &verdict.status else {
            panic!("expected feasible, got {:?}", verdict.status);
        };
        let Step::Measure { basis, .. } = &spec.steps[0] else {
            panic!()
        };
        let BasisChoice::Fixed(b) = basis else {
            panic!()
        };
        assert_eq!(b.name(), "ghz");
    }

    #[test]
    fn oversized_blocks_are_skipped_not_searched() {
        let channel = channels::ghz(7).unwrap();
        // middle party holds 5 qubits: beyond the cap
        let assignment = PartyAssignment::contiguous(7, 1, &[1, 5, 1]).unwrap();
        let verdict = search(&channel, &assignment, &SearchConfig::default()).unwrap();
        assert!(matches!(verdict.status, VerdictStatus::Skipped(_)));
        assert_eq!(verdict.stats.bases_tried, 0);
    }

    #[test]
    fn survey_ghz4_finds_exactly_two_ways() {
        let channel = channels::ghz(4).unwrap();
        let survey = survey(&channel, 1, 3, &SearchConfig::default()).unwrap();
        assert_eq!(survey.feasible_count, 2);
        assert_eq!(survey.bound, 2);
        assert_eq!(survey.verdicts.len(), 2);
    }

    #[test]
    fn survey_cluster4_finds_nothing_for_two_qubit_secrets() {
        let channel = channels::cluster4();
        let report = survey(&channel, 2, 3, &SearchConfig::default()).unwrap();
        assert_eq!(report.feasible_count, 0);
        assert_eq!(report.bound, 0);
        assert!(matches!(
            report.verdicts[0].status,
            VerdictStatus::Infeasible(InfeasibleReason::DealerMinimum)
        ));

        // and the searched variant still fails
        let audited = survey(
            &channel,
            2,
            3,
            &SearchConfig {
                audit_filtered: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(audited.feasible_count, 0);
        assert!(audited.verdicts[0].stats.bases_tried > 0);
    }

    #[test]
    fn ghz5_two_qubit_survey_respects_the_bound() {
        let channel = channels::ghz(5).unwrap();
        let report = survey(&channel, 2, 3, &SearchConfig::default()).unwrap();
        assert!(report.feasible_count as u64 <= report.bound);
        assert_eq!(report.bound, 1);
        // one ebit across the receiver cut cannot carry a two-qubit secret
        assert_eq!(report.feasible_count, 0);
    }

    #[test]
    fn ghz_channels_attain_the_three_party_bound() {
        for (channel_qubits, secret) in [(3usize, 1usize), (4, 1), (5, 1)] {
            let channel = channels::ghz(channel_qubits).unwrap();
            let report = survey(&channel, secret, 3, &SearchConfig::default()).unwrap();
            let bound = (channel_qubits - 2 * secret) as u64;
            assert_eq!(report.bound, bound);
            assert_eq!(
                report.feasible_count as u64, bound,
                "ghz{channel_qubits} n={secret}"
            );
        }
    }
}
