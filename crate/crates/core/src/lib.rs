//! Simulator and verifier for measurement-based quantum information
//! splitting (QIS) over multi-qubit entangled channels.
//!
//! A dealer holds an unknown n-qubit secret and part of an N-qubit
//! entangled channel shared with other parties; local measurements and
//! broadcast outcomes let a designated receiver reconstruct the secret,
//! while no proper subset of parties can. This crate provides:
//!
//! - [`statevec`]: dense pure-state simulation (composition, sub-register
//!   unitaries, projective measurements in arbitrary bases, partial trace,
//!   fidelity, operator reshaping);
//! - [`channels`]: the built-in GHZ, cluster, and Bell-pair channels plus
//!   JSON channel files;
//! - [`protocol`]: protocol scripts, validation, exhaustive branch
//!   execution with explicit secrets or the entanglement-transfer reference
//!   method, correction synthesis, no-signaling checks, classical costs;
//! - [`feasibility`]: distribution enumeration, the dealer-minimum filter,
//!   protocol search over a canonical basis library, security audits;
//! - [`counting`]: the C(N−2n, k−2) protocol count and its exhaustive
//!   combinatorial cross-check;
//! - [`cryptobounds`]: the encryption argument behind the dealer bound
//!   (depolarizing mixtures, Choi ranks, minimum classical bits).

pub mod channels;
pub mod counting;
pub mod cryptobounds;
pub mod feasibility;
pub mod protocol;
pub mod statevec;
pub mod tol;
