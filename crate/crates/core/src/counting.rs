//! Closed-form protocol counts and exhaustive combinatorial cross-checks.
//!
//! Counting convention: the receiver holds exactly the last n qubits, and a
//! protocol is identified by its ordered tuple of party block sizes. With k
//! parties sharing an N-qubit channel and an n-qubit secret, the number of
//! workable distributions is C(N−2n, k−2): the dealer needs at least n
//! channel qubits, every middle party at least one.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountError {
    #[error("party count {0} is below the three-party minimum")]
    TooFewParties(usize),
    #[error("secret size must satisfy N ≥ n ≥ 1, got N={channel}, n={secret}")]
    BadSecretSize { channel: usize, secret: usize },
}

/// Parameters of a counting query: N channel qubits, an n-qubit secret,
/// k ≥ 3 parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountQuery {
    pub channel_qubits: usize,
    pub secret_qubits: usize,
    pub parties: usize,
}

impl CountQuery {
    pub fn new(
        channel_qubits: usize,
        secret_qubits: usize,
        parties: usize,
    ) -> Result<Self, CountError> {
        if parties < 3 {
            return Err(CountError::TooFewParties(parties));
        }
        if secret_qubits < 1 || secret_qubits > channel_qubits {
            return Err(CountError::BadSecretSize {
                channel: channel_qubits,
                secret: secret_qubits,
            });
        }
        Ok(Self {
            channel_qubits,
            secret_qubits,
            parties,
        })
    }
}

/// Maximum number of distributions: C(N−2n, k−2), zero whenever N−2n ≤ 0 or
/// N−2n < k−2. For k = 3 this reduces to max(N−2n, 0).
pub fn max_protocols(query: &CountQuery) -> u64 {
    let surplus = query.channel_qubits as i64 - 2 * query.secret_qubits as i64;
    let choose = query.parties as i64 - 2;
    if surplus <= 0 || surplus < choose {
        return 0;
    }
    binomial(surplus as u64, choose as u64)
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All ordered integer tuples of length `parts` summing to `total`, with
/// tuple\[0\] ≥ first_min and the rest ≥ other_min, in lexicographic order.
/// Infeasible parameters yield an empty list.
pub fn constrained_compositions(
    total: usize,
    parts: usize,
    first_min: usize,
    other_min: usize,
) -> Vec<Vec<usize>> {
    assert!(parts >= 1, "need at least one part");
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(parts);
    extend(total, parts, first_min, other_min, &mut prefix, &mut out);
    out
}

fn extend(
    remaining: usize,
    parts_left: usize,
    this_min: usize,
    other_min: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if parts_left == 1 {
        if remaining >= this_min {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    // leave at least other_min per remaining part
    let reserve = other_min * (parts_left - 1);
    if remaining < this_min + reserve {
        return;
    }
    for v in this_min..=(remaining - reserve) {
        prefix.push(v);
        extend(
            remaining - v,
            parts_left - 1,
            other_min,
            other_min,
            prefix,
            out,
        );
        prefix.pop();
    }
}

/// Formula-versus-enumeration comparison for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub formula: u64,
    pub enumerated: u64,
    #[serde(rename = "match")]
    pub matches: bool,
}

/// Count the non-receiver distributions directly, as compositions of N−n
/// qubits over the dealer (≥ n) plus k−2 middle parties (≥ 1 each), and
/// compare with the closed form.
pub fn crosscheck(query: &CountQuery) -> CrossCheck {
    let formula = max_protocols(query);
    let enumerated = constrained_compositions(
        query.channel_qubits - query.secret_qubits,
        query.parties - 1,
        query.secret_qubits,
        1,
    )
    .len() as u64;
    CrossCheck {
        formula,
        enumerated,
        matches: formula == enumerated,
    }
}
