use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::ChannelDescriptor;
use crate::protocol::{
    averaged_marginal, conditional_receiver_marginals, run_with_secret, ProtocolError,
    ProtocolSpec, Step,
};
use crate::statevec::{random_state, DensityMatrix, PureState};
use crate::tol;

/// Seed of the random audit probes; fixed so reports are reproducible.
pub const AUDIT_SEED: u64 = 7;

/// Security audit of a working protocol, as maxima over probe-secret
/// families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityAudit {
    /// (a) Largest trace distance between any non-dealer party's
    /// pre-disclosure state under different secrets. Anything above noise
    /// would let that party learn about the secret without communication.
    pub independence_max_distance: f64,
    /// (b) Largest trace distance between the receiver's states, given only
    /// the dealer's outcome, for secrets of equal amplitude moduli but
    /// different phases. The dealer's broadcast reveals amplitude weights
    /// only; the phases stay hidden until the middle parties speak.
    pub phase_max_distance: f64,
    /// (c) Smallest branch fidelity over all probe secrets once every
    /// outcome is available.
    pub completeness_min_fidelity: f64,
}

impl SecurityAudit {
    pub fn independence_ok(&self) -> bool {
        self.independence_max_distance <= tol::SIGNALING
    }

    pub fn phase_ok(&self) -> bool {
        self.phase_max_distance <= tol::SIGNALING
    }

    pub fn completeness_ok(&self) -> bool {
        self.completeness_min_fidelity >= 1.0 - tol::PERFECT_FIDELITY
    }

    pub fn all_ok(&self) -> bool {
        self.independence_ok() && self.phase_ok() && self.completeness_ok()
    }
}

/// Run the three audit checks over the probe families: Pauli-eigenstate
/// products plus seeded random secrets for (a) and (c), equal-modulus
/// phase pairs for (b).
pub fn audit_security(
    channel: &ChannelDescriptor,
    spec: &ProtocolSpec,
) -> Result<SecurityAudit, ProtocolError> {
    let n = spec.assignment.secret_qubits();
    let probes = probe_secrets(n);
    let stages = spec.num_measure_steps();
    let parties = spec.assignment.num_parties();

    // (a) pre-communication secret independence, per non-dealer party
    let mut independence_max: f64 = 0.0;
    for party in 2..=parties {
        let mut marginals: Vec<DensityMatrix> = Vec::with_capacity(probes.len());
        for secret in &probes {
            if let Some(rho) = averaged_marginal(channel, spec, secret, party, stages)? {
                marginals.push(rho);
            }
        }
        for (i, a) in marginals.iter().enumerate() {
            for b in &marginals[i + 1..] {
                independence_max = independence_max.max(a.trace_distance(b));
            }
        }
    }

    // (b) phase blindness of the receiver given only the dealer's outcome
    let dealer_stage = spec
        .measure_steps()
        .take_while(|(_, s)| matches!(s, Step::Measure { party: 1, .. }))
        .count();
    let mut phase_max: f64 = 0.0;
    for (base, variant) in phase_pairs(n) {
        let lhs = conditional_receiver_marginals(channel, spec, &base, dealer_stage)?;
        let rhs = conditional_receiver_marginals(channel, spec, &variant, dealer_stage)?;
        for (outcomes, _, rho) in &lhs {
            match rhs.iter().find(|(o, _, _)| o == outcomes) {
                Some((_, _, sigma)) => phase_max = phase_max.max(rho.trace_distance(sigma)),
                // an outcome reachable under one phase pattern only is
                // itself a phase leak
                None => phase_max = 1.0,
            }
        }
        for (outcomes, _, _) in &rhs {
            if !lhs.iter().any(|(o, _, _)| o == outcomes) {
                phase_max = 1.0;
            }
        }
    }

    // (c) completeness: with all outcomes, the receiver reconstructs
    let mut completeness_min: f64 = 1.0;
    for secret in &probes {
        for branch in run_with_secret(channel, spec, secret)? {
            completeness_min = completeness_min.min(branch.fidelity.unwrap_or(0.0));
        }
    }

    Ok(SecurityAudit {
        independence_max_distance: independence_max,
        phase_max_distance: phase_max,
        completeness_min_fidelity: completeness_min,
    })
}

/// Products of the six single-qubit Pauli eigenstates, plus four seeded
/// random states.
fn probe_secrets(num_qubits: usize) -> Vec<PureState> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let eigenstates: [(Complex64, Complex64); 6] = [
        (Complex64::ONE, Complex64::ZERO),
        (Complex64::ZERO, Complex64::ONE),
        (Complex64::new(r, 0.0), Complex64::new(r, 0.0)),
        (Complex64::new(r, 0.0), Complex64::new(-r, 0.0)),
        (Complex64::new(r, 0.0), Complex64::new(0.0, r)),
        (Complex64::new(r, 0.0), Complex64::new(0.0, -r)),
    ];
    let mut probes = Vec::new();
    let count = 6usize.pow(num_qubits as u32);
    for code in 0..count {
        let mut state: Option<PureState> = None;
        let mut rem = code;
        for _ in 0..num_qubits {
            let (alpha, beta) = eigenstates[rem % 6];
            rem /= 6;
            let qubit = PureState::qubit(alpha, beta).expect("normalized");
            state = Some(match state {
                None => qubit,
                Some(s) => s.tensor(&qubit),
            });
        }
        probes.push(state.expect("at least one qubit"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    for _ in 0..4 {
        probes.push(random_state(num_qubits, &mut rng));
    }
    probes
}

/// Pairs of secrets with identical amplitude moduli and different phases.
fn phase_pairs(num_qubits: usize) -> Vec<(PureState, PureState)> {
    let dim = 1usize << num_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED ^ 0x9e3779b9);
    let mut moduli_patterns: Vec<Vec<f64>> = vec![vec![1.0 / (dim as f64).sqrt(); dim]];
    for _ in 0..3 {
        let s = random_state(num_qubits, &mut rng);
        moduli_patterns.push(s.amplitudes().iter().map(|a| a.norm()).collect());
    }
    let mut pairs = Vec::new();
    for moduli in moduli_patterns {
        let base = PureState::new(
            num_qubits,
            moduli.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
        )
        .expect("moduli of a unit vector");
        // alternating sign pattern: for the uniform moduli on one qubit this
        // is exactly the (|0⟩+|1⟩)/√2 versus (|0⟩−|1⟩)/√2 pair
        let signed = PureState::new(
            num_qubits,
            moduli
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let sign = if (i as u32).count_ones().is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    Complex64::new(sign * m, 0.0)
                })
                .collect(),
        )
        .expect("same moduli");
        pairs.push((base.clone(), signed));
        for _ in 0..2 {
            let phased = PureState::new(
                num_qubits,
                moduli
                    .iter()
                    .map(|&m| {
                        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                        Complex64::from_polar(m, theta)
                    })
                    .collect(),
            )
            .expect("same moduli");
            pairs.push((base.clone(), phased));
        }
    }
    pairs
}
