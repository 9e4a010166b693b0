//! Built-in entangled channels and file I/O for user-supplied ones.
//!
//! Channel files are JSON with exact decimal-string amplitude pairs:
//! `{ "name": …, "num_qubits": N, "amplitudes": [["re","im"], …] }` with
//! 2^N entries ordered by the global index convention (qubit 1 most
//! significant). Strings keep save/load round trips bit-exact.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevec::PureState;
use crate::tol;

/// Largest register the dense simulator will build.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel needs at least {min} qubits, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("channel of {0} qubits exceeds the {MAX_QUBITS}-qubit dense limit")]
    TooManyQubits(usize),
    #[error("file holds {got} amplitudes, expected 2^{num_qubits} = {expected}")]
    AmplitudeCount {
        num_qubits: usize,
        expected: usize,
        got: usize,
    },
    #[error("unparsable amplitude component '{0}'")]
    BadAmplitude(String),
    #[error("state is not normalized: norm {norm:.12} deviates from 1 by {deviation:.3e} (limit {limit:.1e})")]
    NotNormalized {
        norm: f64,
        deviation: f64,
        limit: f64,
    },
    #[error("malformed channel file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A named entangled channel.
#[derive(Debug, Clone)]
pub struct ChannelDescriptor {
    pub name: String,
    pub num_qubits: usize,
    pub state: PureState,
}

impl ChannelDescriptor {
    pub fn new(name: impl Into<String>, state: PureState) -> Self {
        Self {
            name: name.into(),
            num_qubits: state.num_qubits(),
            state,
        }
    }
}

/// (|0…0⟩ + |1…1⟩)/√2 on N ≥ 2 qubits.
pub fn ghz(num_qubits: usize) -> Result<ChannelDescriptor, ChannelError> {
    if num_qubits < 2 {
        return Err(ChannelError::TooFewQubits {
            min: 2,
            got: num_qubits,
        });
    }
    if num_qubits > MAX_QUBITS {
        return Err(ChannelError::TooManyQubits(num_qubits));
    }
    let dim = 1usize << num_qubits;
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![Complex64::ZERO; dim];
    amps[0] = r;
    amps[dim - 1] = r;
    Ok(ChannelDescriptor::new(
        format!("ghz{num_qubits}"),
        PureState::new(num_qubits, amps).expect("normalized by construction"),
    ))
}

/// The four-qubit cluster state (|0000⟩+|0110⟩+|1001⟩−|1111⟩)/2.
pub fn cluster4() -> ChannelDescriptor {
    let h = Complex64::new(0.5, 0.0);
    let mut amps = vec![Complex64::ZERO; 16];
    amps[0b0000] = h;
    amps[0b0110] = h;
    amps[0b1001] = h;
    amps[0b1111] = -h;
    ChannelDescriptor::new(
        "cluster4",
        PureState::new(4, amps).expect("normalized by construction"),
    )
}

/// n Bell pairs (|00⟩+|11⟩)/√2, interleaved as (ref₁, in₁, ref₂, in₂, …).
pub fn bell_pairs(pairs: usize) -> Result<ChannelDescriptor, ChannelError> {
    if pairs < 1 {
        return Err(ChannelError::TooFewQubits { min: 2, got: 0 });
    }
    if 2 * pairs > MAX_QUBITS {
        return Err(ChannelError::TooManyQubits(2 * pairs));
    }
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let pair = PureState::new(2, vec![r, Complex64::ZERO, Complex64::ZERO, r])
        .expect("normalized by construction");
    let mut state = pair.clone();
    for _ in 1..pairs {
        state = state.tensor(&pair);
    }
    Ok(ChannelDescriptor::new(format!("bellpairs-{pairs}"), state))
}

/// Resolve a built-in channel name: ghz2..ghz8, cluster4, bellpairs-n.
pub fn builtin(name: &str) -> Option<ChannelDescriptor> {
    if name == "cluster4" {
        return Some(cluster4());
    }
    if let Some(n) = name
        .strip_prefix("ghz")
        .and_then(|s| s.parse::<usize>().ok())
    {
        if (2..=8).contains(&n) {
            return ghz(n).ok();
        }
        return None;
    }
    if let Some(n) = name
        .strip_prefix("bellpairs-")
        .and_then(|s| s.parse::<usize>().ok())
    {
        return bell_pairs(n).ok();
    }
    None
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    name: String,
    num_qubits: usize,
    amplitudes: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

/// Load a channel from a JSON file, rejecting malformed or denormalized data.
pub fn load(path: impl AsRef<Path>) -> Result<ChannelDescriptor, ChannelError> {
    let text = fs::read_to_string(path)?;
    let file: ChannelFile = serde_json::from_str(&text)?;
    if file.num_qubits < 1 {
        return Err(ChannelError::TooFewQubits {
            min: 1,
            got: file.num_qubits,
        });
    }
    if file.num_qubits > MAX_QUBITS {
        return Err(ChannelError::TooManyQubits(file.num_qubits));
    }
    let expected = 1usize << file.num_qubits;
    if file.amplitudes.len() != expected {
        return Err(ChannelError::AmplitudeCount {
            num_qubits: file.num_qubits,
            expected,
            got: file.amplitudes.len(),
        });
    }
    let mut amps = Vec::with_capacity(expected);
    for (re, im) in &file.amplitudes {
        let re: f64 = re
            .trim()
            .parse()
            .map_err(|_| ChannelError::BadAmplitude(re.clone()))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|_| ChannelError::BadAmplitude(im.clone()))?;
        amps.push(Complex64::new(re, im));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let deviation = (norm - 1.0).abs();
    if deviation > tol::CHANNEL_NORM {
        return Err(ChannelError::NotNormalized {
            norm,
            deviation,
            limit: tol::CHANNEL_NORM,
        });
    }
    // Drift within the file tolerance but beyond the runtime invariant gets
    // rescaled; exactly-normalized files pass through untouched, which keeps
    // save/load round trips bit-exact.
    let state = PureState::new(file.num_qubits, amps.clone())
        .or_else(|_| PureState::new(file.num_qubits, amps.iter().map(|a| a / norm).collect()));
    let state = state.map_err(|_| ChannelError::NotNormalized {
        norm,
        deviation,
        limit: tol::CHANNEL_NORM,
    })?;
    Ok(ChannelDescriptor::new(file.name, state))
}

/// Save a channel as JSON; amplitudes are written as shortest
/// round-tripping decimal strings, so load(save(c)) is bit-exact.
pub fn save(channel: &ChannelDescriptor, path: impl AsRef<Path>) -> Result<(), ChannelError> {
    let file = ChannelFile {
        name: channel.name.clone(),
        num_qubits: channel.num_qubits,
        amplitudes: channel
            .state
            .amplitudes()
            .iter()
            .map(|a| (a.re.to_string(), a.im.to_string()))
            .collect(),
        provenance: None,
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}
