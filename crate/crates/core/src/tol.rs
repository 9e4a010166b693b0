//! Numeric tolerances shared across the crate.
//!
//! The constants are the defaults; operations that admit an override take a
//! [`Tolerances`] value instead of reading the constants directly.

use serde::{Deserialize, Serialize};

/// Branch probabilities below this are dropped (and reported as zero branches).
pub const ZERO_PROB: f64 = 1e-12;
/// State vectors must be normalized to within this.
pub const NORM: f64 = 1e-12;
/// Orthonormality of measurement bases, unitarity, Hermiticity, trace checks.
pub const MATRIX: f64 = 1e-10;
/// Correction synthesis: residual operator must satisfy M†M ∝ I to within this.
pub const CORRECTABILITY: f64 = 1e-9;
/// No-signaling and security-audit trace-distance ceiling.
pub const SIGNALING: f64 = 1e-9;
/// Eigenvalues of a (trace-1) Choi matrix above this count toward its rank.
pub const RANK_EIGENVALUE: f64 = 1e-9;
/// A branch counts as perfect when its fidelity is at least 1 minus this.
pub const PERFECT_FIDELITY: f64 = 1e-9;
/// Channel files whose norm deviates by more than this are rejected.
pub const CHANNEL_NORM: f64 = 1e-9;

/// Bundle of the tolerances in effect, embedded in every CLI report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub zero_prob: f64,
    pub norm: f64,
    pub matrix: f64,
    pub correctability: f64,
    pub signaling: f64,
    pub rank_eigenvalue: f64,
    pub perfect_fidelity: f64,
    pub channel_norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_prob: ZERO_PROB,
            norm: NORM,
            matrix: MATRIX,
            correctability: CORRECTABILITY,
            signaling: SIGNALING,
            rank_eigenvalue: RANK_EIGENVALUE,
            perfect_fidelity: PERFECT_FIDELITY,
            channel_norm: CHANNEL_NORM,
        }
    }
}
