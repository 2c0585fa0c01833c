//! Approximation knobs and responsibility scores.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("epsilon must be non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("beam width must be at least 1")]
    ZeroBeam,
    #[error("sampled search requires a sample count")]
    SamplesRequired,
    #[error("candidate `{0}` has no grid in the discretization scheme")]
    MissingGrid(String),
    #[error(transparent)]
    Scm(#[from] crate::scm::ScmError),
}

/// Restrictions applied by the approximate searches.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxConfig {
    /// Maximum witness size η; unbounded when absent.
    pub eta: Option<usize>,
    /// Responsibility acceptance threshold ε ≥ 0 (0 keeps plain ρ > 0).
    pub epsilon: f64,
    /// Skip pinning non-witness candidates at their actual values during
    /// sub-witness checks. Root-level candidate spaces are insensitive to
    /// this flag because unintervened roots already take their actual values.
    pub z_empty: bool,
    /// Draws per witness size for the sampled search.
    pub samples: Option<usize>,
    pub seed: u64,
    /// Beam width m for the influence search.
    pub beam_width: Option<usize>,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            eta: None,
            epsilon: 0.0,
            z_empty: false,
            samples: None,
            seed: 0,
            beam_width: None,
        }
    }
}

impl ApproxConfig {
    pub fn validate(&self) -> Result<(), ApproxError> {
        if self.epsilon < 0.0 {
            return Err(ApproxError::BadEpsilon(self.epsilon));
        }
        if self.samples == Some(0) {
            return Err(ApproxError::ZeroSamples);
        }
        if self.beam_width == Some(0) {
            return Err(ApproxError::ZeroBeam);
        }
        Ok(())
    }
}

/// The accepted responsibility of one candidate set: ρ = σ / (t · (1 + β)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsibilityScore {
    pub rho: f64,
    /// Accumulated flip mass.
    pub sigma: f64,
    /// Inspected witness assignments (including ones screened out by the
    /// sub-witness guard, which deflates ρ relative to counting survivors
    /// only).
    pub trials: u64,
    /// Witness size at acceptance.
    pub beta: usize,
}
