use serde::{Deserialize, Serialize};

/// Numerical thresholds used across the crate.
///
/// The defaults are what every free function uses; callers that need
/// different thresholds go through the `*_with` variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Absolute tolerance for kernel postconditions (exp/log round trips).
    pub kernel: f64,
    /// Relative slack on the uncertainty-principle test, scaled by `max(1, |cov|)`.
    pub state: f64,
    /// Slack on complete-positivity margins (finite and differential).
    pub cp: f64,
    /// Absolute threshold for the purification predicates.
    pub purify: f64,
    /// Relative coefficient threshold for the dynamics classifier.
    pub classify: f64,
    /// Symmetry tolerance on covariance, noise and Hamiltonian matrices.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernel: 1e-10,
            state: 1e-9,
            cp: 1e-9,
            purify: 1e-12,
            classify: 1e-10,
            symmetry: 1e-12,
        }
    }
}
