use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::powi;

/// Hyperparameters shared by all eight step rules.
///
/// `k` is only read by the injected variants. `lambda < 1` switches on the
/// decaying first-moment schedule `beta1 * lambda^(t-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub k: f64,
    pub lambda: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            k: 2.0,
            lambda: 1.0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    /// Checks every documented range. `alpha == 0` is accepted so that a
    /// frozen run can be expressed; negative or non-finite values are not.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha must be finite and >= 0");
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return bad("beta1 must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return bad("beta2 must lie in [0, 1)");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be finite and > 0");
        }
        if !(self.k.is_finite() && self.k >= 1.0) {
            return bad("k must be finite and >= 1");
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad("lambda must lie in (0, 1]");
        }
        Ok(())
    }

    /// First-moment decay in effect at step `t` (1-based).
    pub fn beta1_at(&self, t: u64) -> f64 {
        if self.lambda < 1.0 {
            self.beta1 * powi(self.lambda, t.saturating_sub(1))
        } else {
            self.beta1
        }
    }
}
