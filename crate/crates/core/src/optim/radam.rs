use serde::Serialize;

use super::{begin, corrections, finish, update_first_moment, OptimizerState, StepOptions};
use crate::config::OptimizerConfig;
use crate::error::Result;
use crate::vector::{correction_factor, elementwise_square, ema_update, powi, ParameterVector};

/// Steps with `ρ_t` below this use the momentum-only update.
pub const RECTIFICATION_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectification {
    pub rho_inf: f64,
    pub rho_t: f64,
    pub rectified: bool,
    /// `sqrt((1 - β2)·ρ_u / ρ_d)`, present only when rectified.
    pub factor: Option<f64>,
}

/// Variance-rectification terms for step `t`.
///
/// Note the factor folds in `sqrt(1 - β2)` and is paired with the raw `v_t`
/// in [`radam_step`], not with a bias-corrected second moment.
pub fn radam_rectification(beta2: f64, t: u64) -> Result<Rectification> {
    let c2 = correction_factor(beta2, t)?;
    let rho_inf = 2.0 / (1.0 - beta2) - 1.0;
    let rho_t = rho_inf - 2.0 * t as f64 * powi(beta2, t) / c2;
    let rectified = rho_t >= RECTIFICATION_THRESHOLD;
    let factor = rectified.then(|| {
        let rho_u = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
        let rho_d = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
        ((1.0 - beta2) * rho_u / rho_d).sqrt()
    });
    Ok(Rectification {
        rho_inf,
        rho_t,
        rectified,
        factor,
    })
}

/// Radam (`inject = false`) or RadamInject (`inject = true`).
///
/// Rectified: `θ - α₁·m/(√v + ε)` with `α₁ = ρ·α/(1 - β1^t)`.
/// Otherwise: `θ - α₂·m` with `α₂ = α/(1 - β1^t)`.
pub fn radam_step(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    inject: bool,
) -> Result<(OptimizerState, ParameterVector)> {
    radam_kernel(state, cfg, theta, g, inject, StepOptions::default())
}

pub(super) fn radam_kernel(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    inject: bool,
    opts: StepOptions,
) -> Result<(OptimizerState, ParameterVector)> {
    let t = begin(state, theta, g)?;
    let m = update_first_moment(state, cfg, theta, g, t, inject, opts)?;
    let v = ema_update(&state.moment2, &elementwise_square(g), cfg.beta2)?;
    let (c1, _) = corrections(cfg, t)?;
    let rect = radam_rectification(cfg.beta2, t)?;
    let values = match rect.factor {
        Some(rho) => {
            let lr = rho * cfg.alpha / c1;
            (0..theta.dim())
                .map(|i| theta[i] - lr * m[i] / (v[i].sqrt() + cfg.epsilon))
                .collect()
        }
        None => {
            let lr = cfg.alpha / c1;
            (0..theta.dim()).map(|i| theta[i] - lr * m[i]).collect()
        }
    };
    let new_theta = ParameterVector::from_raw(values);
    finish(state, theta, t, m, v, state.prev_grad.clone(), new_theta)
}
