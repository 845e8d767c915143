use super::adam::adaptive_descent;
use super::{begin, corrections, finish, update_first_moment, OptimizerState, StepOptions};
use crate::config::OptimizerConfig;
use crate::error::Result;
use crate::vector::{elementwise_square, ema_update, ParameterVector};

/// Largest `f64` below one. The logistic saturates to exactly `1.0` once
/// `|Δg|` exceeds about 37; friction is capped here to keep `ξ < 1`.
pub const FRICTION_CEILING: f64 = 1.0 - f64::EPSILON / 2.0;

/// Friction coefficient `ξ = 1 / (1 + e^{-|g - g_prev|})`, in `[0.5, 1)`.
pub fn diffgrad_friction(g: &ParameterVector, prev_g: &ParameterVector) -> Result<ParameterVector> {
    g.zip_map(prev_g, |gi, pi| {
        (1.0 / (1.0 + (-(gi - pi).abs()).exp())).min(FRICTION_CEILING)
    })
}

/// diffGrad (`inject = false`) or diffGradInject (`inject = true`): the Adam
/// step scaled element-wise by the friction coefficient.
pub fn diffgrad_step(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    inject: bool,
) -> Result<(OptimizerState, ParameterVector)> {
    diffgrad_kernel(state, cfg, theta, g, inject, StepOptions::default())
}

pub(super) fn diffgrad_kernel(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    inject: bool,
    opts: StepOptions,
) -> Result<(OptimizerState, ParameterVector)> {
    let t = begin(state, theta, g)?;
    let xi = diffgrad_friction(g, &state.prev_grad)?;
    let m = update_first_moment(state, cfg, theta, g, t, inject, opts)?;
    let v = ema_update(&state.moment2, &elementwise_square(g), cfg.beta2)?;
    let (c1, c2) = corrections(cfg, t)?;
    let new_theta = adaptive_descent(theta, &m, &v, c1, c2, cfg, Some(&xi));
    finish(state, theta, t, m, v, g.clone(), new_theta)
}
