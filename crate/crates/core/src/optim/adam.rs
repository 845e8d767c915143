use super::{begin, corrections, finish, update_first_moment, OptimizerState, StepOptions};
use crate::config::OptimizerConfig;
use crate::error::Result;
use crate::vector::{elementwise_square, ema_update, ParameterVector};

/// Adam: `θ ← θ - α·m̂ / (√v̂ + ε)`, with ε outside the root.
pub fn adam_step(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
) -> Result<(OptimizerState, ParameterVector)> {
    adam_kernel(state, cfg, theta, g, false, StepOptions::default())
}

/// Adam with the curvature-injected first moment.
pub fn adam_inject_step(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
) -> Result<(OptimizerState, ParameterVector)> {
    adam_kernel(state, cfg, theta, g, true, StepOptions::default())
}

pub(super) fn adam_kernel(
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
    let (c1, c2) = corrections(cfg, t)?;
    let new_theta = adaptive_descent(theta, &m, &v, c1, c2, cfg, None);
    finish(state, theta, t, m, v, state.prev_grad.clone(), new_theta)
}

/// `θ - α·ξ·(m/c1) / (√(v/c2) + ε)`; `friction = None` means `ξ = 1`.
pub(super) fn adaptive_descent(
    theta: &ParameterVector,
    m: &ParameterVector,
    v: &ParameterVector,
    c1: f64,
    c2: f64,
    cfg: &OptimizerConfig,
    friction: Option<&ParameterVector>,
) -> ParameterVector {
    let (alpha, eps) = (cfg.alpha, cfg.epsilon);
    let values = (0..theta.dim())
        .map(|i| {
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            let scale = match friction {
                Some(xi) => alpha * xi[i],
                None => alpha,
            };
            theta[i] - scale * m_hat / (v_hat.sqrt() + eps)
        })
        .collect();
    ParameterVector::from_raw(values)
}
