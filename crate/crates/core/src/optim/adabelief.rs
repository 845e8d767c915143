use super::adam::adaptive_descent;
use super::{begin, corrections, finish, update_first_moment, OptimizerState, StepOptions};
use crate::config::OptimizerConfig;
use crate::error::Result;
use crate::vector::{elementwise_square, ema_update, ParameterVector};

/// AdaBelief (`inject = false`) or AdaBeliefInject (`inject = true`).
///
/// The second moment tracks `(g - m_t)²` against the just-updated first
/// moment. No ε is added inside that average.
pub fn adabelief_step(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    inject: bool,
) -> Result<(OptimizerState, ParameterVector)> {
    adabelief_kernel(state, cfg, theta, g, inject, StepOptions::default())
}

pub(super) fn adabelief_kernel(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    inject: bool,
    opts: StepOptions,
) -> Result<(OptimizerState, ParameterVector)> {
    let t = begin(state, theta, g)?;
    let m = update_first_moment(state, cfg, theta, g, t, inject, opts)?;
    let residual = g.zip_map(&m, |gi, mi| gi - mi)?;
    let v = ema_update(&state.moment2, &elementwise_square(&residual), cfg.beta2)?;
    let (c1, c2) = corrections(cfg, t)?;
    let new_theta = adaptive_descent(theta, &m, &v, c1, c2, cfg, None);
    finish(state, theta, t, m, v, state.prev_grad.clone(), new_theta)
}
