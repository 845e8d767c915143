//! The eight adaptive step rules behind one dispatcher.
//!
//! Each base rule (Adam, diffGrad, Radam, AdaBelief) has an injected twin
//! whose first moment averages `(g + Δθ·g²) / k` instead of `g`, where
//! `Δθ = θ_{t-2} - θ_{t-1}` is the most recent parameter change. On the first
//! step there is no history and every twin uses the plain gradient.
//!
//! Kernels are pure: they take the previous [`OptimizerState`] by reference
//! and return a fresh state together with the new parameters.

mod adabelief;
mod adam;
mod diffgrad;
mod radam;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::OptimizerConfig;
use crate::error::{Error, Result};
use crate::vector::{correction_factor, ema_update, ParameterVector};

pub use adabelief::adabelief_step;
pub use adam::{adam_inject_step, adam_step};
pub use diffgrad::{diffgrad_friction, diffgrad_step, FRICTION_CEILING};
pub use radam::{radam_rectification, radam_step, Rectification, RECTIFICATION_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Adam,
    AdamInject,
    DiffGrad,
    DiffGradInject,
    Radam,
    RadamInject,
    AdaBelief,
    AdaBeliefInject,
}

/// The four base update rules; each kind is one of these with or without
/// injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Adam,
    DiffGrad,
    Radam,
    AdaBelief,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 8] = [
        OptimizerKind::Adam,
        OptimizerKind::AdamInject,
        OptimizerKind::DiffGrad,
        OptimizerKind::DiffGradInject,
        OptimizerKind::Radam,
        OptimizerKind::RadamInject,
        OptimizerKind::AdaBelief,
        OptimizerKind::AdaBeliefInject,
    ];

    pub const INJECTED: [OptimizerKind; 4] = [
        OptimizerKind::AdamInject,
        OptimizerKind::DiffGradInject,
        OptimizerKind::RadamInject,
        OptimizerKind::AdaBeliefInject,
    ];

    pub fn family(self) -> Family {
        use OptimizerKind::*;
        match self {
            Adam | AdamInject => Family::Adam,
            DiffGrad | DiffGradInject => Family::DiffGrad,
            Radam | RadamInject => Family::Radam,
            AdaBelief | AdaBeliefInject => Family::AdaBelief,
        }
    }

    pub fn is_injected(self) -> bool {
        use OptimizerKind::*;
        matches!(self, AdamInject | DiffGradInject | RadamInject | AdaBeliefInject)
    }

    /// The non-injected rule of the same family.
    pub fn base(self) -> OptimizerKind {
        Self::from_parts(self.family(), false)
    }

    pub fn injected(self) -> OptimizerKind {
        Self::from_parts(self.family(), true)
    }

    pub fn from_parts(family: Family, inject: bool) -> OptimizerKind {
        use OptimizerKind::*;
        match (family, inject) {
            (Family::Adam, false) => Adam,
            (Family::Adam, true) => AdamInject,
            (Family::DiffGrad, false) => DiffGrad,
            (Family::DiffGrad, true) => DiffGradInject,
            (Family::Radam, false) => Radam,
            (Family::Radam, true) => RadamInject,
            (Family::AdaBelief, false) => AdaBelief,
            (Family::AdaBelief, true) => AdaBeliefInject,
        }
    }

    pub fn name(self) -> &'static str {
        use OptimizerKind::*;
        match self {
            Adam => "adam",
            AdamInject => "adam-inject",
            DiffGrad => "diffgrad",
            DiffGradInject => "diffgrad-inject",
            Radam => "radam",
            RadamInject => "radam-inject",
            AdaBelief => "adabelief",
            AdaBeliefInject => "adabelief-inject",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.name() == key || k.name().replace('-', "") == key)
            .ok_or_else(|| Error::UnknownOptimizer(s.to_string()))
    }
}

/// Per-run optimizer memory.
///
/// `moment1` holds `m_t` for the base rules and the injected moment `s_t` for
/// the injected ones. `prev_grad` is only maintained by the diffGrad family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub t: u64,
    pub moment1: ParameterVector,
    pub moment2: ParameterVector,
    pub prev_grad: ParameterVector,
    pub theta_prev: ParameterVector,
    pub theta_prev2: ParameterVector,
}

impl OptimizerState {
    pub fn new(dim: usize) -> Self {
        Self {
            t: 0,
            moment1: ParameterVector::zeros(dim),
            moment2: ParameterVector::zeros(dim),
            prev_grad: ParameterVector::zeros(dim),
            theta_prev: ParameterVector::zeros(dim),
            theta_prev2: ParameterVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.moment1.dim()
    }
}

/// Whether the injected rules see the real parameter history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum History {
    #[default]
    Tracked,
    /// Forces `Δθ = 0`. With `k = 1` every injected rule then reduces to its
    /// base rule; used to check exactly that.
    Suppressed,
}

/// How the injected numerator is written. Both forms are algebraically
/// identical; the alternative exists so the equivalence can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// `Δθ = θ_{t-2} - θ_{t-1}`, numerator `g + Δθ·g²`.
    #[default]
    PreviousMinusCurrent,
    /// `Δθ' = θ_{t-1} - θ_{t-2}`, numerator `g - Δθ'·g²`.
    CurrentMinusPrevious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOptions {
    pub history: History,
    pub sign: SignConvention,
}

/// Applies one step of `kind`. Returns the successor state (with `t`
/// incremented and the parameter history shifted) and the new parameters.
pub fn step(
    kind: OptimizerKind,
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
) -> Result<(OptimizerState, ParameterVector)> {
    step_with(kind, state, cfg, theta, g, StepOptions::default())
}

pub fn step_with(
    kind: OptimizerKind,
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    opts: StepOptions,
) -> Result<(OptimizerState, ParameterVector)> {
    let inject = kind.is_injected();
    match kind.family() {
        Family::Adam => adam::adam_kernel(state, cfg, theta, g, inject, opts),
        Family::DiffGrad => diffgrad::diffgrad_kernel(state, cfg, theta, g, inject, opts),
        Family::Radam => radam::radam_kernel(state, cfg, theta, g, inject, opts),
        Family::AdaBelief => adabelief::adabelief_kernel(state, cfg, theta, g, inject, opts),
    }
}

/// Validates shapes and the incoming gradient; returns the new step index.
fn begin(state: &OptimizerState, theta: &ParameterVector, g: &ParameterVector) -> Result<u64> {
    let dim = state.dim();
    theta.ensure_dim(dim)?;
    g.ensure_dim(dim)?;
    let t = state.t + 1;
    g.ensure_finite(t)?;
    Ok(t)
}

/// Input to the first-moment EMA at step `t`.
fn first_moment_input(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    t: u64,
    inject: bool,
    opts: StepOptions,
) -> ParameterVector {
    if !inject || t == 1 {
        return g.clone();
    }
    let k = cfg.k;
    let prev = state.theta_prev.as_slice();
    let values = g
        .iter()
        .zip(theta.iter())
        .zip(prev)
        .map(|((&gi, &cur), &before)| match (opts.history, opts.sign) {
            (History::Suppressed, _) => (gi + 0.0 * (gi * gi)) / k,
            (History::Tracked, SignConvention::PreviousMinusCurrent) => {
                let delta = before - cur;
                (gi + delta * (gi * gi)) / k
            }
            (History::Tracked, SignConvention::CurrentMinusPrevious) => {
                let delta = cur - before;
                (gi - delta * (gi * gi)) / k
            }
        })
        .collect();
    ParameterVector::from_raw(values)
}

/// Shared first-moment update.
fn update_first_moment(
    state: &OptimizerState,
    cfg: &OptimizerConfig,
    theta: &ParameterVector,
    g: &ParameterVector,
    t: u64,
    inject: bool,
    opts: StepOptions,
) -> Result<ParameterVector> {
    let x = first_moment_input(state, cfg, theta, g, t, inject, opts);
    ema_update(&state.moment1, &x, cfg.beta1_at(t))
}

/// Bias-correction denominators `(1 - beta1^t, 1 - beta2^t)`.
///
/// The first uses the constant `beta1` even when the decaying schedule is on.
fn corrections(cfg: &OptimizerConfig, t: u64) -> Result<(f64, f64)> {
    Ok((correction_factor(cfg.beta1, t)?, correction_factor(cfg.beta2, t)?))
}

/// Finiteness check on the outputs, then history shift.
fn finish(
    state: &OptimizerState,
    theta: &ParameterVector,
    t: u64,
    moment1: ParameterVector,
    moment2: ParameterVector,
    prev_grad: ParameterVector,
    new_theta: ParameterVector,
) -> Result<(OptimizerState, ParameterVector)> {
    moment1.ensure_finite(t)?;
    moment2.ensure_finite(t)?;
    new_theta.ensure_finite(t)?;
    let next = OptimizerState {
        t,
        moment1,
        moment2,
        prev_grad,
        theta_prev: theta.clone(),
        theta_prev2: state.theta_prev.clone(),
    };
    Ok((next, new_theta))
}
