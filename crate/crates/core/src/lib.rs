//! Curvature-injected adaptive momentum optimizers.
//!
//! The crate provides Adam, diffGrad, Radam and AdaBelief together with their
//! injected variants, whose first moment is an EMA of `(g + Δθ·g²) / k`
//! driven by the most recent parameter change. Around the step kernels sit
//! three harnesses:
//!
//! * [`toy`]: 1-D trajectories on piecewise non-convex [`landscape`]s, with
//!   overshoot and oscillation diagnostics,
//! * [`regret`]: online regret on generated convex loss sequences,
//! * [`mlp`]: minibatch training of a small perceptron and `k` sweeps.
//!
//! [`reference`] holds an independent scalar transcription of every rule and
//! [`check`] compares the two.

pub mod check;
pub mod config;
pub mod error;
pub mod landscape;
pub mod mlp;
pub mod optim;
pub mod reference;
pub mod regret;
pub mod rng;
pub mod toy;
pub mod vector;

pub use config::OptimizerConfig;
pub use error::{Error, Result};
pub use optim::{step, step_with, OptimizerKind, OptimizerState, StepOptions};
pub use vector::ParameterVector;
