//! Numerical self-checks shared by the test suites and the CLI.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::OptimizerConfig;
use crate::error::Result;
use crate::optim::{self, OptimizerKind, OptimizerState};
use crate::reference::ScalarReference;
use crate::rng;
use crate::vector::ParameterVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleDeviation {
    pub kind: OptimizerKind,
    pub steps: usize,
    pub dim: usize,
    /// Largest per-coordinate `|θ_kernel - θ_reference|` over the run.
    pub max_abs_diff: f64,
}

/// Seeded standard-normal gradient stream, `steps` vectors of length `dim`.
pub fn random_gradients(seed: u64, steps: usize, dim: usize, scale: f64) -> Vec<ParameterVector> {
    let mut rng = rng::seeded(seed);
    (0..steps)
        .map(|_| {
            let v = (0..dim)
                .map(|_| -> f64 { scale * Distribution::<f64>::sample(&StandardNormal, &mut rng) })
                .collect::<Vec<f64>>();
            ParameterVector::from_raw(v)
        })
        .collect()
}

/// Runs the vectorised kernel and the scalar reference side by side on the
/// same gradient stream and reports the worst parameter disagreement.
pub fn oracle_deviation(
    kind: OptimizerKind,
    cfg: &OptimizerConfig,
    dim: usize,
    steps: usize,
    seed: u64,
) -> Result<OracleDeviation> {
    let grads = random_gradients(seed, steps, dim, 1.0);
    let mut rng = rng::substream(seed, 1);
    let start: Vec<f64> = (0..dim).map(|_| -> f64 { StandardNormal.sample(&mut rng) }).collect();

    let mut state = OptimizerState::new(dim);
    let mut theta = ParameterVector::new(start.clone())?;
    let mut reference = ScalarReference::new(kind, dim);
    let mut ref_theta = start;
    let mut max_abs_diff = 0.0_f64;
    for g in &grads {
        let (next, new_theta) = optim::step(kind, &state, cfg, &theta, g)?;
        ref_theta = reference.step(cfg, &ref_theta, g.as_slice());
        for (a, b) in new_theta.iter().zip(&ref_theta) {
            max_abs_diff = max_abs_diff.max((a - b).abs());
        }
        state = next;
        theta = new_theta;
    }
    Ok(OracleDeviation {
        kind,
        steps,
        dim,
        max_abs_diff,
    })
}
