//! Fixed-budget optimizer runs on the 1-D landscapes, plus overshoot and
//! oscillation diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::OptimizerConfig;
use crate::error::{Error, Result};
use crate::landscape::{Landscape, LandscapeId, DOMAIN};
use crate::optim::{step, OptimizerKind, OptimizerState};
use crate::vector::ParameterVector;

/// Constant learning rate for toy runs.
///
/// Found by sweeping α with [`calibrate`]: it is the value at which Adam
/// overshoots the global minimum of both F1 and F2 by more than
/// [`DEFAULT_MARGIN`] while the injected variant does not. The window where
/// that holds is narrow (about 0.0328–0.0330).
pub const TOY_DEFAULT_ALPHA: f64 = 0.0329;
pub const DEFAULT_X0: f64 = -1.0;
pub const DEFAULT_ITERATIONS: usize = 300;
pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_WINDOW: usize = 50;
/// Grid swept by [`calibrate`] when no explicit grid is given.
pub const CALIBRATION_GRID: [f64; 6] = [0.0329, 0.05, 0.1, 0.2, 0.3, 0.01];

/// What is minimised along a toy trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToyLoss {
    /// `f(x)` with gradient `f'(x)`.
    #[default]
    Direct,
    /// `f(x)^2` with gradient `2 f(x) f'(x)`.
    Squared,
}

impl ToyLoss {
    fn value(self, land: &Landscape, x: f64) -> f64 {
        match self {
            ToyLoss::Direct => land.eval(x),
            ToyLoss::Squared => land.eval(x).powi(2),
        }
    }

    fn grad(self, land: &Landscape, x: f64) -> f64 {
        match self {
            ToyLoss::Direct => land.grad(x),
            ToyLoss::Squared => 2.0 * land.eval(x) * land.grad(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyRunSpec {
    pub landscape: LandscapeId,
    pub kind: OptimizerKind,
    pub config: OptimizerConfig,
    pub x0: f64,
    pub iterations: usize,
    pub loss: ToyLoss,
}

impl ToyRunSpec {
    /// Harness defaults: calibrated α, start at −1, 300 iterations.
    pub fn new(landscape: LandscapeId, kind: OptimizerKind) -> Self {
        Self {
            landscape,
            kind,
            config: OptimizerConfig::default().with_alpha(TOY_DEFAULT_ALPHA),
            x0: DEFAULT_X0,
            iterations: DEFAULT_ITERATIONS,
            loss: ToyLoss::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(DOMAIN.0..=DOMAIN.1).contains(&self.x0) {
            return Err(Error::InvalidConfig(format!(
                "x0 = {} lies outside [{}, {}]",
                self.x0, DOMAIN.0, DOMAIN.1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub iteration: usize,
    /// θ after the step.
    pub theta: f64,
    /// Loss at `theta`.
    pub loss: f64,
    /// Gradient at `theta`.
    pub grad: f64,
    /// `|θ_t - θ_{t-1}|`.
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: ToyRunSpec,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn thetas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.theta).collect()
    }

    pub fn final_theta(&self) -> f64 {
        self.records.last().map_or(self.spec.x0, |r| r.theta)
    }
}

/// Runs `spec` to completion. Pure: the same spec always yields the same
/// trajectory, bit for bit.
pub fn run_trajectory(spec: &ToyRunSpec) -> Result<Trajectory> {
    run_trajectory_observed(spec, |_, _, _| {})
}

/// As [`run_trajectory`], calling `observe(t, θ_{t-1}, state_after)` after
/// every step.
pub fn run_trajectory_observed(
    spec: &ToyRunSpec,
    mut observe: impl FnMut(usize, f64, &OptimizerState),
) -> Result<Trajectory> {
    spec.validate()?;
    let land = Landscape::new(spec.landscape);
    let mut state = OptimizerState::new(1);
    let mut x = spec.x0;
    let mut records = Vec::with_capacity(spec.iterations);
    for it in 1..=spec.iterations {
        let g = spec.loss.grad(&land, x);
        let theta = ParameterVector::from_raw(vec![x]);
        let grad = ParameterVector::from_raw(vec![g]);
        let (next, new_theta) = step(spec.kind, &state, &spec.config, &theta, &grad)?;
        observe(it, x, &next);
        let nx = new_theta[0];
        records.push(StepRecord {
            iteration: it,
            theta: nx,
            loss: spec.loss.value(&land, nx),
            grad: spec.loss.grad(&land, nx),
            step_norm: (nx - x).abs(),
        });
        state = next;
        x = nx;
    }
    Ok(Trajectory {
        spec: *spec,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvershootReport {
    pub occurred: bool,
    /// Record index of the first point past `x_star + margin`.
    pub first_iteration: Option<usize>,
    /// Largest signed distance past `x_star` in the approach direction.
    pub max_excursion: f64,
}

/// Overshoot along `positions`, approached from `start`.
///
/// The first time the path passes `x_star` opens an episode that lasts until
/// the path comes back to (or behind) `x_star`. Overshoot occurred iff that
/// episode goes strictly further than `margin`.
pub fn overshoot_in_path(positions: &[f64], start: f64, x_star: f64, margin: f64) -> OvershootReport {
    let dir = if x_star >= start { 1.0 } else { -1.0 };
    let past = |x: f64| dir * (x - x_star);
    let max_excursion = positions
        .iter()
        .map(|&x| past(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut first_iteration = None;
    if let Some(enter) = positions.iter().position(|&x| past(x) > 0.0) {
        first_iteration = positions[enter..]
            .iter()
            .take_while(|&&x| past(x) > 0.0)
            .position(|&x| past(x) > margin)
            .map(|i| enter + i);
    }
    OvershootReport {
        occurred: first_iteration.is_some(),
        first_iteration,
        max_excursion,
    }
}

pub fn detect_overshoot(traj: &Trajectory, x_star: f64, margin: f64) -> OvershootReport {
    overshoot_in_path(&traj.thetas(), traj.spec.x0, x_star, margin)
}

/// `max θ - min θ` over the last `window` records.
pub fn oscillation_metric(traj: &Trajectory, window: usize) -> Result<f64> {
    let len = traj.records.len();
    if window == 0 || window > len {
        return Err(Error::WindowTooLarge { window, len });
    }
    let tail = &traj.records[len - window..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.theta), hi.max(r.theta))
        });
    Ok(hi - lo)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonEntry {
    pub kind: OptimizerKind,
    pub overshoot: OvershootReport,
    pub oscillation: f64,
    pub final_theta: f64,
    pub final_loss: f64,
}

/// Side-by-side diagnostics of several optimizers on one landscape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub landscape: LandscapeId,
    pub x_star: f64,
    pub margin: f64,
    pub window: usize,
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    pub fn entry(&self, kind: OptimizerKind) -> Option<&ComparisonEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }
}

/// Runs every kind from `template` (kind is overwritten) and measures them
/// against the landscape's global minimum. Trajectories come back in the
/// order of `kinds`.
pub fn compare(
    template: &ToyRunSpec,
    kinds: &[OptimizerKind],
    margin: f64,
    window: usize,
) -> Result<(ComparisonReport, Vec<Trajectory>)> {
    let land = Landscape::new(template.landscape);
    let x_star = land
        .global_minimum()
        .ok_or_else(|| {
            Error::InvalidArgument(format!("landscape {} has no known minimum", template.landscape))
        })?
        .x;
    let trajs = kinds
        .par_iter()
        .map(|&kind| run_trajectory(&ToyRunSpec { kind, ..*template }))
        .collect::<Result<Vec<_>>>()?;
    let entries = trajs
        .iter()
        .map(|t| {
            Ok(ComparisonEntry {
                kind: t.spec.kind,
                overshoot: detect_overshoot(t, x_star, margin),
                oscillation: oscillation_metric(t, window.min(t.records.len()))?,
                final_theta: t.final_theta(),
                final_loss: t.records.last().map_or(f64::NAN, |r| r.loss),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ComparisonReport {
            landscape: template.landscape,
            x_star,
            margin,
            window,
            entries,
        },
        trajs,
    ))
}

/// One row of an α sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub alpha: f64,
    pub reports: Vec<ComparisonReport>,
    /// Base overshoots and injected does not on every landscape.
    pub contrast: bool,
}

/// Sweeps `alphas` over `landscapes` comparing Adam with AdamInject.
pub fn calibrate(landscapes: &[LandscapeId], alphas: &[f64], loss: ToyLoss) -> Result<Vec<CalibrationRow>> {
    let pair = [OptimizerKind::Adam, OptimizerKind::AdamInject];
    alphas
        .iter()
        .map(|&alpha| {
            let reports = landscapes
                .iter()
                .map(|&l| {
                    let mut spec = ToyRunSpec::new(l, OptimizerKind::Adam);
                    spec.config = spec.config.with_alpha(alpha);
                    spec.loss = loss;
                    compare(&spec, &pair, DEFAULT_MARGIN, DEFAULT_WINDOW).map(|(r, _)| r)
                })
                .collect::<Result<Vec<_>>>()?;
            let contrast = reports.iter().all(|r| {
                r.entries[0].overshoot.occurred && !r.entries[1].overshoot.occurred
            });
            Ok(CalibrationRow {
                alpha,
                reports,
                contrast,
            })
        })
        .collect()
}
