//! One-dimensional test functions: the three piecewise non-convex toys, a
//! convex bowl, and synthetic stand-ins for the curvature scenarios.
//!
//! Piece boundaries follow the printed inequalities: every clause is
//! `lower < x <= upper`, so a breakpoint belongs to the piece on its left and
//! its gradient is that piece's derivative.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Default step for [`finite_diff`].
pub const FD_STEP: f64 = 1e-6;
/// Relative tolerance for analytic-vs-numeric gradient agreement.
pub const GRAD_TOLERANCE: f64 = 1e-5;
/// Points closer than this to a breakpoint are skipped by [`gradcheck`].
pub const BREAKPOINT_EXCLUSION: f64 = 1e-3;
/// Domain on which every landscape is studied.
pub const DOMAIN: (f64, f64) = (-2.0, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandscapeId {
    F1,
    F2,
    F3,
    Quadratic,
    /// Synthetic: near-flat saddle, `1e-3 x + 0.01 x^3`.
    SaddlePlateau,
    /// Synthetic: steep monotone ramp, `2x + 0.25 sin(2x)`.
    MonotoneRamp,
    /// Synthetic: narrow valley, `50 (x - 0.25)^2`.
    SteepValley,
}

/// The three curvature regimes the scenario landscapes stand in for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
}

impl LandscapeId {
    pub const ALL: [LandscapeId; 7] = [
        LandscapeId::F1,
        LandscapeId::F2,
        LandscapeId::F3,
        LandscapeId::Quadratic,
        LandscapeId::SaddlePlateau,
        LandscapeId::MonotoneRamp,
        LandscapeId::SteepValley,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LandscapeId::F1 => "f1",
            LandscapeId::F2 => "f2",
            LandscapeId::F3 => "f3",
            LandscapeId::Quadratic => "quadratic",
            LandscapeId::SaddlePlateau => "saddle-plateau",
            LandscapeId::MonotoneRamp => "monotone-ramp",
            LandscapeId::SteepValley => "steep-valley",
        }
    }

    pub fn is_synthetic(self) -> bool {
        matches!(
            self,
            LandscapeId::SaddlePlateau | LandscapeId::MonotoneRamp | LandscapeId::SteepValley
        )
    }
}

impl fmt::Display for LandscapeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LandscapeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "s1" => Some(LandscapeId::SaddlePlateau),
            "s2" => Some(LandscapeId::MonotoneRamp),
            "s3" => Some(LandscapeId::SteepValley),
            _ => None,
        };
        alias
            .or_else(|| LandscapeId::ALL.into_iter().find(|l| l.name() == key))
            .ok_or_else(|| Error::UnknownLandscape(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub global: bool,
}

/// Stationary points of the cubic-sine piece of F2, from Newton iteration on
/// its derivative (residuals below 1e-14).
const F2_GLOBAL_MIN: f64 = -0.642_918_598_915_261_7;
const F2_LOCAL_MIN_A: f64 = 0.588_053_476_079_246_1;
const F2_LOCAL_MIN_B: f64 = 1.321_727_472_081_779_3;

const F1_BREAKS: &[f64] = &[0.0];
const F2_BREAKS: &[f64] = &[-0.9];
const F3_BREAKS: &[f64] = &[-0.5, -0.4, 0.0, 0.4, 0.5];

/// An immutable landscape value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Landscape {
    pub id: LandscapeId,
    pub breakpoints: Vec<f64>,
    pub known_minima: Vec<Minimum>,
}

impl Landscape {
    pub fn new(id: LandscapeId) -> Self {
        let breakpoints = breakpoints(id).to_vec();
        let min = |x: f64, global: bool| Minimum {
            x,
            value: eval(id, x),
            global,
        };
        let known_minima = match id {
            LandscapeId::F1 => vec![min(-0.3, true), min(0.2, false)],
            LandscapeId::F2 => vec![
                min(F2_GLOBAL_MIN, true),
                min(0.0, false),
                min(F2_LOCAL_MIN_A, false),
                min(F2_LOCAL_MIN_B, false),
            ],
            LandscapeId::F3 => vec![min(-0.5, false), min(0.0, true), min(0.5, false)],
            LandscapeId::Quadratic => vec![min(0.0, true)],
            LandscapeId::SteepValley => vec![min(0.25, true)],
            LandscapeId::SaddlePlateau | LandscapeId::MonotoneRamp => Vec::new(),
        };
        Self {
            id,
            breakpoints,
            known_minima,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval(self.id, x)
    }

    pub fn grad(&self, x: f64) -> f64 {
        grad(self.id, x)
    }

    pub fn global_minimum(&self) -> Option<Minimum> {
        self.known_minima.iter().copied().find(|m| m.global)
    }

    /// Distance from `x` to the nearest breakpoint (infinite if none).
    pub fn breakpoint_distance(&self, x: f64) -> f64 {
        self.breakpoints
            .iter()
            .map(|b| (x - b).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn scenario_landscape(scenario: Scenario) -> Landscape {
    Landscape::new(match scenario {
        Scenario::S1 => LandscapeId::SaddlePlateau,
        Scenario::S2 => LandscapeId::MonotoneRamp,
        Scenario::S3 => LandscapeId::SteepValley,
    })
}

pub fn breakpoints(id: LandscapeId) -> &'static [f64] {
    match id {
        LandscapeId::F1 => F1_BREAKS,
        LandscapeId::F2 => F2_BREAKS,
        LandscapeId::F3 => F3_BREAKS,
        _ => &[],
    }
}

/// Index of the piece containing `x`: the number of breakpoints strictly
/// below `x`.
pub fn piece_index(id: LandscapeId, x: f64) -> usize {
    breakpoints(id).iter().take_while(|&&b| b < x).count()
}

pub fn eval(id: LandscapeId, x: f64) -> f64 {
    let piece = piece_index(id, x);
    match id {
        LandscapeId::F1 => match piece {
            0 => (x + 0.3) * (x + 0.3),
            _ => (x - 0.2) * (x - 0.2) + 0.05,
        },
        LandscapeId::F2 => match piece {
            0 => -40.0 * x - 35.15,
            _ => x * x * x + x * (8.0 * x).sin() + 0.85,
        },
        LandscapeId::F3 => match piece {
            0 => x * x,
            1 => 0.75 + x,
            2 => -7.0 * x / 8.0,
            3 => 7.0 * x / 8.0,
            4 => 0.75 - x,
            _ => x * x,
        },
        LandscapeId::Quadratic => x * x,
        LandscapeId::SaddlePlateau => 1e-3 * x + 0.01 * x * x * x,
        LandscapeId::MonotoneRamp => 2.0 * x + 0.25 * (2.0 * x).sin(),
        LandscapeId::SteepValley => 50.0 * (x - 0.25) * (x - 0.25),
    }
}

pub fn grad(id: LandscapeId, x: f64) -> f64 {
    let piece = piece_index(id, x);
    match id {
        LandscapeId::F1 => match piece {
            0 => 2.0 * (x + 0.3),
            _ => 2.0 * (x - 0.2),
        },
        LandscapeId::F2 => match piece {
            0 => -40.0,
            _ => 3.0 * x * x + (8.0 * x).sin() + 8.0 * x * (8.0 * x).cos(),
        },
        LandscapeId::F3 => match piece {
            0 => 2.0 * x,
            1 => 1.0,
            2 => -7.0 / 8.0,
            3 => 7.0 / 8.0,
            4 => -1.0,
            _ => 2.0 * x,
        },
        LandscapeId::Quadratic => 2.0 * x,
        LandscapeId::SaddlePlateau => 1e-3 + 0.03 * x * x,
        LandscapeId::MonotoneRamp => 2.0 + 0.5 * (2.0 * x).cos(),
        LandscapeId::SteepValley => 100.0 * (x - 0.25),
    }
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn finite_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheck {
    pub id: LandscapeId,
    pub samples: usize,
    pub max_rel_error: f64,
    pub worst_x: f64,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_error < GRAD_TOLERANCE
    }
}

/// Compares `grad` with [`finite_diff`] at `samples` uniform points of
/// [`DOMAIN`], skipping breakpoint neighbourhoods. The error measure is
/// `|grad - fd| / max(1, |grad|)`.
pub fn gradcheck(id: LandscapeId, samples: usize, seed: u64) -> GradCheck {
    gradcheck_with(id, samples, seed, FD_STEP)
}

/// [`gradcheck`] with difference step `h`.
pub fn gradcheck_with(id: LandscapeId, samples: usize, seed: u64, h: f64) -> GradCheck {
    let land = Landscape::new(id);
    let mut rng = rng::seeded(seed);
    let mut worst = (0.0_f64, f64::NAN);
    let mut taken = 0;
    while taken < samples {
        let x = rng.gen_range(DOMAIN.0..DOMAIN.1);
        if land.breakpoint_distance(x) < BREAKPOINT_EXCLUSION {
            continue;
        }
        taken += 1;
        let g = land.grad(x);
        let fd = finite_diff(|y| land.eval(y), x, h);
        let err = (g - fd).abs() / g.abs().max(1.0);
        if err > worst.0 || worst.1.is_nan() {
            worst = (err, x);
        }
    }
    GradCheck {
        id,
        samples,
        max_rel_error: worst.0,
        worst_x: worst.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval(LandscapeId::F1, -0.3), 0.0);
        assert!(close(eval(LandscapeId::F1, 0.2), 0.05, 1e-15));
        assert!(close(eval(LandscapeId::F1, -1.0), 0.49, 1e-15));
        assert!(close(eval(LandscapeId::F2, -1.0), 4.85, 1e-12));
        assert!(close(eval(LandscapeId::F3, -0.4), 0.35, 1e-15));
        assert_eq!(piece_index(LandscapeId::F3, -0.4), 1);
    }

    #[test]
    fn grad_examples() {
        assert!(close(grad(LandscapeId::F1, -1.0), -1.4, 1e-15));
        assert_eq!(grad(LandscapeId::F3, 0.2), 7.0 / 8.0);
        assert_eq!(grad(LandscapeId::F2, 0.0), 0.0);
        // Breakpoints take the left piece.
        assert_eq!(grad(LandscapeId::F1, 0.0), 0.6);
        assert_eq!(grad(LandscapeId::F2, -0.9), -40.0);
        assert_eq!(grad(LandscapeId::F3, 0.0), -7.0 / 8.0);
        assert_eq!(grad(LandscapeId::F3, 0.5), -1.0);
    }

    #[test]
    fn finite_diff_exact_cases() {
        for &x in &[-3.0, 0.0, 0.5, 2.0] {
            assert_eq!(finite_diff(|y| y, x, 0.25), 1.0);
        }
        assert_eq!(finite_diff(|y| y * y, 3.0, 0.5), 6.0);
        assert_eq!(finite_diff(|y| y * y, 3.0, 0.125), 6.0);
        let fd = finite_diff(|y| eval(LandscapeId::F2, y), 0.5, FD_STEP);
        let g = grad(LandscapeId::F2, 0.5);
        assert!((fd - g).abs() / g.abs() < GRAD_TOLERANCE);
    }

    #[test]
    fn gradcheck_all_landscapes() {
        for id in LandscapeId::ALL {
            let r = gradcheck(id, 1000, 17);
            assert!(r.passed(), "{id}: {r:?}");
        }
    }

    #[test]
    fn continuity_at_breakpoints() {
        let h = 1e-12;
        for id in [LandscapeId::F1, LandscapeId::F3] {
            for &b in breakpoints(id) {
                assert!(close(eval(id, b), eval(id, b + h), 1e-9), "{id} at {b}");
            }
        }
        // F2's pieces do not meet: 0.85 on the left, about 0.8353 on the right.
        let left = eval(LandscapeId::F2, -0.9);
        let right = eval(LandscapeId::F2, -0.9 + h);
        assert!(close(left, 0.85, 1e-12));
        assert!((left - right).abs() > 1e-2);
    }

    #[test]
    fn piece_membership_is_total() {
        for id in LandscapeId::ALL {
            let bps = breakpoints(id);
            assert!(bps.windows(2).all(|w| w[0] < w[1]));
            let mut last = 0;
            for i in 0..=40_000 {
                let x = -2.0 + i as f64 * 1e-4;
                let p = piece_index(id, x);
                assert!(p <= bps.len());
                assert!(p == last || p == last + 1);
                last = p;
            }
            assert_eq!(last, bps.len());
        }
    }

    #[test]
    fn f1_minimum_certified_on_grid() {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=40_000 {
            let x = -2.0 + i as f64 * 1e-4;
            let v = eval(LandscapeId::F1, x);
            if v < best.0 {
                best = (v, x);
            }
        }
        assert!(close(best.1, -0.3, 1e-4));
        assert!(best.0 < 1e-8);
        let f = |x| eval(LandscapeId::F1, x);
        assert!(f(0.2) < f(0.2 - 1e-3) && f(0.2) < f(0.2 + 1e-3));
    }

    #[test]
    fn known_minima_are_stationary_or_kinks() {
        for id in LandscapeId::ALL {
            let land = Landscape::new(id);
            for m in &land.known_minima {
                let f = |x| land.eval(x);
                assert!(f(m.x) <= f(m.x - 1e-4) && f(m.x) <= f(m.x + 1e-4), "{id} {m:?}");
                if land.breakpoint_distance(m.x) > BREAKPOINT_EXCLUSION {
                    assert!(land.grad(m.x).abs() < 1e-12, "{id} {m:?}");
                }
            }
            let globals = land.known_minima.iter().filter(|m| m.global).count();
            assert!(globals <= 1);
        }
    }

    #[test]
    fn f3_is_a_valley_at_zero() {
        let f = |x| eval(LandscapeId::F3, x);
        assert_eq!(f(0.0), 0.0);
        assert!(f(-0.2) > 0.0 && f(0.2) > 0.0);
        assert!(close(f(-0.5), 0.25, 1e-15) && close(f(0.5), 0.25, 1e-15));
    }

    #[test]
    fn scenario_examples() {
        let s1 = scenario_landscape(Scenario::S1);
        assert!(s1.grad(0.0).abs() <= 1e-3);
        let s2 = scenario_landscape(Scenario::S2);
        for i in 0..=4000 {
            let x = -2.0 + i as f64 * 1e-3;
            assert!(s2.grad(x) >= 0.5);
        }
        let s3 = scenario_landscape(Scenario::S3);
        let mut changes = 0;
        let mut prev = s3.grad(-2.0).signum();
        for i in 1..=4000 {
            let s = s3.grad(-2.0 + i as f64 * 1e-3).signum();
            if s != prev && s != 0.0 {
                changes += 1;
                prev = s;
            }
        }
        assert_eq!(changes, 1);
        assert_eq!(s3.known_minima.len(), 1);
    }

    #[test]
    fn names_round_trip() {
        for id in LandscapeId::ALL {
            assert_eq!(id.name().parse::<LandscapeId>().unwrap(), id);
        }
        assert_eq!("S3".parse::<LandscapeId>().unwrap(), LandscapeId::SteepValley);
        assert!(matches!("f9".parse::<LandscapeId>(), Err(Error::UnknownLandscape(_))));
    }
}
