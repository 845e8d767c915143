//! Dense parameter vectors and the element-wise primitives shared by every
//! optimizer kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense vector of `f64` coordinates.
///
/// Vectors built through [`ParameterVector::new`] are checked to be finite.
/// Kernels build intermediates with [`ParameterVector::from_raw`] and call
/// [`ParameterVector::ensure_finite`] at their output boundary instead of
/// branching per element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let v = Self(values);
        v.ensure_finite(0)?;
        Ok(v)
    }

    pub fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Returns the first non-finite coordinate as [`Error::NonFinite`] tagged
    /// with `step`.
    pub fn ensure_finite(&self, step: u64) -> Result<()> {
        match self.0.iter().position(|x| !x.is_finite()) {
            Some(coordinate) => Err(Error::NonFinite { step, coordinate }),
            None => Ok(()),
        }
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        other.ensure_dim(self.dim())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(v: ParameterVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for ParameterVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `v[i] * v[i]` element-wise. Overflow surfaces as `+inf` and is caught by
/// the caller's finiteness check.
pub fn elementwise_square(v: &ParameterVector) -> ParameterVector {
    v.map(|x| x * x)
}

/// One exponential-moving-average update, `beta * prev + (1 - beta) * x`.
///
/// Evaluated as `prev + (1 - beta) * (x - prev)` so that `prev == x` is an
/// exact fixed point and the result never leaves `[min(prev, x), max(prev, x)]`.
pub fn ema_update(prev: &ParameterVector, x: &ParameterVector, beta: f64) -> Result<ParameterVector> {
    let w = 1.0 - beta;
    prev.zip_map(x, |p, xi| ema_scalar(p, xi, w))
}

#[inline]
pub(crate) fn ema_scalar(prev: f64, x: f64, one_minus_beta: f64) -> f64 {
    prev + one_minus_beta * (x - prev)
}

/// `1 - beta^t`, rejecting the degenerate case where it rounds to zero.
pub fn correction_factor(beta: f64, t: u64) -> Result<f64> {
    let c = 1.0 - powi(beta, t);
    if c == 0.0 || !c.is_finite() {
        Err(Error::DegenerateCorrection { beta, t })
    } else {
        Ok(c)
    }
}

/// Removes the zero-initialisation bias of an EMA after `t` updates.
pub fn bias_correct(moment: &ParameterVector, beta: f64, t: u64) -> Result<ParameterVector> {
    let c = correction_factor(beta, t)?;
    Ok(moment.map(|m| m / c))
}

/// `base^t` for step counters. Saturates the exponent at `i32::MAX`, where any
/// base below one has long since underflowed.
#[inline]
pub fn powi(base: f64, t: u64) -> f64 {
    base.powi(t.min(i32::MAX as u64) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn square_basic() {
        assert_eq!(elementwise_square(&pv(&[0.0])), pv(&[0.0]));
        assert_eq!(elementwise_square(&pv(&[-2.0, 3.0])), pv(&[4.0, 9.0]));
    }

    #[test]
    fn square_overflow_is_caught_downstream() {
        // 1e154² = 1e308 still fits below f64::MAX; one decade more does not.
        assert!(elementwise_square(&pv(&[1e154]))[0].is_finite());
        let sq = elementwise_square(&pv(&[1e155, 1.0]));
        assert!(sq[0].is_infinite());
        assert_eq!(
            sq.ensure_finite(7),
            Err(Error::NonFinite {
                step: 7,
                coordinate: 0
            })
        );
    }

    #[test]
    fn new_rejects_nan() {
        assert!(ParameterVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ParameterVector::new(vec![f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn ema_examples() {
        let c = 3.25;
        let r = ema_update(&pv(&[0.0]), &pv(&[c]), 0.9).unwrap();
        assert_eq!(r[0], (1.0 - 0.9) * c);
        assert!((r[0] - 0.1 * c).abs() < 1e-15);

        let x = pv(&[0.3, -7.1, 1e-5]);
        assert_eq!(ema_update(&x, &x, 0.9).unwrap(), x);

        assert_eq!(ema_update(&pv(&[1.0]), &pv(&[3.0]), 0.5).unwrap(), pv(&[2.0]));
    }

    #[test]
    fn ema_shape_mismatch() {
        let err = ema_update(&pv(&[1.0]), &pv(&[1.0, 2.0]), 0.9).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn bias_correct_first_step() {
        let m = pv(&[0.1]);
        let r = bias_correct(&m, 0.9, 1).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bias_correct_fifty_steps_against_scalar_loop() {
        // Scalar EMA of the constant 1 and an independent product for beta^t.
        let beta = 0.999;
        let mut m = 0.0_f64;
        let mut beta_t = 1.0_f64;
        for _ in 0..50 {
            m = beta * m + (1.0 - beta) * 1.0;
            beta_t *= beta;
        }
        assert!((m - 0.0488).abs() < 1e-4);
        let r = bias_correct(&pv(&[m]), beta, 50).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12);

        let fixed = bias_correct(&pv(&[0.0488]), beta, 50).unwrap();
        assert!((fixed[0] - 0.0488 / (1.0 - beta_t)).abs() < 1e-12);
    }

    #[test]
    fn bias_correct_degenerate() {
        assert_eq!(
            bias_correct(&pv(&[1.0]), 1.0, 3).unwrap_err(),
            Error::DegenerateCorrection { beta: 1.0, t: 3 }
        );
    }

    #[test]
    fn bias_correct_constant_stream_exact() {
        for &beta in &[0.9, 0.99, 0.999] {
            for &c in &[1.0, -3.7, 0.125, 9.5] {
                let mut m = ParameterVector::zeros(1);
                let x = pv(&[c]);
                for t in 1..=1000u64 {
                    m = ema_update(&m, &x, beta).unwrap();
                    let r = bias_correct(&m, beta, t).unwrap();
                    assert!((r[0] - c).abs() < 1e-12, "beta={beta} c={c} t={t}: {}", r[0]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ema_is_convex_combination(
            prev in prop::collection::vec(-1e6f64..1e6, 1..8),
            shift in prop::collection::vec(-1e6f64..1e6, 8),
            beta in 0.0f64..0.9999,
        ) {
            let x: Vec<f64> = prev.iter().zip(&shift).map(|(p, s)| p + s).collect();
            let r = ema_update(&pv(&prev), &pv(&x), beta).unwrap();
            for i in 0..prev.len() {
                prop_assert!(r[i] >= prev[i].min(x[i]));
                prop_assert!(r[i] <= prev[i].max(x[i]));
            }
        }

        #[test]
        fn primitives_are_pure(v in prop::collection::vec(-1e3f64..1e3, 1..6), beta in 0.0f64..0.999) {
            let a = pv(&v);
            let b = elementwise_square(&a);
            prop_assert_eq!(ema_update(&a, &b, beta).unwrap(), ema_update(&a, &b, beta).unwrap());
            prop_assert_eq!(bias_correct(&a, beta, 3).unwrap(), bias_correct(&a, beta, 3).unwrap());
        }
    }
}
