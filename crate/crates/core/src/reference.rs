//! Scalar reference transcriptions of the eight step rules.
//!
//! Written line-for-line from the pseudocode, one coordinate at a time, with
//! none of the shared helpers used by [`crate::optim`]. Powers of β are
//! accumulated by repeated multiplication rather than `powi`. This module is
//! the oracle the vectorised kernels are checked against; keep it dumb.

use crate::config::OptimizerConfig;
use crate::optim::OptimizerKind;

#[derive(Debug, Clone)]
pub struct ScalarReference {
    kind: OptimizerKind,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    g_prev: Vec<f64>,
    /// θ_{t-2} as seen at the start of the next step.
    theta_before: Vec<f64>,
    beta1_pow: f64,
    beta2_pow: f64,
    lambda_pow: f64,
}

impl ScalarReference {
    pub fn new(kind: OptimizerKind, dim: usize) -> Self {
        Self {
            kind,
            t: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            g_prev: vec![0.0; dim],
            theta_before: vec![0.0; dim],
            beta1_pow: 1.0,
            beta2_pow: 1.0,
            lambda_pow: 1.0,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// One step from `theta` (θ_{t-1}) with gradient `g`; returns θ_t.
    pub fn step(&mut self, cfg: &OptimizerConfig, theta: &[f64], g: &[f64]) -> Vec<f64> {
        self.t += 1;
        if self.t > 1 {
            self.lambda_pow *= cfg.lambda;
        }
        self.beta1_pow *= cfg.beta1;
        self.beta2_pow *= cfg.beta2;
        let beta1 = if cfg.lambda < 1.0 {
            cfg.beta1 * self.lambda_pow
        } else {
            cfg.beta1
        };
        let out = match self.kind {
            OptimizerKind::Adam => self.adam(cfg, beta1, theta, g),
            OptimizerKind::AdamInject => self.adam_inject(cfg, beta1, theta, g),
            OptimizerKind::DiffGrad => self.diffgrad(cfg, beta1, theta, g),
            OptimizerKind::DiffGradInject => self.diffgrad_inject(cfg, beta1, theta, g),
            OptimizerKind::Radam => self.radam(cfg, beta1, theta, g),
            OptimizerKind::RadamInject => self.radam_inject(cfg, beta1, theta, g),
            OptimizerKind::AdaBelief => self.adabelief(cfg, beta1, theta, g),
            OptimizerKind::AdaBeliefInject => self.adabelief_inject(cfg, beta1, theta, g),
        };
        self.theta_before = theta.to_vec();
        out
    }

    fn adam(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / (1.0 - self.beta1_pow);
            let v_hat = self.v[i] / (1.0 - self.beta2_pow);
            out[i] = theta[i] - cfg.alpha * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        out
    }

    fn adam_inject(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            if self.t == 1 {
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            } else {
                let dtheta = self.theta_before[i] - theta[i];
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * (g[i] + dtheta * g[i] * g[i]) / cfg.k;
            }
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let s_hat = self.m[i] / (1.0 - self.beta1_pow);
            let v_hat = self.v[i] / (1.0 - self.beta2_pow);
            out[i] = theta[i] - cfg.alpha * s_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        out
    }

    fn diffgrad(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            let xi = 1.0 / (1.0 + (-(g[i] - self.g_prev[i]).abs()).exp());
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / (1.0 - self.beta1_pow);
            let v_hat = self.v[i] / (1.0 - self.beta2_pow);
            out[i] = theta[i] - cfg.alpha * xi * m_hat / (v_hat.sqrt() + cfg.epsilon);
            self.g_prev[i] = g[i];
        }
        out
    }

    fn diffgrad_inject(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            let xi = 1.0 / (1.0 + (-(g[i] - self.g_prev[i]).abs()).exp());
            if self.t == 1 {
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            } else {
                let dtheta = self.theta_before[i] - theta[i];
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * (g[i] + dtheta * g[i] * g[i]) / cfg.k;
            }
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let s_hat = self.m[i] / (1.0 - self.beta1_pow);
            let v_hat = self.v[i] / (1.0 - self.beta2_pow);
            out[i] = theta[i] - cfg.alpha * xi * s_hat / (v_hat.sqrt() + cfg.epsilon);
            self.g_prev[i] = g[i];
        }
        out
    }

    fn radam(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let t = self.t as f64;
        let rho_inf = 2.0 / (1.0 - cfg.beta2) - 1.0;
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let rho_t = rho_inf - 2.0 * t * self.beta2_pow / (1.0 - self.beta2_pow);
            if rho_t >= 5.0 {
                let rho_u = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
                let rho_d = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
                let rho = ((1.0 - cfg.beta2) * rho_u / rho_d).sqrt();
                let alpha1 = rho * cfg.alpha / (1.0 - self.beta1_pow);
                out[i] = theta[i] - alpha1 * self.m[i] / (self.v[i].sqrt() + cfg.epsilon);
            } else {
                let alpha2 = cfg.alpha / (1.0 - self.beta1_pow);
                out[i] = theta[i] - alpha2 * self.m[i];
            }
        }
        out
    }

    /// Transcribed with the alternative sign convention:
    /// `Δθ = θ_{t-1} - θ_{t-2}` and numerator `g - Δθ·g²`.
    fn radam_inject(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let t = self.t as f64;
        let rho_inf = 2.0 / (1.0 - cfg.beta2) - 1.0;
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            if self.t == 1 {
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            } else {
                let dtheta = theta[i] - self.theta_before[i];
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * (g[i] - dtheta * g[i] * g[i]) / cfg.k;
            }
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let rho_t = rho_inf - 2.0 * t * self.beta2_pow / (1.0 - self.beta2_pow);
            if rho_t >= 5.0 {
                let rho_u = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
                let rho_d = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
                let rho = ((1.0 - cfg.beta2) * rho_u / rho_d).sqrt();
                let alpha1 = rho * cfg.alpha / (1.0 - self.beta1_pow);
                out[i] = theta[i] - alpha1 * self.m[i] / (self.v[i].sqrt() + cfg.epsilon);
            } else {
                let alpha2 = cfg.alpha / (1.0 - self.beta1_pow);
                out[i] = theta[i] - alpha2 * self.m[i];
            }
        }
        out
    }

    fn adabelief(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            let belief = g[i] - self.m[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * belief * belief;
            let m_hat = self.m[i] / (1.0 - self.beta1_pow);
            let v_hat = self.v[i] / (1.0 - self.beta2_pow);
            out[i] = theta[i] - cfg.alpha * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        out
    }

    fn adabelief_inject(&mut self, cfg: &OptimizerConfig, beta1: f64, theta: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        for i in 0..theta.len() {
            if self.t == 1 {
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g[i];
            } else {
                let dtheta = self.theta_before[i] - theta[i];
                self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * (g[i] + dtheta * g[i] * g[i]) / cfg.k;
            }
            let belief = g[i] - self.m[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * belief * belief;
            let s_hat = self.m[i] / (1.0 - self.beta1_pow);
            let v_hat = self.v[i] / (1.0 - self.beta2_pow);
            out[i] = theta[i] - cfg.alpha * s_hat / (v_hat.sqrt() + cfg.epsilon);
        }
        out
    }
}
