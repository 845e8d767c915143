//! A one-hidden-layer perceptron on two Gaussian blobs: a small, noisy
//! minibatch problem for exercising the optimizers end to end.
//!
//! Parameters flatten into a [`ParameterVector`] in the order
//! `W1` (h × d, row-major), `b1` (h), `W2` (h), `b2` (1).

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::OptimizerConfig;
use crate::error::{Error, Result};
use crate::optim::{step, OptimizerKind, OptimizerState};
use crate::rng;
use crate::vector::ParameterVector;

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_D: usize = 2;
pub const DEFAULT_HIDDEN: usize = 16;
pub const DEFAULT_EPOCHS: usize = 50;
pub const DEFAULT_BATCH: usize = 64;
pub const DEFAULT_K_VALUES: [f64; 3] = [1.0, 2.0, 3.0];
/// Per-coordinate offset of each blob's mean from the origin.
pub const BLOB_OFFSET: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDataset {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    /// n × d, row-major.
    pub features: Vec<f64>,
    /// 0.0 or 1.0.
    pub labels: Vec<f64>,
}

impl SynthDataset {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1.0).count()
    }

    pub fn batch(&self, idx: &[usize]) -> Batch {
        let mut x = Vec::with_capacity(idx.len() * self.d);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            y.push(self.labels[i]);
        }
        Batch { d: self.d, x, y }
    }

    pub fn full_batch(&self) -> Batch {
        Batch {
            d: self.d,
            x: self.features.clone(),
            y: self.labels.clone(),
        }
    }
}

/// Two unit-variance blobs centred at `±BLOB_OFFSET` in every coordinate.
/// Labels alternate before shuffling, so the classes are balanced exactly
/// (up to one sample for odd `n`).
pub fn synth_dataset(seed: u64, n: usize, d: usize) -> Result<SynthDataset> {
    if n < 100 || d < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 100 and d >= 2, got n={n} d={d}")));
    }
    let mut rng = rng::seeded(seed);
    let mut labels: Vec<f64> = (0..n).map(|i| (i % 2) as f64).collect();
    labels.shuffle(&mut rng);
    let mut features = Vec::with_capacity(n * d);
    for &y in &labels {
        let centre = if y == 1.0 { BLOB_OFFSET } else { -BLOB_OFFSET };
        for _ in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(centre + z);
        }
    }
    Ok(SynthDataset {
        seed,
        n,
        d,
        features,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub d: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub d: usize,
    pub h: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpModel {
    pub fn zeros(d: usize, h: usize) -> Self {
        Self {
            d,
            h,
            w1: vec![0.0; h * d],
            b1: vec![0.0; h],
            w2: vec![0.0; h],
            b2: 0.0,
        }
    }

    /// Normal weights scaled by `1/√fan_in`, zero biases.
    pub fn init(seed: u64, d: usize, h: usize) -> Self {
        let mut rng = rng::substream(seed, 0);
        let mut normal = |scale: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * scale
                })
                .collect()
        };
        let w1 = normal(1.0 / (d as f64).sqrt(), h * d);
        let w2 = normal(1.0 / (h as f64).sqrt(), h);
        Self {
            d,
            h,
            w1,
            b1: vec![0.0; h],
            w2,
            b2: 0.0,
        }
    }

    pub fn num_params(&self) -> usize {
        self.h * self.d + 2 * self.h + 1
    }

    pub fn to_vector(&self) -> ParameterVector {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        ParameterVector::from_raw(v)
    }

    pub fn from_vector(d: usize, h: usize, v: &ParameterVector) -> Result<Self> {
        let n = h * d + 2 * h + 1;
        v.ensure_dim(n)?;
        let s = v.as_slice();
        Ok(Self {
            d,
            h,
            w1: s[..h * d].to_vec(),
            b1: s[h * d..h * d + h].to_vec(),
            w2: s[h * d + h..h * d + 2 * h].to_vec(),
            b2: s[n - 1],
        })
    }

    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        (0..self.h)
            .map(|j| {
                let w = &self.w1[j * self.d..(j + 1) * self.d];
                let pre: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.b1[j];
                pre.tanh()
            })
            .collect()
    }

    fn logit(&self, a: &[f64]) -> f64 {
        self.w2.iter().zip(a).map(|(w, a)| w * a).sum::<f64>() + self.b2
    }
}

/// `−[y ln σ(z) + (1−y) ln(1−σ(z))]`, evaluated without overflow.
pub fn bce_with_logits(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy over `batch`, and the logits.
pub fn forward_loss(model: &MlpModel, batch: &Batch) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let logits: Vec<f64> = (0..batch.len())
        .map(|i| model.logit(&model.hidden(batch.row(i))))
        .collect();
    let loss = logits
        .iter()
        .zip(&batch.y)
        .map(|(&z, &y)| bce_with_logits(z, y))
        .sum::<f64>()
        / batch.len() as f64;
    if !loss.is_finite() {
        return Err(Error::NonFinite { step: 0, coordinate: 0 });
    }
    Ok((loss, logits))
}

/// Gradient of the mean loss in flattened parameter order.
pub fn backward(model: &MlpModel, batch: &Batch) -> Result<ParameterVector> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let (d, h) = (model.d, model.h);
    let inv_n = 1.0 / batch.len() as f64;
    let mut gw1 = vec![0.0; h * d];
    let mut gb1 = vec![0.0; h];
    let mut gw2 = vec![0.0; h];
    let mut gb2 = 0.0;
    for i in 0..batch.len() {
        let x = batch.row(i);
        let a = model.hidden(x);
        let dz = (sigmoid(model.logit(&a)) - batch.y[i]) * inv_n;
        gb2 += dz;
        for j in 0..h {
            gw2[j] += dz * a[j];
            let dpre = dz * model.w2[j] * (1.0 - a[j] * a[j]);
            gb1[j] += dpre;
            for (g, &xk) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                *g += dpre * xk;
            }
        }
    }
    let mut flat = gw1;
    flat.extend(gb1);
    flat.extend(gw2);
    flat.push(gb2);
    let g = ParameterVector::from_raw(flat);
    g.ensure_finite(0)?;
    Ok(g)
}

/// Fraction of samples whose logit sign matches the label.
pub fn accuracy(model: &MlpModel, batch: &Batch) -> Result<f64> {
    let (_, logits) = forward_loss(model, batch)?;
    let hits = logits
        .iter()
        .zip(&batch.y)
        .filter(|(&z, &y)| (z > 0.0) == (y == 1.0))
        .count();
    Ok(hits as f64 / batch.len() as f64)
}

/// Worst `|g − fd| / max(1, |g|)` over every coordinate, with central
/// differences of step `h`.
pub fn gradcheck(model: &MlpModel, batch: &Batch, h: f64) -> Result<f64> {
    let g = backward(model, batch)?;
    let base = model.to_vector().into_vec();
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let at = |delta: f64| -> Result<f64> {
            let mut v = base.clone();
            v[i] += delta;
            let m = MlpModel::from_vector(model.d, model.h, &ParameterVector::from_raw(v))?;
            Ok(forward_loss(&m, batch)?.0)
        };
        let fd = (at(h)? - at(-h)?) / (2.0 * h);
        worst = worst.max((g[i] - fd).abs() / g[i].abs().max(1.0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub seed: u64,
    /// Fraction of epochs trained at the full learning rate; the rest use
    /// `alpha * decay_factor`.
    pub decay_after: f64,
    pub decay_factor: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH,
            hidden: DEFAULT_HIDDEN,
            seed: 0,
            decay_after: 0.8,
            decay_factor: 0.1,
        }
    }
}

impl TrainSettings {
    /// Number of epochs at the full rate.
    pub fn full_rate_epochs(&self) -> usize {
        (self.epochs as f64 * self.decay_after).round() as usize
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub kind: OptimizerKind,
    pub k: f64,
    pub seed: u64,
    /// Full-dataset loss before the first update.
    pub initial_loss: f64,
    /// Full-dataset loss at the end of each epoch.
    pub epoch_loss: Vec<f64>,
    pub final_accuracy: f64,
    pub steps: u64,
    /// Not serialised and ignored by `==`: it is the one field that differs
    /// between otherwise identical runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl PartialEq for TrainReport {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
            && self.k == o.k
            && self.seed == o.seed
            && self.initial_loss == o.initial_loss
            && self.epoch_loss == o.epoch_loss
            && self.final_accuracy == o.final_accuracy
            && self.steps == o.steps
    }
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_loss.last().copied().unwrap_or(self.initial_loss)
    }
}

/// What [`train_observed`] reports after every optimizer step.
pub struct TraceStep<'a> {
    pub epoch: usize,
    pub batch: usize,
    pub config: &'a OptimizerConfig,
    pub theta_in: &'a ParameterVector,
    pub grad: &'a ParameterVector,
    pub state: &'a OptimizerState,
    pub theta_out: &'a ParameterVector,
}

pub fn train(
    data: &SynthDataset,
    kind: OptimizerKind,
    cfg: &OptimizerConfig,
    settings: &TrainSettings,
) -> Result<TrainReport> {
    train_observed(data, kind, cfg, settings, |_| {})
}

/// Shuffled minibatch training; the final short batch of an epoch is kept.
pub fn train_observed(
    data: &SynthDataset,
    kind: OptimizerKind,
    cfg: &OptimizerConfig,
    settings: &TrainSettings,
    mut observe: impl FnMut(&TraceStep<'_>),
) -> Result<TrainReport> {
    cfg.validate()?;
    if settings.epochs == 0 || settings.batch_size == 0 || settings.batch_size > data.n {
        return Err(Error::InvalidConfig(format!(
            "need epochs >= 1 and 1 <= batch_size <= {}",
            data.n
        )));
    }
    let started = Instant::now();
    let (d, h) = (data.d, settings.hidden);
    let full = data.full_batch();
    let mut theta = MlpModel::init(settings.seed, d, h).to_vector();
    let mut state = OptimizerState::new(theta.dim());
    let mut rng = rng::substream(settings.seed, 1);
    let mut order: Vec<usize> = (0..data.n).collect();
    let initial_loss = forward_loss(&MlpModel::from_vector(d, h, &theta)?, &full)?.0;
    let mut epoch_loss = Vec::with_capacity(settings.epochs);
    let slow = cfg.with_alpha(cfg.alpha * settings.decay_factor);
    for epoch in 0..settings.epochs {
        let ecfg = if epoch < settings.full_rate_epochs() { *cfg } else { slow };
        order.shuffle(&mut rng);
        for (b, idx) in order.chunks(settings.batch_size).enumerate() {
            let diverged = |e: Error| match e {
                Error::NonFinite { coordinate, .. } => Error::TrainingDiverged {
                    epoch,
                    batch: b,
                    coordinate,
                },
                other => other,
            };
            let batch = data.batch(idx);
            let model = MlpModel::from_vector(d, h, &theta)?;
            let g = backward(&model, &batch).map_err(diverged)?;
            let (next, new_theta) = step(kind, &state, &ecfg, &theta, &g).map_err(diverged)?;
            observe(&TraceStep {
                epoch,
                batch: b,
                config: &ecfg,
                theta_in: &theta,
                grad: &g,
                state: &next,
                theta_out: &new_theta,
            });
            state = next;
            theta = new_theta;
        }
        let model = MlpModel::from_vector(d, h, &theta)?;
        let loss = forward_loss(&model, &full).map_err(|_| Error::TrainingDiverged {
            epoch,
            batch: 0,
            coordinate: 0,
        })?;
        epoch_loss.push(loss.0);
    }
    let model = MlpModel::from_vector(d, h, &theta)?;
    Ok(TrainReport {
        kind,
        k: cfg.k,
        seed: settings.seed,
        initial_loss,
        epoch_loss,
        final_accuracy: accuracy(&model, &full)?,
        steps: state.t,
        wall_time: started.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub kind: OptimizerKind,
    pub k: f64,
    pub reports: Vec<TrainReport>,
    pub mean_final_loss: f64,
    pub std_final_loss: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trains every (kind, k, seed) cell in parallel; cells come back ordered by
/// kind, then k, with per-seed reports in `seeds` order.
pub fn sweep_k(
    data: &SynthDataset,
    kinds: &[OptimizerKind],
    k_values: &[f64],
    cfg: &OptimizerConfig,
    seeds: &[u64],
    settings: &TrainSettings,
) -> Result<Vec<SweepCell>> {
    if k_values.is_empty() || kinds.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let grid: Vec<(OptimizerKind, f64, u64)> = kinds
        .iter()
        .flat_map(|&kind| {
            k_values
                .iter()
                .flat_map(move |&k| seeds.iter().map(move |&s| (kind, k, s)))
        })
        .collect();
    let reports = grid
        .par_iter()
        .map(|&(kind, k, seed)| train(data, kind, &cfg.with_k(k), &TrainSettings { seed, ..*settings }))
        .collect::<Result<Vec<_>>>()?;
    Ok(reports
        .chunks(seeds.len())
        .map(|chunk| {
            let (mean_final_loss, std_final_loss) =
                mean_std(&chunk.iter().map(TrainReport::final_loss).collect::<Vec<_>>());
            let (mean_accuracy, std_accuracy) =
                mean_std(&chunk.iter().map(|r| r.final_accuracy).collect::<Vec<_>>());
            SweepCell {
                kind: chunk[0].kind,
                k: chunk[0].k,
                reports: chunk.to_vec(),
                mean_final_loss,
                std_final_loss,
                mean_accuracy,
                std_accuracy,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_data() -> SynthDataset {
        synth_dataset(1, DEFAULT_N, DEFAULT_D).unwrap()
    }

    #[test]
    fn dataset_is_deterministic_and_balanced() {
        let a = small_data();
        assert_eq!(a, small_data());
        assert_ne!(a, synth_dataset(2, DEFAULT_N, DEFAULT_D).unwrap());
        assert!((450..=550).contains(&a.positives()));
        assert!(a.features.iter().all(|x| x.is_finite()));
        assert!(synth_dataset(1, 99, 2).is_err());
        assert!(synth_dataset(1, 100, 1).is_err());
    }

    #[test]
    fn blobs_are_linearly_separable_enough() {
        // Fisher discriminant with the pooled covariance, solved in closed
        // form for d = 2.
        let data = small_data();
        let mut mean = [[0.0; 2]; 2];
        let mut count = [0.0; 2];
        for i in 0..data.n {
            let c = data.labels[i] as usize;
            count[c] += 1.0;
            for k in 0..2 {
                mean[c][k] += data.row(i)[k];
            }
        }
        for c in 0..2 {
            for k in 0..2 {
                mean[c][k] /= count[c];
            }
        }
        let mut s = [[0.0; 2]; 2];
        for i in 0..data.n {
            let c = data.labels[i] as usize;
            let r = [data.row(i)[0] - mean[c][0], data.row(i)[1] - mean[c][1]];
            for a in 0..2 {
                for b in 0..2 {
                    s[a][b] += r[a] * r[b];
                }
            }
        }
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
        let dm = [mean[1][0] - mean[0][0], mean[1][1] - mean[0][1]];
        let w = [inv[0][0] * dm[0] + inv[0][1] * dm[1], inv[1][0] * dm[0] + inv[1][1] * dm[1]];
        let mid = [(mean[0][0] + mean[1][0]) / 2.0, (mean[0][1] + mean[1][1]) / 2.0];
        let hits = (0..data.n)
            .filter(|&i| {
                let r = data.row(i);
                let score = w[0] * (r[0] - mid[0]) + w[1] * (r[1] - mid[1]);
                (score > 0.0) == (data.labels[i] == 1.0)
            })
            .count();
        assert!(hits as f64 / data.n as f64 > 0.8, "{hits}");
    }

    #[test]
    fn flatten_round_trip() {
        let m = MlpModel::init(3, 2, 16);
        assert_eq!(m.num_params(), 65);
        let v = m.to_vector();
        assert_eq!(MlpModel::from_vector(2, 16, &v).unwrap(), m);
        assert_eq!(v[0], m.w1[0]);
        assert_eq!(v[32], m.b1[0]);
        assert_eq!(v[48], m.w2[0]);
        assert_eq!(v[64], m.b2);
        assert!(MlpModel::from_vector(2, 15, &v).is_err());
    }

    #[test]
    fn forward_examples() {
        let data = small_data();
        let batch = data.batch(&(0..20).collect::<Vec<_>>());
        let (loss, _) = forward_loss(&MlpModel::zeros(2, 16), &batch).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_with_logits(20.0, 1.0) < 1e-8);
        assert!(bce_with_logits(-20.0, 0.0) < 1e-8);
        assert!(bce_with_logits(-800.0, 1.0).is_finite());
        assert!(forward_loss(&MlpModel::zeros(2, 16), &data.batch(&[])).is_err());
    }

    #[test]
    fn forward_matches_hand_rolled_pass() {
        let data = small_data();
        let batch = data.batch(&[3, 14, 15, 92, 65]);
        let m = MlpModel::init(3, 2, 4);
        let mut total = 0.0;
        for i in 0..batch.len() {
            let x = batch.row(i);
            let mut z = m.b2;
            for j in 0..4 {
                let a = (m.w1[2 * j] * x[0] + m.w1[2 * j + 1] * x[1] + m.b1[j]).tanh();
                z += m.w2[j] * a;
            }
            let p = 1.0 / (1.0 + (-z).exp());
            let y = batch.y[i];
            total += -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
        }
        let (loss, _) = forward_loss(&m, &batch).unwrap();
        assert!((loss - total / 5.0).abs() < 1e-14);
    }

    #[test]
    fn backward_at_origin() {
        let batch = Batch {
            d: 2,
            x: vec![0.0; 10],
            y: vec![1.0, 0.0, 1.0, 1.0, 1.0],
        };
        let g = backward(&MlpModel::zeros(2, 16), &batch).unwrap();
        assert!((g[64] - (0.5 - 0.8)).abs() < 1e-15);
        assert!(g.iter().take(64).all(|&x| x == 0.0));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let data = small_data();
        let batch = data.batch(&(100..120).collect::<Vec<_>>());
        for seed in [3, 4, 5] {
            let m = MlpModel::init(seed, 2, 16);
            assert!(gradcheck(&m, &batch, 1e-5).unwrap() < 1e-5);
        }
    }

    #[test]
    fn duplicated_batch_keeps_mean_gradient() {
        let data = small_data();
        let idx: Vec<usize> = (0..32).collect();
        let twice: Vec<usize> = idx.iter().chain(&idx).copied().collect();
        let m = MlpModel::init(7, 2, 16);
        let a = backward(&m, &data.batch(&idx)).unwrap();
        let b = backward(&m, &data.batch(&twice)).unwrap();
        for i in 0..a.dim() {
            assert!((a[i] - b[i]).abs() <= 1e-12);
        }
    }

    fn quick() -> TrainSettings {
        TrainSettings {
            epochs: 5,
            seed: 1,
            ..TrainSettings::default()
        }
    }

    #[test]
    fn zero_rate_freezes_parameters() {
        let data = small_data();
        let cfg = OptimizerConfig::default().with_alpha(0.0);
        let mut moved = false;
        let r = train_observed(&data, OptimizerKind::AdamInject, &cfg, &quick(), |s| {
            moved |= s.theta_in != s.theta_out;
        })
        .unwrap();
        assert!(!moved);
        assert!(r.epoch_loss.iter().all(|&l| l == r.initial_loss));
    }

    #[test]
    fn training_is_deterministic() {
        let data = small_data();
        let cfg = OptimizerConfig::default();
        let a = train(&data, OptimizerKind::DiffGradInject, &cfg, &quick()).unwrap();
        let b = train(&data, OptimizerKind::DiffGradInject, &cfg, &quick()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps, 5 * 16);
    }

    #[test]
    fn k_reaches_the_kernel() {
        let data = small_data();
        let s = TrainSettings { epochs: 1, ..quick() };
        let cfg = OptimizerConfig::default();
        let a = train(&data, OptimizerKind::AdamInject, &cfg.with_k(1.0), &s).unwrap();
        let b = train(&data, OptimizerKind::AdamInject, &cfg.with_k(2.0), &s).unwrap();
        assert_ne!(a.epoch_loss[0], b.epoch_loss[0]);
    }

    #[test]
    fn learning_rate_drops_after_eighty_percent() {
        let data = small_data();
        let s = TrainSettings { epochs: 10, ..quick() };
        let mut rates = Vec::new();
        train_observed(&data, OptimizerKind::Adam, &OptimizerConfig::default(), &s, |t| {
            if t.batch == 0 {
                rates.push(t.config.alpha);
            }
        })
        .unwrap();
        assert_eq!(rates[..8], [1e-3; 8]);
        assert!(rates[8..].iter().all(|&a| (a - 1e-4).abs() < 1e-18));
    }

    #[test]
    fn bad_settings_rejected() {
        let data = small_data();
        let cfg = OptimizerConfig::default();
        for s in [
            TrainSettings { epochs: 0, ..quick() },
            TrainSettings { batch_size: 0, ..quick() },
            TrainSettings { batch_size: 1001, ..quick() },
        ] {
            assert!(train(&data, OptimizerKind::Adam, &cfg, &s).is_err());
        }
    }

    #[test]
    fn divergence_is_located() {
        let data = small_data();
        let cfg = OptimizerConfig::default().with_alpha(f64::MAX);
        let err = train(&data, OptimizerKind::Adam, &cfg, &quick()).unwrap_err();
        assert!(matches!(err, Error::TrainingDiverged { epoch: 0, .. }), "{err:?}");
    }
}
