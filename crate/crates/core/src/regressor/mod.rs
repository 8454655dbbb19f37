//! Latency regressor: `[architecture encoding ++ hardware descriptor] -> latency`.
//!
//! A 135-128-128-1 rectifier network trained with Adam on the weighted mean
//! squared error of standardized log-latency. Feature and target
//! standardization statistics come from the training rows only and travel
//! with the model.

mod mlp;
mod persist;

pub use persist::{load_model, read_model, save_model, write_model, MODEL_HEADER};

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::archspace::{encode_architecture, CellArchitecture, ENCODING_LEN};
use crate::counters::{CounterMode, HardwareDescriptor, DESCRIPTOR_LEN};
use crate::error::{Error, Result};
use crate::seed::keyed_rng;
use mlp::{Adam, Network};

pub const FEATURE_LEN: usize = ENCODING_LEN + DESCRIPTOR_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSource {
    Initial,
    Adaptation,
}

/// One training example. `features` are unstandardized; `target` is the
/// natural log of latency in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub features: Vec<f64>,
    pub target: f64,
    pub weight: f64,
    pub source: RowSource,
}

impl TrainingRow {
    pub fn new(arch: &CellArchitecture, descriptor: &HardwareDescriptor, latency_s: f64, source: RowSource) -> Self {
        TrainingRow {
            features: features(arch, descriptor),
            target: latency_s.ln(),
            weight: 1.0,
            source,
        }
    }
}

/// Model input for one (architecture, device) pair.
pub fn features(arch: &CellArchitecture, descriptor: &HardwareDescriptor) -> Vec<f64> {
    let mut f = Vec::with_capacity(FEATURE_LEN);
    f.extend_from_slice(&encode_architecture(arch));
    f.extend_from_slice(descriptor.values());
    f
}

/// How descriptor columns (every column after the architecture encoding)
/// are scaled before entering the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptorScaling {
    /// Each column centered and divided by its own standard deviation.
    PerColumn,
    /// Natural log of each value, centered per column and divided by one
    /// standard deviation pooled over all descriptor columns.
    SharedLog,
}

impl fmt::Display for DescriptorScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            DescriptorScaling::PerColumn => "per_column",
            DescriptorScaling::SharedLog => "shared_log",
        })
    }
}

impl FromStr for DescriptorScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_column" => Ok(DescriptorScaling::PerColumn),
            "shared_log" => Ok(DescriptorScaling::SharedLog),
            other => Err(Error::Config(format!("unknown descriptor scaling `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub hidden: Vec<usize>,
    pub descriptor_scaling: DescriptorScaling,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 128,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            hidden: vec![128, 128],
            descriptor_scaling: DescriptorScaling::PerColumn,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        Ok(())
    }
}

/// A trained latency predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    net: Network,
    /// Statistics of the transformed columns.
    feature_mean: Vec<f64>,
    feature_std: Vec<f64>,
    target_mean: f64,
    target_std: f64,
    descriptor_scaling: DescriptorScaling,
    counter_mode: CounterMode,
    seed: u64,
}

/// First descriptor column of a feature vector of length `n_in`.
fn descriptor_start(n_in: usize) -> usize {
    ENCODING_LEN.min(n_in)
}

fn transform_row(row: &[f64], scaling: DescriptorScaling) -> Result<Vec<f64>> {
    let start = descriptor_start(row.len());
    let mut out = row.to_vec();
    if scaling == DescriptorScaling::SharedLog {
        for v in &mut out[start..] {
            if *v <= 0.0 {
                return Err(Error::Data(format!(
                    "descriptor value {v} is not positive; log scaling needs positive values"
                )));
            }
            *v = v.ln();
        }
    }
    Ok(out)
}

fn mean_std(values: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut sw, mut s1) = (0.0, 0.0);
    let collected: Vec<(f64, f64)> = values.collect();
    for &(x, w) in &collected {
        sw += w;
        s1 += w * x;
    }
    let mean = s1 / sw;
    let var = collected.iter().map(|&(x, w)| w * (x - mean) * (x - mean)).sum::<f64>() / sw;
    let std = var.sqrt();
    // constant columns (up to rounding) are left unscaled
    if std <= 1e-12 * mean.abs().max(1e-300) || std == 0.0 {
        (mean, 1.0)
    } else {
        (mean, std)
    }
}

impl RegressionModel {
    pub fn layer_sizes(&self) -> Vec<usize> {
        self.net.sizes()
    }

    pub fn counter_mode(&self) -> CounterMode {
        self.counter_mode
    }

    pub fn descriptor_scaling(&self) -> DescriptorScaling {
        self.descriptor_scaling
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count()
    }

    fn standardize(&self, rows: &[&[f64]]) -> Result<Array2<f64>> {
        let n_in = self.feature_mean.len();
        let mut x = Array2::zeros((rows.len(), n_in));
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_in {
                return Err(Error::Structural(format!(
                    "feature vector has length {}, model expects {n_in}",
                    r.len()
                )));
            }
            for (j, v) in transform_row(r, self.descriptor_scaling)?.into_iter().enumerate() {
                x[[i, j]] = (v - self.feature_mean[j]) / self.feature_std[j];
            }
        }
        Ok(x)
    }

    fn standardized_targets(&self, rows: &[TrainingRow]) -> Array1<f64> {
        rows.iter()
            .map(|r| (r.target - self.target_mean) / self.target_std)
            .collect()
    }

    /// Predicted log-latency for raw feature vectors.
    pub fn predict_log(&self, rows: &[&[f64]]) -> Result<Vec<f64>> {
        let x = self.standardize(rows)?;
        Ok(self
            .net
            .forward(x.view())
            .iter()
            .map(|o| o * self.target_std + self.target_mean)
            .collect())
    }

    /// Weighted training MSE in log-latency space.
    pub fn log_mse(&self, rows: &[TrainingRow]) -> Result<f64> {
        let feats: Vec<&[f64]> = rows.iter().map(|r| r.features.as_slice()).collect();
        let pred = self.predict_log(&feats)?;
        let wsum: f64 = rows.iter().map(|r| r.weight).sum();
        Ok(rows
            .iter()
            .zip(pred)
            .map(|(r, p)| r.weight * (p - r.target).powi(2))
            .sum::<f64>()
            / wsum)
    }

    /// Loss and gradient over `rows` in the model's standardized space.
    fn loss_and_grad(&self, rows: &[TrainingRow]) -> Result<(f64, mlp::Grads)> {
        let feats: Vec<&[f64]> = rows.iter().map(|r| r.features.as_slice()).collect();
        let x = self.standardize(&feats)?;
        let y = self.standardized_targets(rows);
        let w: Array1<f64> = rows.iter().map(|r| r.weight).collect();
        Ok(self.net.loss_and_grad(x.view(), y.view(), w.view()))
    }

    /// Flattened gradient of the standardized loss.
    pub fn gradient(&self, rows: &[TrainingRow]) -> Result<Vec<f64>> {
        let (_, grads) = self.loss_and_grad(rows)?;
        Ok((0..self.param_count()).map(|i| Network::grad_at(&grads, i)).collect())
    }

    /// Untrained model with standardization fitted to `rows`.
    pub fn initialize(rows: &[TrainingRow], config: &TrainConfig, counter_mode: CounterMode) -> Result<Self> {
        config.validate()?;
        let n_in = validate_rows(rows)?;
        let scaling = config.descriptor_scaling;
        let transformed = rows
            .iter()
            .map(|r| transform_row(&r.features, scaling))
            .collect::<Result<Vec<_>>>()?;
        let mut feature_mean = Vec::with_capacity(n_in);
        let mut feature_std = Vec::with_capacity(n_in);
        let mut descriptor_var = 0.0;
        let start = descriptor_start(n_in);
        for j in 0..n_in {
            let (m, s) = mean_std(transformed.iter().zip(rows).map(|(t, r)| (t[j], r.weight)));
            feature_mean.push(m);
            feature_std.push(s);
            if j >= start {
                let wsum: f64 = rows.iter().map(|r| r.weight).sum();
                descriptor_var += transformed
                    .iter()
                    .zip(rows)
                    .map(|(t, r)| r.weight * (t[j] - m).powi(2))
                    .sum::<f64>()
                    / wsum;
            }
        }
        if scaling == DescriptorScaling::SharedLog && n_in > start {
            let pooled = (descriptor_var / (n_in - start) as f64).sqrt();
            let pooled = if pooled > 0.0 { pooled } else { 1.0 };
            feature_std[start..].fill(pooled);
        }
        let (target_mean, target_std) = mean_std(rows.iter().map(|r| (r.target, r.weight)));
        let mut sizes = vec![n_in];
        sizes.extend(&config.hidden);
        sizes.push(1);
        let mut rng = keyed_rng(config.seed, &["init".into()]);
        Ok(RegressionModel {
            net: Network::init(&sizes, &mut rng),
            feature_mean,
            feature_std,
            target_mean,
            target_std,
            descriptor_scaling: scaling,
            counter_mode,
            seed: config.seed,
        })
    }
}

fn validate_rows(rows: &[TrainingRow]) -> Result<usize> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Structural("no training rows".into()))?;
    let n_in = first.features.len();
    for (i, r) in rows.iter().enumerate() {
        if r.features.len() != n_in {
            return Err(Error::Structural(format!(
                "row {i} has {} features, row 0 has {n_in}",
                r.features.len()
            )));
        }
        if !r.target.is_finite() || r.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("row {i} contains a non-finite value")));
        }
        if !(r.weight.is_finite() && r.weight > 0.0) {
            return Err(Error::Data(format!("row {i} has non-positive weight")));
        }
    }
    Ok(n_in)
}

/// Trains a model from scratch. Fully determined by `(rows, config)`.
pub fn train(rows: &[TrainingRow], config: &TrainConfig, counter_mode: CounterMode) -> Result<RegressionModel> {
    let mut model = RegressionModel::initialize(rows, config, counter_mode)?;
    let feats: Vec<&[f64]> = rows.iter().map(|r| r.features.as_slice()).collect();
    let x = model.standardize(&feats)?;
    let y = model.standardized_targets(rows);
    let w: Array1<f64> = rows.iter().map(|r| r.weight).collect();

    let mut adam = Adam::new(
        &model.net,
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.epsilon,
    );
    let mut rng = keyed_rng(config.seed, &["shuffle".into()]);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb = y.select(Axis(0), batch);
            let wb = w.select(Axis(0), batch);
            let (_, grads) = model.net.loss_and_grad(xb.view(), yb.view(), wb.view());
            adam.update(&mut model.net, &grads);
        }
    }
    Ok(model)
}

/// Predicted latency in seconds.
pub fn predict(model: &RegressionModel, arch: &CellArchitecture, descriptor: &HardwareDescriptor) -> Result<f64> {
    Ok(predict_many(model, std::slice::from_ref(arch), descriptor)?[0])
}

/// Batched [`predict`] for many architectures on one device.
pub fn predict_many(
    model: &RegressionModel,
    archs: &[CellArchitecture],
    descriptor: &HardwareDescriptor,
) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = archs.iter().map(|a| features(a, descriptor)).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(model.predict_log(&refs)?.into_iter().map(f64::exp).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub max_rel_error: f64,
    pub checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Relative errors below this analytic/numeric magnitude are measured
/// against it instead, so vanishing gradients compare absolutely.
const GRAD_CHECK_FLOOR: f64 = 1e-6;
const GRAD_CHECK_STEP: f64 = 1e-5;
const GRAD_CHECK_PARAMS: usize = 64;

/// Compares backpropagated gradients with central finite differences on a
/// seeded random subset of 64 parameters.
pub fn gradient_check(model: &RegressionModel, rows: &[TrainingRow], tolerance: f64) -> Result<GradientReport> {
    validate_rows(rows)?;
    let (_, grads) = model.loss_and_grad(rows)?;
    let total = model.param_count();
    let mut rng = keyed_rng(model.seed, &["gradient-check".into()]);
    let picks = rand::seq::index::sample(&mut rng, total, GRAD_CHECK_PARAMS.min(total));
    let mut probe = model.clone();
    let mut max_rel = 0.0f64;
    for idx in picks.iter() {
        let analytic = Network::grad_at(&grads, idx);
        let original = *probe.net.param_mut(idx);
        *probe.net.param_mut(idx) = original + GRAD_CHECK_STEP;
        let (plus, _) = probe.loss_and_grad(rows)?;
        *probe.net.param_mut(idx) = original - GRAD_CHECK_STEP;
        let (minus, _) = probe.loss_and_grad(rows)?;
        *probe.net.param_mut(idx) = original;
        let numeric = (plus - minus) / (2.0 * GRAD_CHECK_STEP);
        let denom = analytic.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
        max_rel = max_rel.max((analytic - numeric).abs() / denom);
    }
    Ok(GradientReport {
        max_rel_error: max_rel,
        checked: picks.len(),
        tolerance,
        passed: max_rel < tolerance,
    })
}

/// Random rows with positive features, for tests and gradient checks.
pub fn random_rows(n: usize, n_features: usize, seed: u64) -> Vec<TrainingRow> {
    let mut rng = keyed_rng(seed, &["random-rows".into()]);
    (0..n)
        .map(|_| TrainingRow {
            features: (0..n_features).map(|_| rng.random_range(0.05..4.0)).collect(),
            target: rng.random_range(-4.0..0.5),
            weight: 1.0,
            source: RowSource::Initial,
        })
        .collect()
}
