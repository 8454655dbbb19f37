//! Experiment orchestration: training pools, seeded trials, ablations and
//! adaptation sweeps.

mod ablation;
mod metric;
mod report;

pub use ablation::{
    run_ablation_stack, run_adaptation_sweep, AblationRow, AblationStage, AblationTable, SweepCell, SweepGrid,
};
pub use metric::{bound_accuracy, mean_std, DEFAULT_BOUND};
pub use report::{
    format_ablation, format_report, format_sweep, write_ablation, write_report, write_sweep, REPORT_HEADER,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::archspace::{architecture_from_index, BenchmarkOrder, PositionRange};
use crate::baselines::{fit_overhead, lut_build, lut_predict};
use crate::counters::{CounterMode, HardwareDescriptor};
use crate::error::{Error, Result};
use crate::regressor::{features, train, RegressionModel, RowSource, TrainConfig, TrainingRow};
use crate::sampler::{augment, select_adaptation, AdaptationSet, SamplingStrategy};
use crate::seed::derive_seed;
use crate::synthdev::MeasurementDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Devices sharing the test device's runtime.
    Runtime,
    /// Every other device.
    Combined,
    /// One training device at a time, aggregated over all candidates.
    SingleDeviceLoocv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MapleEdge,
    /// Raw counters, random sampling, no augmentation.
    MapleStar,
    Lut,
}

macro_rules! text_enum {
    ($ty:ty, $($variant:path => $name:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(match self { $($variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(Error::Config(format!("unknown {} `{other}`", stringify!($ty).to_lowercase()))),
                }
            }
        }
    };
}

text_enum!(Pooling, Pooling::Runtime => "runtime", Pooling::Combined => "combined", Pooling::SingleDeviceLoocv => "single_device_loocv");
text_enum!(Method, Method::MapleEdge => "maple_edge", Method::MapleStar => "maple_star", Method::Lut => "lut");

fn default_train_range() -> PositionRange {
    PositionRange { lo: 0, hi: 899 }
}
fn default_test_range() -> PositionRange {
    PositionRange { lo: 1800, hi: 2699 }
}
fn default_n_adapt() -> usize {
    10
}
fn default_k_augment() -> usize {
    7
}
fn default_n_trials() -> usize {
    10
}
fn default_strategy() -> SamplingStrategy {
    SamplingStrategy::TargetedUniform
}
fn default_pooling() -> Pooling {
    Pooling::Runtime
}
fn default_method() -> Method {
    Method::MapleEdge
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub test_device: String,
    #[serde(default = "default_pooling")]
    pub pooling: Pooling,
    /// Restricts `single_device_loocv` to one named training device.
    #[serde(default)]
    pub training_device: Option<String>,
    #[serde(default = "default_train_range")]
    pub train_range: PositionRange,
    #[serde(default = "default_test_range")]
    pub test_range: PositionRange,
    #[serde(default = "default_n_adapt")]
    pub n_adapt: usize,
    #[serde(default = "default_k_augment")]
    pub k_augment: usize,
    #[serde(default = "default_strategy")]
    pub strategy: SamplingStrategy,
    #[serde(default)]
    pub normalization: CounterMode,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_n_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn new(test_device: &str) -> Self {
        ExperimentConfig {
            test_device: test_device.to_string(),
            pooling: default_pooling(),
            training_device: None,
            train_range: default_train_range(),
            test_range: default_test_range(),
            n_adapt: default_n_adapt(),
            k_augment: default_k_augment(),
            strategy: default_strategy(),
            normalization: CounterMode::Normalized,
            method: default_method(),
            n_trials: default_n_trials(),
            seed: 0,
            train: TrainConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_range.overlaps(&self.test_range) {
            return Err(Error::Config(format!(
                "train range {} overlaps test range {}",
                self.train_range, self.test_range
            )));
        }
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        if self.k_augment == 0 {
            return Err(Error::Config("k_augment must be at least 1".into()));
        }
        if self.n_adapt == 0 || self.n_adapt > self.train_range.len() {
            return Err(Error::Config(format!(
                "n_adapt {} must lie in [1, {}]",
                self.n_adapt,
                self.train_range.len()
            )));
        }
        if self.training_device.is_some() && self.pooling != Pooling::SingleDeviceLoocv {
            return Err(Error::Config(
                "training_device only applies to single_device_loocv pooling".into(),
            ));
        }
        Ok(())
    }

    /// Counter mode, strategy and augmentation actually used by `method`.
    pub fn effective_knobs(&self) -> (CounterMode, SamplingStrategy, usize) {
        match self.method {
            Method::MapleStar => (CounterMode::Raw, SamplingStrategy::Random, 1),
            _ => (self.normalization, self.strategy, self.k_augment),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionPair {
    pub arch_index: usize,
    pub predicted_s: f64,
    pub true_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    /// Training devices; for leave-one-out, every candidate in order.
    pub training_devices: Vec<String>,
    pub trial_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Mean accuracy per candidate training device (leave-one-out only).
    pub per_device: Vec<(String, f64)>,
    pub adaptation_sets: Vec<AdaptationSet>,
    /// Pairs from the last trial.
    pub pairs: Vec<PredictionPair>,
    /// Excluded from report files so that they stay reproducible.
    pub wall_time_s: f64,
}

/// Training-pool device ids for `config`, in dataset order. For
/// leave-one-out pooling these are the candidates, one sub-experiment each.
pub fn build_training_pool(ds: &MeasurementDataset, config: &ExperimentConfig) -> Result<Vec<String>> {
    let test = ds.device(&config.test_device)?;
    let others = ds.devices().iter().filter(|d| d.id != test.id);
    let pool: Vec<String> = match config.pooling {
        Pooling::Runtime => others
            .filter(|d| d.runtime == test.runtime)
            .map(|d| d.id.clone())
            .collect(),
        Pooling::Combined => others.map(|d| d.id.clone()).collect(),
        Pooling::SingleDeviceLoocv => match &config.training_device {
            Some(id) if *id == test.id => {
                return Err(Error::Config(format!("training device `{id}` is the test device")))
            }
            Some(id) => vec![ds.device(id)?.id.clone()],
            None => others.map(|d| d.id.clone()).collect(),
        },
    };
    if pool.is_empty() {
        return Err(Error::Config(format!(
            "{} pooling leaves no training devices for `{}`",
            config.pooling, config.test_device
        )));
    }
    Ok(pool)
}

fn descriptor(ds: &MeasurementDataset, id: &str, mode: CounterMode) -> Result<HardwareDescriptor> {
    let rec = ds.device(id)?;
    Ok(match mode {
        CounterMode::Normalized => rec.descriptor.clone(),
        CounterMode::Raw => rec.raw(),
    })
}

/// Latencies of each pool device over `range`, keyed by device id.
pub fn pool_latencies(
    ds: &MeasurementDataset,
    pool: &[String],
    range: PositionRange,
) -> Result<BTreeMap<String, Vec<(usize, f64)>>> {
    let archs = BenchmarkOrder::canonical_range(range)?;
    pool.iter()
        .map(|id| {
            let lat = archs
                .iter()
                .map(|&a| Ok((a, ds.latency(id, a)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((id.clone(), lat))
        })
        .collect()
}

/// Rows of the training set together with the canonical architecture of
/// each row.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub rows: Vec<TrainingRow>,
    pub arch_indices: Vec<usize>,
}

/// Initial rows from every pool device over the train range, followed by
/// the adaptation rows of the test device, each repeated `k` times.
pub fn assemble_training_set(
    ds: &MeasurementDataset,
    config: &ExperimentConfig,
    pool: &[String],
    adaptation: &[usize],
) -> Result<TrainingSet> {
    let (mode, _, k) = config.effective_knobs();
    let train_archs = BenchmarkOrder::canonical_range(config.train_range)?;
    let mut rows = Vec::with_capacity(pool.len() * train_archs.len() + adaptation.len() * k);
    let mut arch_indices = Vec::with_capacity(rows.capacity());
    for id in pool {
        let desc = descriptor(ds, id, mode)?;
        for &a in &train_archs {
            let arch = architecture_from_index(a)?;
            rows.push(TrainingRow::new(&arch, &desc, ds.latency(id, a)?, RowSource::Initial));
            arch_indices.push(a);
        }
    }
    let desc = descriptor(ds, &config.test_device, mode)?;
    let adapt_rows = adaptation
        .iter()
        .map(|&a| {
            let arch = architecture_from_index(a)?;
            let row = TrainingRow::new(&arch, &desc, ds.latency(&config.test_device, a)?, RowSource::Adaptation);
            Ok((row, a))
        })
        .collect::<Result<Vec<_>>>()?;
    for (row, a) in augment(&adapt_rows, k)? {
        rows.push(row);
        arch_indices.push(a);
    }
    Ok(TrainingSet { rows, arch_indices })
}

struct TrialOutcome {
    accuracy: f64,
    adaptation: Option<AdaptationSet>,
    pairs: Vec<PredictionPair>,
}

fn trial_seed(config: &ExperimentConfig, trial: usize) -> u64 {
    derive_seed(config.seed, &["trial".into(), trial.into()])
}

/// Test-range architectures and their measured latency on the test device.
fn test_truth(ds: &MeasurementDataset, config: &ExperimentConfig) -> Result<Vec<(usize, f64)>> {
    BenchmarkOrder::canonical_range(config.test_range)?
        .into_iter()
        .map(|a| Ok((a, ds.latency(&config.test_device, a)?)))
        .collect()
}

fn score(truth: &[(usize, f64)], predicted: &[f64]) -> Result<(f64, Vec<PredictionPair>)> {
    let pairs: Vec<PredictionPair> = truth
        .iter()
        .zip(predicted)
        .map(|(&(arch_index, true_s), &predicted_s)| PredictionPair {
            arch_index,
            predicted_s,
            true_s,
        })
        .collect();
    let raw: Vec<(f64, f64)> = pairs.iter().map(|p| (p.predicted_s, p.true_s)).collect();
    Ok((bound_accuracy(&raw, DEFAULT_BOUND)?, pairs))
}

fn run_lut(ds: &MeasurementDataset, config: &ExperimentConfig, truth: &[(usize, f64)]) -> Result<TrialOutcome> {
    let rec = ds.device(&config.test_device)?;
    let train_archs = BenchmarkOrder::canonical_range(config.train_range)?;
    let all = ds.latencies(&config.test_device)?;
    let measured: BTreeMap<usize, f64> = train_archs
        .iter()
        .filter_map(|a| all.get(a).map(|&l| (*a, l)))
        .collect();
    let lut = lut_build(&rec.id, &rec.descriptor.to_profiles(1)?, fit_overhead(&measured)?)?;
    let m = ds.macro_config();
    let predicted = truth
        .iter()
        .map(|&(a, _)| Ok(lut_predict(&lut, &architecture_from_index(a)?, &m)))
        .collect::<Result<Vec<_>>>()?;
    let (accuracy, pairs) = score(truth, &predicted)?;
    Ok(TrialOutcome {
        accuracy,
        adaptation: None,
        pairs,
    })
}

fn run_trial(
    ds: &MeasurementDataset,
    config: &ExperimentConfig,
    pool: &[String],
    train_latencies: &BTreeMap<String, Vec<(usize, f64)>>,
    test_features: &[Vec<f64>],
    truth: &[(usize, f64)],
    trial: usize,
) -> Result<TrialOutcome> {
    let (model, adaptation, _) = fit_trial(ds, config, pool, train_latencies, trial)?;
    let refs: Vec<&[f64]> = test_features.iter().map(Vec::as_slice).collect();
    let predicted: Vec<f64> = model.predict_log(&refs)?.into_iter().map(f64::exp).collect();
    let (accuracy, pairs) = score(truth, &predicted)?;
    Ok(TrialOutcome {
        accuracy,
        adaptation: Some(adaptation),
        pairs,
    })
}

fn fit_trial(
    ds: &MeasurementDataset,
    config: &ExperimentConfig,
    pool: &[String],
    train_latencies: &BTreeMap<String, Vec<(usize, f64)>>,
    trial: usize,
) -> Result<(RegressionModel, AdaptationSet, TrainingSet)> {
    let seed = trial_seed(config, trial);
    let (mode, strategy, _) = config.effective_knobs();
    let adaptation = select_adaptation(&config.test_device, train_latencies, config.n_adapt, strategy, seed)?;
    let set = assemble_training_set(ds, config, pool, &adaptation.arch_indices)?;
    let train_cfg = TrainConfig {
        seed,
        ..config.train.clone()
    };
    let model = train(&set.rows, &train_cfg, mode)?;
    Ok((model, adaptation, set))
}

/// Model of a single trial, with what went into it.
#[derive(Debug, Clone)]
pub struct TrainedTrial {
    pub model: RegressionModel,
    pub training_devices: Vec<String>,
    pub adaptation: AdaptationSet,
    pub n_rows: usize,
    pub final_loss: f64,
}

/// Trains the model of trial `trial` of `config`, as `run_experiment` would.
/// Leave-one-out pooling trains on the first candidate only.
pub fn train_trial(ds: &MeasurementDataset, config: &ExperimentConfig, trial: usize) -> Result<TrainedTrial> {
    config.validate()?;
    if config.method == Method::Lut {
        return Err(Error::Config("the lut method has no trained model".into()));
    }
    let mut pool = build_training_pool(ds, config)?;
    if config.pooling == Pooling::SingleDeviceLoocv {
        pool.truncate(1);
    }
    let train_latencies = pool_latencies(ds, &pool, config.train_range)?;
    let (model, adaptation, set) = fit_trial(ds, config, &pool, &train_latencies, trial)?;
    let final_loss = model.log_mse(&set.rows)?;
    Ok(TrainedTrial {
        model,
        training_devices: pool,
        adaptation,
        n_rows: set.rows.len(),
        final_loss,
    })
}

fn run_trials(
    ds: &MeasurementDataset,
    config: &ExperimentConfig,
    pool: &[String],
    truth: &[(usize, f64)],
) -> Result<Vec<TrialOutcome>> {
    let (mode, _, _) = config.effective_knobs();
    let train_latencies = pool_latencies(ds, pool, config.train_range)?;
    let desc = descriptor(ds, &config.test_device, mode)?;
    let test_features = truth
        .iter()
        .map(|&(a, _)| Ok(features(&architecture_from_index(a)?, &desc)))
        .collect::<Result<Vec<_>>>()?;
    let one = |t: usize| run_trial(ds, config, pool, &train_latencies, &test_features, truth, t);
    #[cfg(feature = "parallel")]
    let outcomes = (0..config.n_trials).into_par_iter().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes = (0..config.n_trials).map(one).collect();
    outcomes
}

/// Runs `config.n_trials` seeded trials and aggregates ±10% accuracy.
pub fn run_experiment(ds: &MeasurementDataset, config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let start = Instant::now();
    let pool = build_training_pool(ds, config)?;
    let truth = test_truth(ds, config)?;

    let mut per_device = Vec::new();
    let mut adaptation_sets = Vec::new();
    let (trial_accuracies, pairs) = if config.method == Method::Lut {
        let out = run_lut(ds, config, &truth)?;
        (vec![out.accuracy], out.pairs)
    } else if config.pooling == Pooling::SingleDeviceLoocv {
        let mut sums = vec![0.0; config.n_trials];
        let mut last_pairs = Vec::new();
        for id in &pool {
            let outcomes = run_trials(ds, config, std::slice::from_ref(id), &truth)?;
            let accs: Vec<f64> = outcomes.iter().map(|o| o.accuracy).collect();
            per_device.push((id.clone(), mean_std(&accs).0));
            for (s, a) in sums.iter_mut().zip(&accs) {
                *s += a;
            }
            for mut o in outcomes {
                adaptation_sets.extend(o.adaptation.take());
                last_pairs = o.pairs;
            }
        }
        let n = pool.len() as f64;
        (sums.into_iter().map(|s| s / n).collect(), last_pairs)
    } else {
        let outcomes = run_trials(ds, config, &pool, &truth)?;
        let accs = outcomes.iter().map(|o| o.accuracy).collect();
        let mut last_pairs = Vec::new();
        for mut o in outcomes {
            adaptation_sets.extend(o.adaptation.take());
            last_pairs = o.pairs;
        }
        (accs, last_pairs)
    };
    let (mean, std) = mean_std(&trial_accuracies);
    Ok(EvalReport {
        config: config.clone(),
        training_devices: pool,
        trial_accuracies,
        mean,
        std,
        per_device,
        adaptation_sets,
        pairs,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdev::{generate_dataset, make_device_pool, PoolSpec};
    use std::collections::HashSet;
    use std::sync::OnceLock;

    fn dataset() -> &'static MeasurementDataset {
        static DS: OnceLock<MeasurementDataset> = OnceLock::new();
        DS.get_or_init(|| {
            let spec = PoolSpec::default();
            let pool = make_device_pool(&spec, 5).unwrap();
            generate_dataset(
                &pool,
                PositionRange::new(0, 2699).unwrap(),
                &spec.macro_config().unwrap(),
            )
            .unwrap()
        })
    }

    fn quick(test: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(test);
        c.n_trials = 2;
        c.train.epochs = 2;
        c.train_range = PositionRange::new(0, 99).unwrap();
        c.test_range = PositionRange::new(1800, 1899).unwrap();
        c
    }

    #[test]
    fn pool_membership() {
        let ds = dataset();
        let mut c = quick("rpi4-tflite");
        assert_eq!(build_training_pool(ds, &c).unwrap().len(), 3);
        c.pooling = Pooling::Combined;
        assert_eq!(build_training_pool(ds, &c).unwrap().len(), 6);
        c.pooling = Pooling::SingleDeviceLoocv;
        assert_eq!(build_training_pool(ds, &c).unwrap().len(), 6);
        c.training_device = Some("tx2-trt".into());
        assert_eq!(build_training_pool(ds, &c).unwrap(), vec!["tx2-trt".to_string()]);
        c.training_device = Some("rpi4-tflite".into());
        assert!(matches!(build_training_pool(ds, &c), Err(Error::Config(_))));
        let mut missing = quick("nope");
        missing.pooling = Pooling::Combined;
        assert!(build_training_pool(ds, &missing).is_err());
    }

    #[test]
    fn empty_pool_is_config_error() {
        let spec = PoolSpec::default();
        let pool = make_device_pool(&spec, 5).unwrap();
        let ds = generate_dataset(
            &pool[..1],
            PositionRange::new(0, 3).unwrap(),
            &spec.macro_config().unwrap(),
        )
        .unwrap();
        assert!(matches!(
            build_training_pool(&ds, &quick("rpi4-tflite")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = quick("x");
        c.test_range = PositionRange::new(50, 150).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = quick("x");
        c.n_adapt = 101;
        assert!(c.validate().is_err());
        let mut c = quick("x");
        c.k_augment = 0;
        assert!(c.validate().is_err());
        let mut c = quick("x");
        c.training_device = Some("y".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn no_test_leakage() {
        let ds = dataset();
        for pooling in [Pooling::Runtime, Pooling::Combined] {
            let mut c = ExperimentConfig::new("tx2-trt");
            c.pooling = pooling;
            let pool = build_training_pool(ds, &c).unwrap();
            let lat = pool_latencies(ds, &pool, c.train_range).unwrap();
            let adapt = select_adaptation(&c.test_device, &lat, 10, c.strategy, 1).unwrap();
            let set = assemble_training_set(ds, &c, &pool, &adapt.arch_indices).unwrap();
            let test: HashSet<usize> = BenchmarkOrder::canonical_range(c.test_range)
                .unwrap()
                .into_iter()
                .collect();
            assert!(set.arch_indices.iter().all(|a| !test.contains(a)));
            assert_eq!(set.rows.len(), pool.len() * 900 + 70);
            let adapt_rows = set.rows.iter().filter(|r| r.source == RowSource::Adaptation).count();
            assert_eq!(adapt_rows, 70);
        }
    }

    #[test]
    fn adaptation_sets_shared_across_methods() {
        let ds = dataset();
        let base = quick("tx1-trt");
        let mut raw = base.clone();
        raw.normalization = CounterMode::Raw;
        raw.k_augment = 1;
        let a = run_experiment(ds, &base).unwrap();
        let b = run_experiment(ds, &raw).unwrap();
        let idx = |r: &EvalReport| {
            r.adaptation_sets
                .iter()
                .map(|s| s.arch_indices.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(idx(&a), idx(&b));
        assert_eq!(a.adaptation_sets.len(), 2);
        assert_ne!(a.adaptation_sets[0], a.adaptation_sets[1]);
    }

    #[test]
    fn reports_are_deterministic() {
        let ds = dataset();
        let c = quick("nano-trt");
        let a = run_experiment(ds, &c).unwrap();
        let b = run_experiment(ds, &c).unwrap();
        assert_eq!(a.trial_accuracies, b.trial_accuracies);
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(write_report(&a), write_report(&b));
        assert!(a.trial_accuracies.iter().all(|v| (0.0..=100.0).contains(v)));
        assert_eq!(a.pairs.len(), 100);
    }

    #[test]
    fn lut_is_a_single_adaptation_free_trial() {
        let ds = dataset();
        let mut c = quick("rpi4-tflite");
        c.method = Method::Lut;
        let r = run_experiment(ds, &c).unwrap();
        assert_eq!(r.trial_accuracies.len(), 1);
        assert!(r.adaptation_sets.is_empty());
        assert!(r.mean >= 95.0, "{}", r.mean);
    }

    #[test]
    fn maple_star_forces_baseline_knobs() {
        let mut c = quick("x");
        c.method = Method::MapleStar;
        assert_eq!(c.effective_knobs(), (CounterMode::Raw, SamplingStrategy::Random, 1));
        c.method = Method::MapleEdge;
        assert_eq!(
            c.effective_knobs(),
            (CounterMode::Normalized, SamplingStrategy::TargetedUniform, 7)
        );
    }

    #[test]
    fn loocv_aggregates_candidates() {
        let ds = dataset();
        let mut c = quick("tx2-trt");
        c.pooling = Pooling::SingleDeviceLoocv;
        c.n_trials = 1;
        let r = run_experiment(ds, &c).unwrap();
        assert_eq!(r.per_device.len(), 6);
        let mean_of_devices = r.per_device.iter().map(|(_, a)| a).sum::<f64>() / 6.0;
        assert!((mean_of_devices - r.mean).abs() < 1e-9);
    }

    #[test]
    fn config_text_round_trip() {
        let c = ExperimentConfig::new("tx2-trt");
        for p in [Pooling::Runtime, Pooling::Combined, Pooling::SingleDeviceLoocv] {
            assert_eq!(p.to_string().parse::<Pooling>().unwrap(), p);
        }
        for m in [Method::MapleEdge, Method::MapleStar, Method::Lut] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
        assert_eq!(c.pooling, Pooling::Runtime);
    }
}
