//! Synthetic device-runtime oracle.
//!
//! A [`SyntheticDevice`] produces operator profiles and end-to-end latencies
//! for any cell. Two runtime models exist: an additive one, where the network
//! latency is exactly the sum of its operators plus a fixed overhead, and an
//! optimized one that drops skip connections and discounts each stage in
//! proportion to the share of convolution edges (layer fusion). All draws
//! are keyed through [`crate::seed`], so results never depend on call order.

mod dataset;
mod format;

pub use dataset::{generate_dataset, DeviceRecord, LatencySample, MeasurementDataset, RuntimeLabel};
pub(crate) use format::push_reals;
pub use format::{export_dataset, import_dataset, read_dataset, write_dataset, DATASET_HEADER};

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::archspace::{
    operator_multiset, BenchmarkOrder, CellArchitecture, MacroConfig, OperatorKind, OperatorVariant, PositionRange,
    NUM_VARIANTS,
};
use crate::counters::{CounterSet, OperatorProfile, NUM_COUNTERS};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, keyed_rng};

/// Latency assigned to `none` variants, which never enter a sum.
pub const NONE_LATENCY_FLOOR_S: f64 = 1e-7;
pub const DEFAULT_FUSION_DISCOUNT: f64 = 0.35;
pub const DEFAULT_NOISE_CV: f64 = 0.03;
pub const PROFILE_RUNS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeKind {
    Additive,
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeModel {
    kind: RuntimeKind,
    fusion_discount: f64,
    skip_elision: bool,
}

impl RuntimeModel {
    pub fn additive() -> Self {
        RuntimeModel {
            kind: RuntimeKind::Additive,
            fusion_discount: 0.0,
            skip_elision: false,
        }
    }

    pub fn optimized(fusion_discount: f64, skip_elision: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&fusion_discount) {
            return Err(Error::Range(format!(
                "fusion discount {fusion_discount} outside [0, 1)"
            )));
        }
        Ok(RuntimeModel {
            kind: RuntimeKind::Optimized,
            fusion_discount,
            skip_elision,
        })
    }

    pub fn kind(&self) -> RuntimeKind {
        self.kind
    }

    pub fn fusion_discount(&self) -> f64 {
        self.fusion_discount
    }

    pub fn skip_elision(&self) -> bool {
        self.skip_elision
    }

    /// Multiplier applied to a stage's summed compute cost.
    fn stage_factor(&self, arch: &CellArchitecture) -> f64 {
        match self.kind {
            RuntimeKind::Additive => 1.0,
            RuntimeKind::Optimized => 1.0 - self.fusion_discount * arch.fusable_fraction(),
        }
    }

    fn elides(&self, kind: OperatorKind) -> bool {
        self.kind == RuntimeKind::Optimized && self.skip_elision && kind == OperatorKind::SkipConnect
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDevice {
    device_id: String,
    runtime: RuntimeModel,
    base_latency_s: [f64; NUM_VARIANTS],
    rate_profile: [[f64; NUM_COUNTERS]; NUM_VARIANTS],
    overhead_s: f64,
    noise_cv: f64,
    seed: u64,
}

impl SyntheticDevice {
    /// Builds a device. Latencies given for `none` variants are replaced by
    /// [`NONE_LATENCY_FLOOR_S`].
    pub fn new(
        device_id: impl Into<String>,
        runtime: RuntimeModel,
        mut base_latency_s: [f64; NUM_VARIANTS],
        rate_profile: [[f64; NUM_COUNTERS]; NUM_VARIANTS],
        overhead_s: f64,
        noise_cv: f64,
        seed: u64,
    ) -> Result<Self> {
        for v in OperatorVariant::all() {
            let slot = &mut base_latency_s[v.index()];
            if v.kind() == OperatorKind::None {
                *slot = NONE_LATENCY_FLOOR_S;
            } else if !(slot.is_finite() && *slot > 0.0) {
                return Err(Error::Domain(format!(
                    "base latency of {v} must be positive, got {slot}"
                )));
            }
        }
        if rate_profile.iter().flatten().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Domain("counter rates must be positive".into()));
        }
        if !(overhead_s.is_finite() && overhead_s >= 0.0) {
            return Err(Error::Domain(format!("overhead {overhead_s} must be non-negative")));
        }
        if !(0.0..=0.5).contains(&noise_cv) {
            return Err(Error::Range(format!("noise cv {noise_cv} outside [0, 0.5]")));
        }
        Ok(SyntheticDevice {
            device_id: device_id.into(),
            runtime,
            base_latency_s,
            rate_profile,
            overhead_s,
            noise_cv,
            seed,
        })
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn runtime(&self) -> &RuntimeModel {
        &self.runtime
    }

    pub fn base_latency_s(&self) -> &[f64; NUM_VARIANTS] {
        &self.base_latency_s
    }

    pub fn rate_profile(&self) -> &[[f64; NUM_COUNTERS]; NUM_VARIANTS] {
        &self.rate_profile
    }

    pub fn overhead_s(&self) -> f64 {
        self.overhead_s
    }

    pub fn noise_cv(&self) -> f64 {
        self.noise_cv
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Copy of this device with a different noise level.
    pub fn with_noise_cv(&self, noise_cv: f64) -> Result<Self> {
        let mut d = self.clone();
        if !(0.0..=0.5).contains(&noise_cv) {
            return Err(Error::Range(format!("noise cv {noise_cv} outside [0, 0.5]")));
        }
        d.noise_cv = noise_cv;
        Ok(d)
    }

    /// Copy of this device running under another runtime model.
    pub fn with_runtime(&self, runtime: RuntimeModel) -> Self {
        let mut d = self.clone();
        d.runtime = runtime;
        d
    }

    /// End-to-end latency without the measurement noise multiplier.
    pub fn noiseless_e2e(&self, arch: &CellArchitecture, macro_cfg: &MacroConfig) -> f64 {
        compute_cost(&self.runtime, &self.base_latency_s, arch, macro_cfg) + self.overhead_s
    }

    fn lognormal(&self) -> Option<LogNormal<f64>> {
        lognormal_unit_mean(self.noise_cv)
    }
}

fn lognormal_unit_mean(cv: f64) -> Option<LogNormal<f64>> {
    if cv == 0.0 {
        return None;
    }
    let sigma2 = (1.0 + cv * cv).ln();
    Some(LogNormal::new(-0.5 * sigma2, sigma2.sqrt()).expect("valid lognormal"))
}

/// Summed operator cost of the network, excluding the fixed overhead.
fn compute_cost(
    runtime: &RuntimeModel,
    latencies: &[f64; NUM_VARIANTS],
    arch: &CellArchitecture,
    macro_cfg: &MacroConfig,
) -> f64 {
    let counts = operator_multiset(arch, macro_cfg);
    let factor = runtime.stage_factor(arch);
    (0..MacroConfig::STAGES)
        .map(|stage| {
            let stage_sum: f64 = OperatorKind::ALL
                .iter()
                .filter(|&&k| k != OperatorKind::None && !runtime.elides(k))
                .map(|&k| {
                    let v = k.order() * 3 + stage;
                    f64::from(counts[v]) * latencies[v]
                })
                .sum();
            stage_sum * factor
        })
        .sum()
}

/// Characterizes one operator variant over `n_runs` noisy runs.
pub fn profile_operator(device: &SyntheticDevice, variant: OperatorVariant, n_runs: u32) -> Result<OperatorProfile> {
    if n_runs == 0 {
        return Err(Error::Domain("n_runs must be at least 1".into()));
    }
    let v = variant.index();
    let base = device.base_latency_s[v];
    let latency = match device.lognormal() {
        None => base,
        Some(dist) => {
            let mut rng = keyed_rng(device.seed, &[v.into(), "profile".into()]);
            let mean = (0..n_runs).map(|_| dist.sample(&mut rng)).sum::<f64>() / f64::from(n_runs);
            base * mean
        }
    };
    let counters = CounterSet::from_array(device.rate_profile[v].map(|r| r * latency))?;
    OperatorProfile::new(variant, latency, counters, n_runs)
}

/// Profiles of all 15 variants in variant order.
pub fn profile_all(device: &SyntheticDevice, n_runs: u32) -> Result<Vec<OperatorProfile>> {
    OperatorVariant::all()
        .map(|v| profile_operator(device, v, n_runs))
        .collect()
}

/// Measures the end-to-end latency of `arch` on `device`.
pub fn measure_e2e(device: &SyntheticDevice, arch: &CellArchitecture, macro_cfg: &MacroConfig) -> LatencySample {
    let clean = device.noiseless_e2e(arch, macro_cfg);
    let latency_s = match device.lognormal() {
        None => clean,
        Some(dist) => {
            let mut rng = keyed_rng(device.seed, &[arch.index().into(), "e2e".into()]);
            clean * dist.sample(&mut rng)
        }
    };
    LatencySample {
        device_id: device.device_id.clone(),
        arch_index: arch.index(),
        latency_s,
    }
}

/// Relative weights of the three cost terms of an operator: a fixed launch
/// cost, an arithmetic term and a memory-traffic term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostCharacter {
    pub launch: f64,
    pub compute: f64,
    pub memory: f64,
}

impl CostCharacter {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("launch", self.launch),
            ("compute", self.compute),
            ("memory", self.memory),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("cost character `{name}` must be non-negative")));
            }
        }
        if self.launch + self.compute + self.memory <= 0.0 {
            return Err(Error::Config("cost character must have a positive term".into()));
        }
        Ok(())
    }
}

/// Work of one operator variant in a CIFAR-sized macro skeleton, as
/// (multiply-accumulates, bytes moved), both relative to stage-0 references.
fn variant_work(v: OperatorVariant) -> (f64, f64) {
    let stage = v.stage() as u32;
    let side = f64::from(32u32 >> stage);
    let hw = side * side;
    let c = f64::from(v.channels());
    let activations = 2.0 * hw * c;
    let (macs, bytes) = match v.kind() {
        OperatorKind::None => (0.0, 0.0),
        OperatorKind::SkipConnect => (0.0, activations),
        OperatorKind::Conv1x1 => (hw * c * c, activations + c * c),
        OperatorKind::Conv3x3 => (hw * 9.0 * c * c, activations + 9.0 * c * c),
        OperatorKind::AvgPool3x3 => (hw * 9.0 * c, activations),
    };
    const MACS_REF: f64 = 1024.0 * 9.0 * 256.0;
    const BYTES_REF: f64 = 2.0 * 1024.0 * 16.0;
    (macs / MACS_REF, bytes / BYTES_REF)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub id: String,
    pub runtime: RuntimeKind,
    /// Calibration target: mean end-to-end latency over the calibration range.
    pub target_mean_s: f64,
    /// Fixed per-inference overhead; defaults to a runtime-dependent share of the target.
    #[serde(default)]
    pub overhead_s: Option<f64>,
    #[serde(default = "default_noise_cv")]
    pub noise_cv: f64,
    #[serde(default = "default_fusion")]
    pub fusion_discount: f64,
    #[serde(default = "default_true")]
    pub skip_elision: bool,
    /// Overrides the seeded cost character draw.
    #[serde(default)]
    pub character: Option<CostCharacter>,
}

fn default_noise_cv() -> f64 {
    DEFAULT_NOISE_CV
}

fn default_fusion() -> f64 {
    DEFAULT_FUSION_DISCOUNT
}

fn default_true() -> bool {
    true
}

fn default_calibration_range() -> PositionRange {
    PositionRange { lo: 0, hi: 2699 }
}

fn default_cells() -> usize {
    5
}

impl DeviceSpec {
    pub fn new(id: &str, runtime: RuntimeKind, target_mean_s: f64) -> Self {
        DeviceSpec {
            id: id.to_string(),
            runtime,
            target_mean_s,
            overhead_s: None,
            noise_cv: DEFAULT_NOISE_CV,
            fusion_discount: DEFAULT_FUSION_DISCOUNT,
            skip_elision: true,
            character: None,
        }
    }

    fn runtime_model(&self) -> Result<RuntimeModel> {
        match self.runtime {
            RuntimeKind::Additive => Ok(RuntimeModel::additive()),
            RuntimeKind::Optimized => RuntimeModel::optimized(self.fusion_discount, self.skip_elision),
        }
    }
}

/// Configuration of a synthetic device pool.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    #[serde(default = "default_cells")]
    pub cells_per_stage: usize,
    #[serde(default = "default_calibration_range")]
    pub calibration_range: PositionRange,
    #[serde(rename = "device")]
    pub devices: Vec<DeviceSpec>,
}

impl PoolSpec {
    pub fn macro_config(&self) -> Result<MacroConfig> {
        MacroConfig::new(self.cells_per_stage)
    }
}

impl Default for PoolSpec {
    /// Four CPU-interpreter devices and three graph-optimizing GPU runtimes,
    /// at the mean latencies of the reference edge measurements.
    fn default() -> Self {
        use RuntimeKind::*;
        PoolSpec {
            cells_per_stage: default_cells(),
            calibration_range: default_calibration_range(),
            devices: vec![
                DeviceSpec::new("rpi4-tflite", Additive, 0.6),
                DeviceSpec::new("tx1-tflite", Additive, 1.0),
                DeviceSpec::new("tx2-tflite", Additive, 0.9),
                DeviceSpec::new("nano-tflite", Additive, 1.1),
                DeviceSpec::new("tx1-trt", Optimized, 0.05),
                DeviceSpec::new("tx2-trt", Optimized, 0.03),
                DeviceSpec::new("nano-trt", Optimized, 0.07),
            ],
        }
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn draw_character(rng: &mut impl Rng, runtime: RuntimeKind) -> CostCharacter {
    match runtime {
        // interpreter on CPU cores: arithmetic dominates
        RuntimeKind::Additive => CostCharacter {
            launch: log_uniform(rng, 0.02, 0.06),
            compute: log_uniform(rng, 0.8, 1.2),
            memory: log_uniform(rng, 0.15, 0.35),
        },
        // GPU engine: kernel launches weigh more, arithmetic is cheap
        RuntimeKind::Optimized => CostCharacter {
            launch: log_uniform(rng, 0.15, 0.35),
            compute: log_uniform(rng, 0.25, 0.45),
            memory: log_uniform(rng, 0.08, 0.2),
        },
    }
}

fn reference_character(runtime: RuntimeKind) -> CostCharacter {
    let mid = |lo: f64, hi: f64| (lo * hi).sqrt();
    match runtime {
        RuntimeKind::Additive => CostCharacter {
            launch: mid(0.02, 0.06),
            compute: mid(0.8, 1.2),
            memory: mid(0.15, 0.35),
        },
        RuntimeKind::Optimized => CostCharacter {
            launch: mid(0.15, 0.35),
            compute: mid(0.25, 0.45),
            memory: mid(0.08, 0.2),
        },
    }
}

/// Per-variant counter rates (events per second) observed on the host CPU.
/// Rates follow the cost character: slower arithmetic shows as lower IPC,
/// costlier memory as more misses, heavier dispatch as less busy time.
fn draw_rates(
    rng: &mut impl Rng,
    runtime: RuntimeKind,
    character: &CostCharacter,
) -> [[f64; NUM_COUNTERS]; NUM_VARIANTS] {
    let r = reference_character(runtime);
    let (z_launch, z_compute, z_memory) = (
        character.launch / r.launch,
        character.compute / r.compute,
        character.memory / r.memory,
    );
    let clock = log_uniform(rng, 1.2e9, 1.9e9);
    let (busy, ipc_scale, miss_scale) = match runtime {
        RuntimeKind::Additive => (0.92, 1.0, 0.012),
        // host threads mostly wait on the accelerator
        RuntimeKind::Optimized => (0.34, 0.37, 0.07),
    };
    let busy = (busy / z_launch.sqrt()).min(0.99);
    let ipc_scale = ipc_scale / z_compute;
    let miss_scale = miss_scale * z_memory;
    let l1_miss = 0.022 * z_memory.sqrt();
    let mut rates = [[0.0; NUM_COUNTERS]; NUM_VARIANTS];
    for v in OperatorVariant::all() {
        let (ipc, refs_per_cycle, miss_factor) = match v.kind() {
            OperatorKind::None => (0.5, 0.1, 1.0),
            OperatorKind::SkipConnect => (0.8, 0.4, 3.0),
            OperatorKind::Conv1x1 => (1.6, 0.25, 0.7),
            OperatorKind::Conv3x3 => (2.0, 0.2, 0.5),
            OperatorKind::AvgPool3x3 => (1.1, 0.35, 2.0),
        };
        let cycles = clock * busy;
        let instructions = cycles * ipc * ipc_scale;
        let refs = cycles * refs_per_cycle;
        let misses = refs * (miss_scale * miss_factor).min(0.9);
        let l1_loads = instructions * 0.35;
        let l1_misses = l1_loads * (l1_miss * miss_factor).min(0.9);
        let row = [cycles, instructions, refs, misses, l1_loads, l1_misses];
        rates[v.index()] = row.map(|x| x * log_uniform(rng, 0.95, 1.05));
    }
    rates
}

/// Generates a calibrated pool of devices. Every device's parameters derive
/// from `(seed, device id)` only.
pub fn make_device_pool(spec: &PoolSpec, seed: u64) -> Result<Vec<SyntheticDevice>> {
    let macro_cfg = spec.macro_config()?;
    let calib: Vec<CellArchitecture> = (spec.calibration_range.lo..=spec.calibration_range.hi)
        .map(BenchmarkOrder::architecture_at)
        .collect::<Result<_>>()?;
    let mut seen = std::collections::HashSet::new();
    spec.devices
        .iter()
        .map(|ds| {
            if !seen.insert(ds.id.as_str()) {
                return Err(Error::Config(format!("device `{}` listed twice", ds.id)));
            }
            make_device(ds, seed, &macro_cfg, &calib)
        })
        .collect()
}

fn make_device(
    ds: &DeviceSpec,
    seed: u64,
    macro_cfg: &MacroConfig,
    calib: &[CellArchitecture],
) -> Result<SyntheticDevice> {
    if ds.id.is_empty() || ds.id.chars().any(char::is_whitespace) {
        return Err(Error::Config(format!(
            "device id `{}` must be non-empty without whitespace",
            ds.id
        )));
    }
    if !(ds.target_mean_s.is_finite() && ds.target_mean_s > 0.0) {
        return Err(Error::Calibration(format!(
            "device `{}`: target must be positive",
            ds.id
        )));
    }
    let runtime = ds.runtime_model()?;
    let overhead = ds.overhead_s.unwrap_or(match ds.runtime {
        RuntimeKind::Additive => 0.03 * ds.target_mean_s,
        RuntimeKind::Optimized => 0.10 * ds.target_mean_s,
    });
    if !(overhead.is_finite() && overhead >= 0.0) {
        return Err(Error::Calibration(format!(
            "device `{}`: overhead must be non-negative",
            ds.id
        )));
    }
    if ds.target_mean_s <= overhead {
        return Err(Error::Calibration(format!(
            "device `{}`: target {} s is not above the fixed overhead {} s",
            ds.id, ds.target_mean_s, overhead
        )));
    }

    let mut rng = keyed_rng(seed, &[(&ds.id).into(), "character".into()]);
    let drawn = draw_character(&mut rng, ds.runtime);
    let character = match ds.character {
        Some(c) => {
            c.validate()?;
            c
        }
        None => drawn,
    };
    let mut relative = [0.0; NUM_VARIANTS];
    for v in OperatorVariant::all() {
        let jitter = log_uniform(&mut rng, 0.92, 1.08);
        if v.kind() != OperatorKind::None {
            let (macs, bytes) = variant_work(v);
            relative[v.index()] = (character.launch + character.compute * macs + character.memory * bytes) * jitter;
        }
    }
    let mut rate_rng = keyed_rng(seed, &[(&ds.id).into(), "rates".into()]);
    let rates = draw_rates(&mut rate_rng, ds.runtime, &character);

    let mean_rel = calib
        .iter()
        .map(|a| compute_cost(&runtime, &relative, a, macro_cfg))
        .sum::<f64>()
        / calib.len() as f64;
    if mean_rel <= 0.0 {
        return Err(Error::Calibration(format!(
            "device `{}`: calibration range has no operator cost",
            ds.id
        )));
    }
    let scale = (ds.target_mean_s - overhead) / mean_rel;
    let mut base = relative.map(|r| r * scale);
    for (i, b) in base.iter_mut().enumerate() {
        if i / 3 == OperatorKind::None.order() {
            *b = NONE_LATENCY_FLOOR_S;
        }
    }
    let device_seed = derive_seed(seed, &[(&ds.id).into(), "device".into()]);
    SyntheticDevice::new(ds.id.clone(), runtime, base, rates, overhead, ds.noise_cv, device_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archspace::{architecture_from_index, CHANNEL_WIDTHS, NUM_ARCHITECTURES};
    use OperatorKind::*;

    fn flat_device(runtime: RuntimeModel, noise_cv: f64) -> SyntheticDevice {
        let base = std::array::from_fn(|v| 1e-3 * (1.0 + v as f64));
        let rates = std::array::from_fn(|v| std::array::from_fn(|c| 1e6 * (1.0 + v as f64 + c as f64)));
        SyntheticDevice::new("dev", runtime, base, rates, 0.01, noise_cv, 99).unwrap()
    }

    #[test]
    fn noiseless_profile_is_exact() {
        let d = flat_device(RuntimeModel::additive(), 0.0);
        for v in OperatorVariant::all() {
            let p = profile_operator(&d, v, 1000).unwrap();
            assert_eq!(p.latency_s(), d.base_latency_s()[v.index()]);
            let want = d.rate_profile()[v.index()].map(|r| r * p.latency_s());
            assert_eq!(p.counters().to_array(), want);
        }
    }

    #[test]
    fn profiles_are_deterministic() {
        let d = flat_device(RuntimeModel::additive(), 0.03);
        let v = OperatorVariant::from_index(7).unwrap();
        assert_eq!(
            profile_operator(&d, v, 1000).unwrap(),
            profile_operator(&d, v, 1000).unwrap()
        );
        assert!(profile_operator(&d, v, 0).is_err());
    }

    #[test]
    fn empty_cell_costs_only_overhead() {
        let m = MacroConfig::default();
        let none = CellArchitecture::from_edges([None; 6]);
        let skip = CellArchitecture::from_edges([SkipConnect; 6]);
        for rt in [RuntimeModel::additive(), RuntimeModel::optimized(0.35, true).unwrap()] {
            let d = flat_device(rt, 0.0);
            assert_eq!(measure_e2e(&d, &none, &m).latency_s, 0.01);
        }
        let opt = flat_device(RuntimeModel::optimized(0.35, true).unwrap(), 0.0);
        assert_eq!(measure_e2e(&opt, &skip, &m).latency_s, 0.01);
    }

    #[test]
    fn additive_matches_hand_sum() {
        let d = flat_device(RuntimeModel::additive(), 0.0);
        let m = MacroConfig::new(2).unwrap();
        let a = CellArchitecture::from_edges([Conv3x3, None, SkipConnect, Conv1x1, AvgPool3x3, None]);
        let mut want = 0.01;
        for (stage, _) in CHANNEL_WIDTHS.iter().enumerate() {
            for k in [Conv3x3, SkipConnect, Conv1x1, AvgPool3x3] {
                want += 2.0 * d.base_latency_s()[k.order() * 3 + stage];
            }
        }
        let got = measure_e2e(&d, &a, &m).latency_s;
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }

    #[test]
    fn optimized_never_slower_than_additive() {
        let add = flat_device(RuntimeModel::additive(), 0.0);
        let opt = add.with_runtime(RuntimeModel::optimized(0.35, true).unwrap());
        let m = MacroConfig::default();
        for i in (0..NUM_ARCHITECTURES).step_by(NUM_ARCHITECTURES / 200) {
            let a = architecture_from_index(i).unwrap();
            assert!(opt.noiseless_e2e(&a, &m) <= add.noiseless_e2e(&a, &m));
        }
    }

    #[test]
    fn noise_is_keyed_per_architecture() {
        let d = flat_device(RuntimeModel::additive(), 0.03);
        let m = MacroConfig::default();
        let a = architecture_from_index(1234).unwrap();
        let b = architecture_from_index(4321).unwrap();
        let first = measure_e2e(&d, &a, &m);
        let _ = measure_e2e(&d, &b, &m);
        assert_eq!(measure_e2e(&d, &a, &m), first);
        assert_ne!(first.latency_s, d.noiseless_e2e(&a, &m));
    }

    #[test]
    fn lognormal_has_unit_mean() {
        let dist = lognormal_unit_mean(0.03).unwrap();
        let mut rng = keyed_rng(1, &["t".into()]);
        let n = 200_000;
        let samples: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 1e-3);
        assert!((var.sqrt() - 0.03).abs() < 1e-3);
    }

    #[test]
    fn device_validation() {
        let base = [1e-3; NUM_VARIANTS];
        let rates = [[1e6; NUM_COUNTERS]; NUM_VARIANTS];
        let rt = RuntimeModel::additive();
        assert!(SyntheticDevice::new("d", rt, base, rates, 0.0, 0.6, 0).is_err());
        assert!(SyntheticDevice::new("d", rt, base, rates, -1.0, 0.0, 0).is_err());
        let mut bad = base;
        bad[5] = 0.0;
        assert!(SyntheticDevice::new("d", rt, bad, rates, 0.0, 0.0, 0).is_err());
        let mut none_zero = base;
        none_zero[0] = 0.0;
        let d = SyntheticDevice::new("d", rt, none_zero, rates, 0.0, 0.0, 0).unwrap();
        assert_eq!(d.base_latency_s()[0], NONE_LATENCY_FLOOR_S);
        assert!(RuntimeModel::optimized(1.0, true).is_err());
    }

    fn pool_mean(d: &SyntheticDevice, m: &MacroConfig) -> f64 {
        (0..2700)
            .map(|p| measure_e2e(d, &BenchmarkOrder::architecture_at(p).unwrap(), m).latency_s)
            .sum::<f64>()
            / 2700.0
    }

    #[test]
    fn default_pool_hits_targets() {
        let spec = PoolSpec::default();
        let m = spec.macro_config().unwrap();
        let pool = make_device_pool(&spec, 11).unwrap();
        assert_eq!(pool.len(), 7);
        for (d, ds) in pool.iter().zip(&spec.devices) {
            let mean = pool_mean(d, &m);
            let t = ds.target_mean_s;
            assert!(mean >= 0.75 * t && mean <= 1.25 * t, "{}: {mean} vs {t}", d.device_id());
        }
        let tx1 = pool.iter().find(|d| d.device_id() == "tx1-tflite").unwrap();
        assert!((0.75..=1.25).contains(&pool_mean(tx1, &m)));
        let tx2 = pool.iter().find(|d| d.device_id() == "tx2-trt").unwrap();
        assert!((0.0225..=0.0375).contains(&pool_mean(tx2, &m)));
    }

    #[test]
    fn pool_is_deterministic_and_keyed_by_id() {
        let spec = PoolSpec::default();
        let a = make_device_pool(&spec, 5).unwrap();
        let b = make_device_pool(&spec, 5).unwrap();
        assert_eq!(a, b);
        let mut smaller = spec.clone();
        smaller.devices.remove(0);
        let c = make_device_pool(&smaller, 5).unwrap();
        assert_eq!(&a[1..], &c[..]);
        assert_ne!(make_device_pool(&spec, 6).unwrap(), a);
    }

    #[test]
    fn unreachable_target_is_a_calibration_error() {
        let mut spec = PoolSpec::default();
        spec.devices[0].overhead_s = Some(1.0);
        spec.devices[0].target_mean_s = 0.5;
        assert!(matches!(make_device_pool(&spec, 1), Err(Error::Calibration(_))));
        let mut dup = PoolSpec::default();
        dup.devices.push(dup.devices[0].clone());
        assert!(matches!(make_device_pool(&dup, 1), Err(Error::Config(_))));
    }

    #[test]
    fn counter_ratios_track_cost_character() {
        let mut spec = PoolSpec::default();
        spec.devices.truncate(1);
        let base = CostCharacter {
            launch: 0.03,
            compute: 1.0,
            memory: 0.2,
        };
        let ratios = |c: CostCharacter| {
            let mut s = spec.clone();
            s.devices[0].character = Some(c);
            let d = make_device_pool(&s, 11).unwrap().remove(0);
            let conv = OperatorVariant::new(Conv3x3, 32).unwrap().index();
            let r = d.rate_profile()[conv];
            (r[1] / r[0], r[3] / r[2])
        };
        let (ipc, miss) = ratios(base);
        let (slow_ipc, _) = ratios(CostCharacter { compute: 1.5, ..base });
        let (_, heavy_miss) = ratios(CostCharacter { memory: 0.4, ..base });
        assert!(slow_ipc < 0.8 * ipc);
        assert!(heavy_miss > 1.5 * miss);
    }

    /// Replacing any `none` edge with a convolution never makes a cell faster.
    #[test]
    fn adding_a_conv_edge_is_monotone() {
        let spec = PoolSpec::default();
        let m = spec.macro_config().unwrap();
        let pool = make_device_pool(&spec, 3).unwrap();
        for d in &pool {
            for i in 0..NUM_ARCHITECTURES {
                let a = architecture_from_index(i).unwrap();
                let before = d.noiseless_e2e(&a, &m);
                for e in 0..6 {
                    if a.edges()[e] != None {
                        continue;
                    }
                    for conv in [Conv1x1, Conv3x3] {
                        let mut edges = *a.edges();
                        edges[e] = conv;
                        let after = d.noiseless_e2e(&CellArchitecture::from_edges(edges), &m);
                        assert!(after >= before, "{} arch {i} edge {e}", d.device_id());
                    }
                }
            }
        }
    }
}
