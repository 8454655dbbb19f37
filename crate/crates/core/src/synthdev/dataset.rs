use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{measure_e2e, profile_all, RuntimeKind, SyntheticDevice, PROFILE_RUNS};
use crate::archspace::{architecture_from_index, BenchmarkOrder, MacroConfig, PositionRange};
use crate::counters::{build_descriptor, build_raw_descriptor, HardwareDescriptor};
use crate::error::{Error, Result};

/// One measured end-to-end latency.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencySample {
    pub device_id: String,
    /// Canonical architecture index.
    pub arch_index: usize,
    pub latency_s: f64,
}

/// Runtime family recorded for a device in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuntimeLabel {
    Additive,
    Optimized,
    Imported,
}

impl From<RuntimeKind> for RuntimeLabel {
    fn from(k: RuntimeKind) -> Self {
        match k {
            RuntimeKind::Additive => RuntimeLabel::Additive,
            RuntimeKind::Optimized => RuntimeLabel::Optimized,
        }
    }
}

impl fmt::Display for RuntimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            RuntimeLabel::Additive => "additive",
            RuntimeLabel::Optimized => "optimized",
            RuntimeLabel::Imported => "imported",
        })
    }
}

impl FromStr for RuntimeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(RuntimeLabel::Additive),
            "optimized" => Ok(RuntimeLabel::Optimized),
            "imported" => Ok(RuntimeLabel::Imported),
            other => Err(Error::Structural(format!("unknown runtime `{other}`"))),
        }
    }
}

/// Device metadata and descriptors as stored in a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRecord {
    pub id: String,
    pub runtime: RuntimeLabel,
    pub descriptor: HardwareDescriptor,
    pub raw_descriptor: Option<HardwareDescriptor>,
}

impl DeviceRecord {
    /// The un-normalized descriptor, derived from the rate descriptor when
    /// not stored.
    pub fn raw(&self) -> HardwareDescriptor {
        self.raw_descriptor
            .clone()
            .unwrap_or_else(|| self.descriptor.rates_to_raw())
    }
}

/// Devices, their descriptors, and end-to-end latency samples.
#[derive(Debug, Clone)]
pub struct MeasurementDataset {
    devices: Vec<DeviceRecord>,
    samples: Vec<LatencySample>,
    macro_cfg: MacroConfig,
    lookup: HashMap<String, BTreeMap<usize, f64>>,
}

impl PartialEq for MeasurementDataset {
    fn eq(&self, other: &Self) -> bool {
        self.devices == other.devices && self.samples == other.samples && self.macro_cfg == other.macro_cfg
    }
}

impl MeasurementDataset {
    pub fn new(devices: Vec<DeviceRecord>, samples: Vec<LatencySample>, macro_cfg: MacroConfig) -> Result<Self> {
        let mut lookup: HashMap<String, BTreeMap<usize, f64>> = HashMap::new();
        for d in &devices {
            if d.descriptor.device_id() != d.id {
                return Err(Error::Referential(format!(
                    "descriptor of `{}` is labelled `{}`",
                    d.id,
                    d.descriptor.device_id()
                )));
            }
            if lookup.insert(d.id.clone(), BTreeMap::new()).is_some() {
                return Err(Error::Referential(format!("device `{}` declared twice", d.id)));
            }
        }
        for s in &samples {
            if !(s.latency_s.is_finite() && s.latency_s > 0.0) {
                return Err(Error::Data(format!(
                    "sample ({}, {}) has non-positive latency {}",
                    s.device_id, s.arch_index, s.latency_s
                )));
            }
            architecture_from_index(s.arch_index)?;
            let per_device = lookup
                .get_mut(&s.device_id)
                .ok_or_else(|| Error::Referential(format!("sample references unknown device `{}`", s.device_id)))?;
            if per_device.insert(s.arch_index, s.latency_s).is_some() {
                return Err(Error::Referential(format!(
                    "duplicate sample for device `{}` architecture {}",
                    s.device_id, s.arch_index
                )));
            }
        }
        Ok(MeasurementDataset {
            devices,
            samples,
            macro_cfg,
            lookup,
        })
    }

    pub fn devices(&self) -> &[DeviceRecord] {
        &self.devices
    }

    pub fn samples(&self) -> &[LatencySample] {
        &self.samples
    }

    pub fn macro_config(&self) -> MacroConfig {
        self.macro_cfg
    }

    pub fn device(&self, id: &str) -> Result<&DeviceRecord> {
        self.devices
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| Error::Referential(format!("device `{id}` not in dataset")))
    }

    /// Measured latencies of one device keyed by canonical architecture index.
    pub fn latencies(&self, id: &str) -> Result<&BTreeMap<usize, f64>> {
        self.lookup
            .get(id)
            .ok_or_else(|| Error::Referential(format!("device `{id}` not in dataset")))
    }

    pub fn latency(&self, id: &str, arch_index: usize) -> Result<f64> {
        self.latencies(id)?
            .get(&arch_index)
            .copied()
            .ok_or_else(|| Error::Referential(format!("no sample for device `{id}` architecture {arch_index}")))
    }
}

/// Profiles every device (1000 runs per operator) and measures every
/// architecture at benchmark positions `range` on it.
pub fn generate_dataset(
    pool: &[SyntheticDevice],
    range: PositionRange,
    macro_cfg: &MacroConfig,
) -> Result<MeasurementDataset> {
    let archs = (range.lo..=range.hi)
        .map(BenchmarkOrder::architecture_at)
        .collect::<Result<Vec<_>>>()?;
    let mut devices = Vec::with_capacity(pool.len());
    let mut samples = Vec::with_capacity(pool.len() * archs.len());
    for dev in pool {
        let profiles = profile_all(dev, PROFILE_RUNS)?;
        devices.push(DeviceRecord {
            id: dev.device_id().to_string(),
            runtime: dev.runtime().kind().into(),
            descriptor: build_descriptor(dev.device_id(), &profiles)?,
            raw_descriptor: Some(build_raw_descriptor(dev.device_id(), &profiles)?),
        });
        #[cfg(feature = "parallel")]
        let measured: Vec<LatencySample> = archs.par_iter().map(|a| measure_e2e(dev, a, macro_cfg)).collect();
        #[cfg(not(feature = "parallel"))]
        let measured: Vec<LatencySample> = archs.iter().map(|a| measure_e2e(dev, a, macro_cfg)).collect();
        samples.extend(measured);
    }
    MeasurementDataset::new(devices, samples, *macro_cfg)
}
