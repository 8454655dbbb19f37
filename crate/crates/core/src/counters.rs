//! Hardware-runtime descriptors built from per-operator counter profiles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::archspace::{OperatorVariant, NUM_VARIANTS};
use crate::error::{Error, Result};

pub const NUM_COUNTERS: usize = 6;
/// Entries per variant block: six counters followed by the latency.
pub const BLOCK_LEN: usize = NUM_COUNTERS + 1;
pub const DESCRIPTOR_LEN: usize = NUM_VARIANTS * BLOCK_LEN;

pub const COUNTER_NAMES: [&str; NUM_COUNTERS] = [
    "cpu-cycles",
    "instructions",
    "cache-references",
    "cache-misses",
    "L1-dcache-loads",
    "L1-dcache-load-misses",
];

/// Mean event counts for a single inference run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CounterSet {
    pub cpu_cycles: f64,
    pub instructions: f64,
    pub cache_references: f64,
    pub cache_misses: f64,
    pub l1_dcache_loads: f64,
    pub l1_dcache_load_misses: f64,
}

impl CounterSet {
    pub fn from_array(v: [f64; NUM_COUNTERS]) -> Result<Self> {
        if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Domain(format!(
                "counter value {bad} is not a finite non-negative count"
            )));
        }
        Ok(CounterSet {
            cpu_cycles: v[0],
            instructions: v[1],
            cache_references: v[2],
            cache_misses: v[3],
            l1_dcache_loads: v[4],
            l1_dcache_load_misses: v[5],
        })
    }

    pub fn to_array(&self) -> [f64; NUM_COUNTERS] {
        [
            self.cpu_cycles,
            self.instructions,
            self.cache_references,
            self.cache_misses,
            self.l1_dcache_loads,
            self.l1_dcache_load_misses,
        ]
    }
}

/// Characterization of one operator variant on one device-runtime.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorProfile {
    variant: OperatorVariant,
    latency_s: f64,
    counters: CounterSet,
    n_runs: u32,
}

impl OperatorProfile {
    pub fn new(variant: OperatorVariant, latency_s: f64, counters: CounterSet, n_runs: u32) -> Result<Self> {
        if !(latency_s.is_finite() && latency_s > 0.0) {
            return Err(Error::Domain(format!("operator latency {latency_s} must be positive")));
        }
        if n_runs == 0 {
            return Err(Error::Domain("n_runs must be at least 1".into()));
        }
        Ok(OperatorProfile {
            variant,
            latency_s,
            counters,
            n_runs,
        })
    }

    pub fn variant(&self) -> OperatorVariant {
        self.variant
    }

    pub fn latency_s(&self) -> f64 {
        self.latency_s
    }

    pub fn counters(&self) -> &CounterSet {
        &self.counters
    }

    pub fn n_runs(&self) -> u32 {
        self.n_runs
    }
}

/// Counter rates in events per second.
pub fn normalize_counters(profile: &OperatorProfile) -> Result<[f64; NUM_COUNTERS]> {
    // OperatorProfile::new already rejects this; kept for profiles built elsewhere.
    if profile.latency_s <= 0.0 {
        return Err(Error::Domain("latency must be positive".into()));
    }
    Ok(profile.counters.to_array().map(|c| c / profile.latency_s))
}

/// Per-device vector of 15 blocks `[6 counter entries, latency]` in variant order.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareDescriptor {
    device_id: String,
    values: Vec<f64>,
}

impl HardwareDescriptor {
    /// Wraps an already laid-out vector, checking length and sign invariants.
    pub fn from_values(device_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != DESCRIPTOR_LEN {
            return Err(Error::Structural(format!(
                "descriptor has {} values, expected {DESCRIPTOR_LEN}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            let is_latency = i % BLOCK_LEN == NUM_COUNTERS;
            let ok = v.is_finite() && if is_latency { v > 0.0 } else { v >= 0.0 };
            if !ok {
                return Err(Error::Domain(format!(
                    "descriptor entry {i} = {v} violates sign invariant"
                )));
            }
        }
        Ok(HardwareDescriptor {
            device_id: device_id.into(),
            values,
        })
    }

    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn block(&self, variant: usize) -> &[f64] {
        &self.values[variant * BLOCK_LEN..(variant + 1) * BLOCK_LEN]
    }

    pub fn latency(&self, variant: usize) -> f64 {
        self.values[variant * BLOCK_LEN + NUM_COUNTERS]
    }

    /// Converts a rate descriptor into raw-count layout (rate × latency).
    pub fn rates_to_raw(&self) -> HardwareDescriptor {
        let mut values = self.values.clone();
        for v in 0..NUM_VARIANTS {
            let lat = self.latency(v);
            for c in 0..NUM_COUNTERS {
                values[v * BLOCK_LEN + c] *= lat;
            }
        }
        HardwareDescriptor {
            device_id: self.device_id.clone(),
            values,
        }
    }

    /// Recovers operator profiles from a rate descriptor.
    pub fn to_profiles(&self, n_runs: u32) -> Result<Vec<OperatorProfile>> {
        OperatorVariant::all()
            .map(|variant| {
                let v = variant.index();
                let lat = self.latency(v);
                let mut counts = [0.0; NUM_COUNTERS];
                for (c, slot) in counts.iter_mut().enumerate() {
                    *slot = self.values[v * BLOCK_LEN + c] * lat;
                }
                OperatorProfile::new(variant, lat, CounterSet::from_array(counts)?, n_runs)
            })
            .collect()
    }
}

/// Puts profiles in canonical variant order, rejecting gaps and duplicates.
pub(crate) fn canonical_profiles(profiles: &[OperatorProfile]) -> Result<[&OperatorProfile; NUM_VARIANTS]> {
    let mut slots: [Option<&OperatorProfile>; NUM_VARIANTS] = [None; NUM_VARIANTS];
    for p in profiles {
        let slot = &mut slots[p.variant.index()];
        if slot.is_some() {
            return Err(Error::Structural(format!(
                "duplicate profile for variant {}",
                p.variant
            )));
        }
        *slot = Some(p);
    }
    let mut out = Vec::with_capacity(NUM_VARIANTS);
    for (i, slot) in slots.iter().enumerate() {
        match slot {
            Some(p) => out.push(*p),
            None => {
                let v = OperatorVariant::from_index(i).expect("in range");
                return Err(Error::Structural(format!("missing profile for variant {v}")));
            }
        }
    }
    Ok(out.try_into().expect("15 profiles"))
}

fn assemble(
    device_id: &str,
    profiles: &[OperatorProfile],
    counters: impl Fn(&OperatorProfile) -> Result<[f64; NUM_COUNTERS]>,
) -> Result<HardwareDescriptor> {
    let ordered = canonical_profiles(profiles)?;
    let mut values = Vec::with_capacity(DESCRIPTOR_LEN);
    for p in ordered {
        values.extend(counters(p)?);
        values.push(p.latency_s);
    }
    HardwareDescriptor::from_values(device_id, values)
}

/// Descriptor with latency-normalized counter rates.
pub fn build_descriptor(device_id: &str, profiles: &[OperatorProfile]) -> Result<HardwareDescriptor> {
    assemble(device_id, profiles, normalize_counters)
}

/// Descriptor with raw mean counts, for the un-normalized ablation.
pub fn build_raw_descriptor(device_id: &str, profiles: &[OperatorProfile]) -> Result<HardwareDescriptor> {
    assemble(device_id, profiles, |p| Ok(p.counters.to_array()))
}

/// Which descriptor variant a model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterMode {
    #[default]
    Normalized,
    Raw,
}

impl fmt::Display for CounterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            CounterMode::Normalized => "normalized",
            CounterMode::Raw => "raw",
        })
    }
}

impl FromStr for CounterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(CounterMode::Normalized),
            "raw" => Ok(CounterMode::Raw),
            other => Err(Error::Config(format!("unknown counter mode `{other}`"))),
        }
    }
}
