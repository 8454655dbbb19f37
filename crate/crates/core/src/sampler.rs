//! Adaptation-set selection and clone augmentation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingStrategy {
    TargetedUniform,
    Random,
}

impl fmt::Display for SamplingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SamplingStrategy::TargetedUniform => "targeted_uniform",
            SamplingStrategy::Random => "random",
        })
    }
}

impl FromStr for SamplingStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "targeted_uniform" => Ok(SamplingStrategy::TargetedUniform),
            "random" => Ok(SamplingStrategy::Random),
            other => Err(Error::Config(format!("unknown sampling strategy `{other}`"))),
        }
    }
}

/// Architectures chosen for measurement on the unseen device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptationSet {
    pub device_id: String,
    pub arch_indices: Vec<usize>,
    pub strategy: SamplingStrategy,
    pub seed: u64,
}

/// Rank-stratified selection over the merged latency rankings of the
/// training devices.
///
/// Each device's architectures are ranked by latency (ties by index) and the
/// ranks split into `n` contiguous bins, the last absorbing any remainder.
/// Bin `b` pools every device's architectures ranked into it; one distinct
/// architecture is drawn per bin.
pub fn targeted_uniform_sample(
    train_latencies: &BTreeMap<String, Vec<(usize, f64)>>,
    n: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let bins = rank_bins(train_latencies, n)?;
    let universe: BTreeSet<usize> = train_latencies
        .values()
        .next()
        .expect("non-empty")
        .iter()
        .map(|&(i, _)| i)
        .collect();
    let mut rng = keyed_rng(seed, &["targeted-uniform".into()]);
    let mut picked = Vec::with_capacity(n);
    let mut taken = BTreeSet::new();
    for bin in &bins {
        // Drawing uniformly among the not-yet-taken entries is the same
        // distribution as redrawing on duplicates.
        let fresh: Vec<usize> = bin.iter().copied().filter(|a| !taken.contains(a)).collect();
        let choice = if fresh.is_empty() {
            let rest: Vec<usize> = universe.difference(&taken).copied().collect();
            rest[rng.random_range(0..rest.len())]
        } else {
            fresh[rng.random_range(0..fresh.len())]
        };
        taken.insert(choice);
        picked.push(choice);
    }
    Ok(picked)
}

/// The pooled bins used by [`targeted_uniform_sample`]: `bins[b]` lists the
/// architectures every device ranks into bin `b`, device by device.
pub fn rank_bins(train_latencies: &BTreeMap<String, Vec<(usize, f64)>>, n: usize) -> Result<Vec<Vec<usize>>> {
    let mut devices = train_latencies.iter();
    let (first_id, first) = devices
        .next()
        .ok_or_else(|| Error::Structural("no training devices to rank".into()))?;
    let reference: BTreeSet<usize> = first.iter().map(|&(i, _)| i).collect();
    if reference.len() != first.len() {
        return Err(Error::Structural(format!(
            "device `{first_id}` lists an architecture twice"
        )));
    }
    for (id, rows) in devices {
        let set: BTreeSet<usize> = rows.iter().map(|&(i, _)| i).collect();
        if set != reference || rows.len() != first.len() {
            return Err(Error::Structural(format!(
                "device `{id}` does not list the same architectures as `{first_id}`"
            )));
        }
    }
    let x = reference.len();
    if n == 0 || n > x {
        return Err(Error::Range(format!(
            "cannot draw {n} adaptation samples from {x} architectures"
        )));
    }
    let width = x / n;
    let mut bins = vec![Vec::with_capacity(train_latencies.len() * width); n];
    for rows in train_latencies.values() {
        let mut ranked = rows.clone();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        for (rank, (arch, _)) in ranked.into_iter().enumerate() {
            bins[(rank / width).min(n - 1)].push(arch);
        }
    }
    Ok(bins)
}

/// `n` distinct architectures drawn uniformly without replacement.
pub fn random_sample(arch_indices: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > arch_indices.len() {
        return Err(Error::Range(format!(
            "cannot draw {n} adaptation samples from {} architectures",
            arch_indices.len()
        )));
    }
    let mut rng = keyed_rng(seed, &["random".into()]);
    Ok(index::sample(&mut rng, arch_indices.len(), n)
        .into_iter()
        .map(|i| arch_indices[i])
        .collect())
}

/// Selects an adaptation set with either strategy. Random sampling draws from
/// the architectures of the first training device.
pub fn select_adaptation(
    device_id: &str,
    train_latencies: &BTreeMap<String, Vec<(usize, f64)>>,
    n: usize,
    strategy: SamplingStrategy,
    seed: u64,
) -> Result<AdaptationSet> {
    let arch_indices = match strategy {
        SamplingStrategy::TargetedUniform => targeted_uniform_sample(train_latencies, n, seed)?,
        SamplingStrategy::Random => {
            let (_, rows) = train_latencies
                .iter()
                .next()
                .ok_or_else(|| Error::Structural("no training devices".into()))?;
            let pool: Vec<usize> = rows.iter().map(|&(i, _)| i).collect();
            random_sample(&pool, n, seed)?
        }
    };
    Ok(AdaptationSet {
        device_id: device_id.to_string(),
        arch_indices,
        strategy,
        seed,
    })
}

/// Repeats every row `k` times in place: the original followed by `k - 1` clones.
pub fn augment<T: Clone>(rows: &[T], k: usize) -> Result<Vec<T>> {
    if k < 1 {
        return Err(Error::Range("augmentation factor must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(rows.len() * k);
    for row in rows {
        out.extend(std::iter::repeat_n(row, k).cloned());
    }
    Ok(out)
}
