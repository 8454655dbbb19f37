//! Layer-wise look-up-table latency estimator.

use std::collections::BTreeMap;

use crate::archspace::{operator_multiset, CellArchitecture, MacroConfig, NUM_VARIANTS};
use crate::counters::{canonical_profiles, OperatorProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyLut {
    device_id: String,
    per_variant_latency_s: [f64; NUM_VARIANTS],
    overhead_s: f64,
}

impl LatencyLut {
    pub fn device_id(&self) -> &str {
        &self.device_id
    }

    pub fn per_variant_latency_s(&self) -> &[f64; NUM_VARIANTS] {
        &self.per_variant_latency_s
    }

    pub fn overhead_s(&self) -> f64 {
        self.overhead_s
    }
}

/// Table of mean per-variant latencies, in variant order regardless of the
/// order of `profiles`.
pub fn lut_build(device_id: &str, profiles: &[OperatorProfile], overhead_s: f64) -> Result<LatencyLut> {
    if !(overhead_s.is_finite() && overhead_s >= 0.0) {
        return Err(Error::Domain(format!(
            "overhead {overhead_s} must be finite and non-negative"
        )));
    }
    let ordered = canonical_profiles(profiles)?;
    let mut per_variant_latency_s = [0.0; NUM_VARIANTS];
    for (slot, p) in per_variant_latency_s.iter_mut().zip(ordered) {
        *slot = p.latency_s();
    }
    Ok(LatencyLut {
        device_id: device_id.to_string(),
        per_variant_latency_s,
        overhead_s,
    })
}

/// `overhead + sum over variants of count * latency`.
pub fn lut_predict(lut: &LatencyLut, arch: &CellArchitecture, macro_cfg: &MacroConfig) -> f64 {
    let counts = operator_multiset(arch, macro_cfg);
    lut.overhead_s
        + counts
            .iter()
            .zip(&lut.per_variant_latency_s)
            .map(|(&c, &l)| f64::from(c) * l)
            .sum::<f64>()
}

/// Fixed network cost: the measured latency of the all-`none` cell
/// (canonical index 0) if present, otherwise the smallest measured latency.
pub fn fit_overhead(latencies: &BTreeMap<usize, f64>) -> Result<f64> {
    if let Some(&l) = latencies.get(&0) {
        return Ok(l);
    }
    latencies
        .values()
        .copied()
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Structural("no latencies to fit an overhead from".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archspace::{architecture_from_index, BenchmarkOrder, OperatorKind};
    use crate::synthdev::{make_device_pool, profile_all, PoolSpec, RuntimeKind, SyntheticDevice};

    fn devices() -> Vec<SyntheticDevice> {
        make_device_pool(&PoolSpec::default(), 3).unwrap()
    }

    fn noiseless(kind: RuntimeKind) -> SyntheticDevice {
        devices()
            .into_iter()
            .find(|d| d.runtime().kind() == kind)
            .unwrap()
            .with_noise_cv(0.0)
            .unwrap()
    }

    fn own_lut(dev: &SyntheticDevice) -> LatencyLut {
        lut_build(dev.device_id(), &profile_all(dev, 1).unwrap(), dev.overhead_s()).unwrap()
    }

    #[test]
    fn noiseless_table_equals_base_latencies() {
        let dev = noiseless(RuntimeKind::Additive);
        let lut = own_lut(&dev);
        assert_eq!(lut.per_variant_latency_s(), dev.base_latency_s());
        assert_eq!(lut.overhead_s(), dev.overhead_s());
        let zero = lut_build("x", &profile_all(&dev, 1).unwrap(), 0.0).unwrap();
        assert_eq!(zero.overhead_s(), 0.0);
    }

    #[test]
    fn permutation_invariant() {
        let dev = noiseless(RuntimeKind::Additive);
        let mut profiles = profile_all(&dev, 1).unwrap();
        let a = lut_build("d", &profiles, 0.1).unwrap();
        profiles.reverse();
        profiles.swap(2, 9);
        assert_eq!(lut_build("d", &profiles, 0.1).unwrap(), a);
        profiles.pop();
        assert!(matches!(lut_build("d", &profiles, 0.1), Err(Error::Structural(_))));
    }

    #[test]
    fn all_none_is_overhead() {
        let lut = own_lut(&noiseless(RuntimeKind::Additive));
        let none = CellArchitecture::from_edges([OperatorKind::None; 6]);
        assert_eq!(lut_predict(&lut, &none, &MacroConfig::default()), lut.overhead_s());
    }

    #[test]
    fn exact_on_additive_devices() {
        let dev = noiseless(RuntimeKind::Additive);
        let lut = own_lut(&dev);
        let m = MacroConfig::default();
        for p in 0..2700 {
            let arch = BenchmarkOrder::architecture_at(p).unwrap();
            let truth = dev.noiseless_e2e(&arch, &m);
            let pred = lut_predict(&lut, &arch, &m);
            assert!((pred - truth).abs() <= 1e-12 * truth, "{p}: {pred} vs {truth}");
        }
    }

    #[test]
    fn overestimates_on_optimized_devices() {
        let dev = noiseless(RuntimeKind::Optimized);
        let lut = own_lut(&dev);
        let m = MacroConfig::default();
        let mut checked = 0;
        for p in 0..2700 {
            let arch = BenchmarkOrder::architecture_at(p).unwrap();
            if arch.fusable_fraction() == 0.0 {
                continue;
            }
            assert!(lut_predict(&lut, &arch, &m) > dev.noiseless_e2e(&arch, &m));
            checked += 1;
            if checked == 200 {
                break;
            }
        }
        assert_eq!(checked, 200);
    }

    #[test]
    fn linear_in_cells_per_stage() {
        let lut = own_lut(&noiseless(RuntimeKind::Additive));
        let arch = architecture_from_index(9876).unwrap();
        let one = lut_predict(&lut, &arch, &MacroConfig::new(3).unwrap()) - lut.overhead_s();
        let two = lut_predict(&lut, &arch, &MacroConfig::new(6).unwrap()) - lut.overhead_s();
        assert!((two - 2.0 * one).abs() <= 1e-12 * two);
    }

    #[test]
    fn overhead_fit() {
        let mut lat: BTreeMap<usize, f64> = [(4, 0.3), (9, 0.2)].into_iter().collect();
        assert_eq!(fit_overhead(&lat).unwrap(), 0.2);
        lat.insert(0, 0.25);
        assert_eq!(fit_overhead(&lat).unwrap(), 0.25);
        assert!(fit_overhead(&BTreeMap::new()).is_err());
        assert!(lut_build("d", &[], -1.0).is_err());
    }
}
