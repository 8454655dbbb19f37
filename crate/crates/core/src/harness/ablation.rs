use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{run_experiment, EvalReport, ExperimentConfig, Method, Pooling};
use crate::counters::CounterMode;
use crate::error::{Error, Result};
use crate::sampler::SamplingStrategy;
use crate::synthdev::MeasurementDataset;

/// Cumulative component stack, from the plain baseline to the full method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AblationStage {
    /// Raw counters, random sampling, no augmentation.
    Baseline,
    Targeted,
    Normalized,
    Augmented,
}

impl AblationStage {
    pub const ALL: [AblationStage; 4] = [
        AblationStage::Baseline,
        AblationStage::Targeted,
        AblationStage::Normalized,
        AblationStage::Augmented,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AblationStage::Baseline => "baseline",
            AblationStage::Targeted => "+targeted",
            AblationStage::Normalized => "+normalized",
            AblationStage::Augmented => "+augmented",
        }
    }

    /// `base` with this stage's counter mode, strategy and augmentation.
    pub fn apply(self, base: &ExperimentConfig) -> ExperimentConfig {
        let (mode, strategy, k) = match self {
            AblationStage::Baseline => (CounterMode::Raw, SamplingStrategy::Random, 1),
            AblationStage::Targeted => (CounterMode::Raw, SamplingStrategy::TargetedUniform, 1),
            AblationStage::Normalized => (CounterMode::Normalized, SamplingStrategy::TargetedUniform, 1),
            AblationStage::Augmented => (
                CounterMode::Normalized,
                SamplingStrategy::TargetedUniform,
                base.k_augment,
            ),
        };
        ExperimentConfig {
            method: Method::MapleEdge,
            normalization: mode,
            strategy,
            k_augment: k,
            ..base.clone()
        }
    }
}

impl fmt::Display for AblationStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub pooling: Pooling,
    pub stage: AblationStage,
    pub report: EvalReport,
    /// Mean accuracy minus the baseline row of the same pooling.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub test_device: String,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, pooling: Pooling, stage: AblationStage) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.pooling == pooling && r.stage == stage)
    }
}

/// Four cumulative configurations per pooling mode, sharing seeds and the
/// adaptation budget of `base`.
pub fn run_ablation_stack(
    ds: &MeasurementDataset,
    base: &ExperimentConfig,
    poolings: &[Pooling],
) -> Result<AblationTable> {
    if poolings.is_empty() {
        return Err(Error::Config("no pooling modes to ablate".into()));
    }
    let mut rows = Vec::with_capacity(poolings.len() * 4);
    for &pooling in poolings {
        let with_pool = ExperimentConfig {
            pooling,
            ..base.clone()
        };
        let mut baseline = 0.0;
        for stage in AblationStage::ALL {
            let report = run_experiment(ds, &stage.apply(&with_pool))?;
            if stage == AblationStage::Baseline {
                baseline = report.mean;
            }
            rows.push(AblationRow {
                pooling,
                stage,
                delta: report.mean - baseline,
                report,
            });
        }
    }
    Ok(AblationTable {
        test_device: base.test_device.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n_adapt: usize,
    pub k_augment: usize,
    pub trial_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub test_device: String,
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// Row-major over `n_values` then `k_values`.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn get(&self, n: usize, k: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.n_adapt == n && c.k_augment == k)
    }
}

/// Mean accuracy of `base` for every `(n_adapt, k_augment)` combination.
pub fn run_adaptation_sweep(
    ds: &MeasurementDataset,
    base: &ExperimentConfig,
    n_values: &[usize],
    k_values: &[usize],
) -> Result<SweepGrid> {
    if n_values.is_empty() || k_values.is_empty() {
        return Err(Error::Config("sweep needs at least one n and one k value".into()));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n == 0 || n > base.train_range.len()) {
        return Err(Error::Config(format!(
            "adaptation count {n} outside [1, {}]",
            base.train_range.len()
        )));
    }
    let combos: Vec<(usize, usize)> = n_values
        .iter()
        .flat_map(|&n| k_values.iter().map(move |&k| (n, k)))
        .collect();
    let one = |&(n, k): &(usize, usize)| -> Result<SweepCell> {
        let cfg = ExperimentConfig {
            n_adapt: n,
            k_augment: k,
            ..base.clone()
        };
        let r = run_experiment(ds, &cfg)?;
        Ok(SweepCell {
            n_adapt: n,
            k_augment: k,
            trial_accuracies: r.trial_accuracies,
            mean: r.mean,
            std: r.std,
        })
    };
    #[cfg(feature = "parallel")]
    let cells = combos.par_iter().map(one).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let cells = combos.iter().map(one).collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        test_device: base.test_device.clone(),
        n_values: n_values.to_vec(),
        k_values: k_values.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archspace::PositionRange;
    use crate::synthdev::{generate_dataset, make_device_pool, PoolSpec};

    fn small() -> (MeasurementDataset, ExperimentConfig) {
        let mut spec = PoolSpec::default();
        spec.devices = vec![
            spec.devices[4].clone(),
            spec.devices[5].clone(),
            spec.devices[6].clone(),
        ];
        let pool = make_device_pool(&spec, 2).unwrap();
        let ds = generate_dataset(
            &pool,
            PositionRange::new(0, 2699).unwrap(),
            &spec.macro_config().unwrap(),
        )
        .unwrap();
        let mut c = ExperimentConfig::new("tx2-trt");
        c.n_trials = 1;
        c.train.epochs = 1;
        c.train_range = PositionRange::new(0, 59).unwrap();
        c.test_range = PositionRange::new(1800, 1859).unwrap();
        (ds, c)
    }

    #[test]
    fn stack_has_four_rows_per_pooling() {
        let (ds, c) = small();
        let t = run_ablation_stack(&ds, &c, &[Pooling::Runtime, Pooling::Combined]).unwrap();
        assert_eq!(t.rows.len(), 8);
        let base = t.row(Pooling::Runtime, AblationStage::Baseline).unwrap();
        assert_eq!(base.delta, 0.0);
        assert_eq!(
            base.report.config.effective_knobs(),
            (CounterMode::Raw, SamplingStrategy::Random, 1)
        );
        let full = t.row(Pooling::Combined, AblationStage::Augmented).unwrap();
        assert_eq!(full.report.config.k_augment, 7);
        let tu = t.row(Pooling::Runtime, AblationStage::Targeted).unwrap();
        let norm = t.row(Pooling::Runtime, AblationStage::Normalized).unwrap();
        assert_eq!(tu.report.adaptation_sets, norm.report.adaptation_sets);
        assert!(run_ablation_stack(&ds, &c, &[]).is_err());
    }

    #[test]
    fn sweep_grid_shape() {
        let (ds, c) = small();
        let g = run_adaptation_sweep(&ds, &c, &[5, 10], &[1, 3]).unwrap();
        assert_eq!(g.cells.len(), 4);
        assert!(g.cells.iter().all(|cell| (0.0..=100.0).contains(&cell.mean)));
        assert_eq!(g.get(10, 3).unwrap().k_augment, 3);
        assert!(run_adaptation_sweep(&ds, &c, &[61], &[1]).is_err());
        assert!(run_adaptation_sweep(&ds, &c, &[], &[1]).is_err());
    }
}
