use crate::error::{Error, Result};

pub const DEFAULT_BOUND: f64 = 0.10;

/// Relative slack so decimal boundary cases such as `(1.1, 1.0)` land inside
/// despite binary rounding.
const BOUND_SLACK: f64 = 1e-12;

/// Percentage of `(predicted, true)` pairs with `|pred - true| <= bound * true`.
/// The boundary counts as inside.
pub fn bound_accuracy(pairs: &[(f64, f64)], bound: f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Structural("no prediction pairs".into()));
    }
    let mut within = 0usize;
    for &(pred, truth) in pairs {
        if !(truth.is_finite() && truth > 0.0) {
            return Err(Error::Domain(format!("true latency {truth} must be positive")));
        }
        if (pred - truth).abs() <= (bound + BOUND_SLACK) * truth {
            within += 1;
        }
    }
    Ok(100.0 * within as f64 / pairs.len() as f64)
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
