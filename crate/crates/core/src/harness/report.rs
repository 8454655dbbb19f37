//! Report files and console tables.
//!
//! Report files share the dataset conventions: one record per line, first
//! token names the record, reals carry 17 significant digits.

use std::fmt::Write as _;

use super::{AblationTable, EvalReport, ExperimentConfig, SweepGrid};
use crate::synthdev::push_reals;

pub const REPORT_HEADER: &str = "edgelat-report v1";

fn config_line(out: &mut String, c: &ExperimentConfig) {
    let hidden: Vec<String> = c.train.hidden.iter().map(usize::to_string).collect();
    writeln!(
        out,
        "config test_device={} pooling={} training_device={} method={} strategy={} normalization={} \
         n_adapt={} k_augment={} n_trials={} train_range={} test_range={} seed={} epochs={} batch_size={} \
         learning_rate={:e} hidden={}",
        c.test_device,
        c.pooling,
        c.training_device.as_deref().unwrap_or("-"),
        c.method,
        c.strategy,
        c.normalization,
        c.n_adapt,
        c.k_augment,
        c.n_trials,
        c.train_range,
        c.test_range,
        c.seed,
        c.train.epochs,
        c.train.batch_size,
        c.train.learning_rate,
        hidden.join(","),
    )
    .unwrap();
}

pub fn write_report(r: &EvalReport) -> String {
    let mut out = String::new();
    writeln!(out, "{REPORT_HEADER}").unwrap();
    config_line(&mut out, &r.config);
    writeln!(out, "training_devices {}", r.training_devices.join(" ")).unwrap();
    for (t, a) in r.trial_accuracies.iter().enumerate() {
        write!(out, "trial {t}").unwrap();
        push_reals(&mut out, &[*a]);
        out.push('\n');
    }
    out.push_str("summary");
    push_reals(&mut out, &[r.mean, r.std]);
    out.push('\n');
    for (id, a) in &r.per_device {
        write!(out, "device {id}").unwrap();
        push_reals(&mut out, &[*a]);
        out.push('\n');
    }
    for (i, s) in r.adaptation_sets.iter().enumerate() {
        write!(out, "adapt {i} seed={}", s.seed).unwrap();
        for a in &s.arch_indices {
            write!(out, " {a}").unwrap();
        }
        out.push('\n');
    }
    for p in &r.pairs {
        write!(out, "pair {}", p.arch_index).unwrap();
        push_reals(&mut out, &[p.predicted_s, p.true_s]);
        out.push('\n');
    }
    out
}

pub fn write_ablation(t: &AblationTable) -> String {
    let mut out = String::new();
    writeln!(out, "{REPORT_HEADER}").unwrap();
    if let Some(first) = t.rows.first() {
        config_line(&mut out, &first.report.config);
    }
    for row in &t.rows {
        write!(out, "row {} {}", row.pooling, row.stage).unwrap();
        push_reals(&mut out, &[row.report.mean, row.report.std, row.delta]);
        out.push('\n');
    }
    out
}

pub fn write_sweep(g: &SweepGrid) -> String {
    let mut out = String::new();
    writeln!(out, "{REPORT_HEADER}").unwrap();
    writeln!(out, "sweep test_device={}", g.test_device).unwrap();
    for c in &g.cells {
        write!(out, "cell {} {}", c.n_adapt, c.k_augment).unwrap();
        push_reals(&mut out, &[c.mean, c.std]);
        out.push('\n');
    }
    out
}

/// Aligned summary of one experiment.
pub fn format_report(r: &EvalReport) -> String {
    let c = &r.config;
    let mut out = String::new();
    writeln!(
        out,
        "{:<12} {:<20} {:<10} {:>8} {:>8}",
        "test", "method", "pooling", "mean", "std"
    )
    .unwrap();
    writeln!(
        out,
        "{:<12} {:<20} {:<10} {:>8.2} {:>8.2}",
        c.test_device, c.method, c.pooling, r.mean, r.std
    )
    .unwrap();
    for (id, a) in &r.per_device {
        writeln!(out, "  trained on {id:<12} {a:>8.2}").unwrap();
    }
    out
}

pub fn format_ablation(t: &AblationTable) -> String {
    let mut out = String::new();
    writeln!(out, "test device: {}", t.test_device).unwrap();
    writeln!(
        out,
        "{:<20} {:<12} {:>8} {:>8} {:>8}",
        "pooling", "stage", "mean", "std", "delta"
    )
    .unwrap();
    for row in &t.rows {
        writeln!(
            out,
            "{:<20} {:<12} {:>8.2} {:>8.2} {:>+8.2}",
            row.pooling.to_string(),
            row.stage.label(),
            row.report.mean,
            row.report.std,
            row.delta
        )
        .unwrap();
    }
    out
}

pub fn format_sweep(g: &SweepGrid) -> String {
    let mut out = String::new();
    write!(out, "{:>6}", "n\\k").unwrap();
    for k in &g.k_values {
        write!(out, " {k:>8}").unwrap();
    }
    out.push('\n');
    for &n in &g.n_values {
        write!(out, "{n:>6}").unwrap();
        for &k in &g.k_values {
            let mean = g.get(n, k).map_or(f64::NAN, |c| c.mean);
            write!(out, " {mean:>8.2}").unwrap();
        }
        out.push('\n');
    }
    out
}
