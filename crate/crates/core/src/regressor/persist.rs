//! Text persistence for trained models.
//!
//! ```text
//! edgelat-model v1
//! counter_mode <normalized|raw>
//! descriptor_scaling <per_column|shared_log>
//! seed <u64>
//! layers <n_in> <h1> ... <1>
//! feature_mean <reals>
//! feature_std <reals>
//! target <mean> <std>
//! weights <layer> <reals, row-major fan_in x fan_out>
//! bias <layer> <reals>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::mlp::{Dense, Network};
use super::{DescriptorScaling, RegressionModel};
use crate::counters::CounterMode;
use crate::error::{Error, Result};
use crate::synthdev::push_reals;

pub const MODEL_HEADER: &str = "edgelat-model v1";

pub fn write_model(model: &RegressionModel) -> String {
    let mut out = String::new();
    writeln!(out, "{MODEL_HEADER}").unwrap();
    writeln!(out, "counter_mode {}", model.counter_mode).unwrap();
    writeln!(out, "descriptor_scaling {}", model.descriptor_scaling).unwrap();
    writeln!(out, "seed {}", model.seed).unwrap();
    out.push_str("layers");
    for s in model.net.sizes() {
        write!(out, " {s}").unwrap();
    }
    out.push_str("\nfeature_mean");
    push_reals(&mut out, &model.feature_mean);
    out.push_str("\nfeature_std");
    push_reals(&mut out, &model.feature_std);
    out.push_str("\ntarget");
    push_reals(&mut out, &[model.target_mean, model.target_std]);
    out.push('\n');
    for (i, layer) in model.net.layers.iter().enumerate() {
        write!(out, "weights {i}").unwrap();
        push_reals(&mut out, &layer.w.iter().copied().collect::<Vec<_>>());
        write!(out, "\nbias {i}").unwrap();
        push_reals(&mut out, layer.b.as_slice().expect("contiguous bias"));
        out.push('\n');
    }
    out
}

pub fn save_model(model: &RegressionModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_model(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RegressionModel> {
    read_model(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-comment line whose first token is `key`; returns the rest.
    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, line) = self
            .inner
            .next()
            .ok_or_else(|| Error::parse(self.last + 1, format!("missing `{key}` line")))?;
        self.last = n;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some(k) if k == key => Ok((n, fields.collect())),
            _ => Err(Error::parse(n, format!("expected `{key}`, found `{line}`"))),
        }
    }
}

fn reals(n: usize, fields: &[&str], expected: usize) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(Error::parse(
            n,
            format!("expected {expected} values, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(n, format!("`{f}` is not a finite real")))
        })
        .collect()
}

fn single<'a>(n: usize, fields: &[&'a str]) -> Result<&'a str> {
    match fields {
        [one] => Ok(one),
        _ => Err(Error::parse(n, "expected exactly one value")),
    }
}

pub fn read_model(text: &str) -> Result<RegressionModel> {
    let iter: Box<dyn Iterator<Item = (usize, &str)>> = Box::new(
        text.lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
    );
    let mut lines = Lines {
        inner: iter.peekable(),
        last: 0,
    };
    match lines.inner.next() {
        Some((_, l)) if l == MODEL_HEADER => {}
        Some((n, l)) => {
            return Err(Error::parse(
                n,
                format!("expected header `{MODEL_HEADER}`, found `{l}`"),
            ))
        }
        None => return Err(Error::parse(1, "empty model file")),
    }

    let (n, f) = lines.expect("counter_mode")?;
    let counter_mode: CounterMode = single(n, &f)?
        .parse()
        .map_err(|e: Error| Error::parse(n, e.to_string()))?;
    let (n, f) = lines.expect("descriptor_scaling")?;
    let descriptor_scaling: DescriptorScaling = single(n, &f)?
        .parse()
        .map_err(|e: Error| Error::parse(n, e.to_string()))?;
    let (n, f) = lines.expect("seed")?;
    let seed: u64 = single(n, &f)?
        .parse()
        .map_err(|_| Error::parse(n, "seed must be an unsigned integer"))?;
    let (n, f) = lines.expect("layers")?;
    let sizes: Vec<usize> = f
        .iter()
        .map(|s| s.parse().ok().filter(|&v: &usize| v > 0))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::parse(n, "layer sizes must be positive integers"))?;
    if sizes.len() < 2 || *sizes.last().unwrap() != 1 {
        return Err(Error::parse(n, "need at least an input size and a final size of 1"));
    }
    let n_in = sizes[0];
    let (n, f) = lines.expect("feature_mean")?;
    let feature_mean = reals(n, &f, n_in)?;
    let (n, f) = lines.expect("feature_std")?;
    let feature_std = reals(n, &f, n_in)?;
    if feature_std.iter().any(|&s| s <= 0.0) {
        return Err(Error::parse(n, "feature_std entries must be positive"));
    }
    let (n, f) = lines.expect("target")?;
    let t = reals(n, &f, 2)?;
    if t[1] <= 0.0 {
        return Err(Error::parse(n, "target std must be positive"));
    }

    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for (i, pair) in sizes.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let (n, f) = lines.expect("weights")?;
        if f.first().and_then(|s| s.parse::<usize>().ok()) != Some(i) {
            return Err(Error::parse(n, format!("expected weights for layer {i}")));
        }
        let w = reals(n, &f[1..], fan_in * fan_out)?;
        let (n, f) = lines.expect("bias")?;
        if f.first().and_then(|s| s.parse::<usize>().ok()) != Some(i) {
            return Err(Error::parse(n, format!("expected bias for layer {i}")));
        }
        let b = reals(n, &f[1..], fan_out)?;
        layers.push(Dense {
            w: Array2::from_shape_vec((fan_in, fan_out), w).expect("shape checked"),
            b: Array1::from(b),
        });
    }
    if let Some((n, l)) = lines.inner.next() {
        return Err(Error::parse(n, format!("unexpected trailing line `{l}`")));
    }
    Ok(RegressionModel {
        net: Network { layers },
        feature_mean,
        feature_std,
        target_mean: t[0],
        target_std: t[1],
        descriptor_scaling,
        counter_mode,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressor::{random_rows, train, TrainConfig};

    fn small_model() -> RegressionModel {
        let rows = random_rows(20, 39, 4);
        let cfg = TrainConfig {
            epochs: 5,
            hidden: vec![6, 5],
            seed: 77,
            ..TrainConfig::default()
        };
        train(&rows, &cfg, CounterMode::Raw).unwrap()
    }

    #[test]
    fn shared_log_round_trip() {
        let rows = random_rows(20, 9, 4);
        let cfg = TrainConfig {
            epochs: 3,
            hidden: vec![4],
            descriptor_scaling: DescriptorScaling::SharedLog,
            ..TrainConfig::default()
        };
        let m = train(&rows, &cfg, CounterMode::Normalized).unwrap();
        assert_eq!(read_model(&write_model(&m)).unwrap(), m);
    }

    #[test]
    fn round_trip_is_exact() {
        let m = small_model();
        let text = write_model(&m);
        let back = read_model(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(write_model(&back), text);
        let x = random_rows(5, 39, 8);
        let refs: Vec<&[f64]> = x.iter().map(|r| r.features.as_slice()).collect();
        assert_eq!(m.predict_log(&refs).unwrap(), back.predict_log(&refs).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let m = small_model();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        save_model(&m, &p).unwrap();
        assert_eq!(load_model(&p).unwrap(), m);
    }

    #[test]
    fn rejects_corruption() {
        let text = write_model(&small_model());
        assert!(matches!(read_model("junk"), Err(Error::Parse { line: 1, .. })));
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_model(&truncated), Err(Error::Parse { .. })));
        let bad = text.replacen("counter_mode raw", "counter_mode fancy", 1);
        assert!(matches!(read_model(&bad), Err(Error::Parse { line: 2, .. })));
        let extra = format!("{text}bias 9 1\n");
        assert!(matches!(read_model(&extra), Err(Error::Parse { .. })));
    }
}
