//! Line-oriented dataset files.
//!
//! ```text
//! edgelat-dataset v1
//! device <id> runtime=<additive|optimized|imported> macro.cells_per_stage=<int>
//! descriptor <105 reals>
//! raw_descriptor <105 reals>        (optional)
//! sample <device_id> <arch_index> <latency_seconds>
//! ```
//!
//! Reals are written with 17 significant digits. Lines starting with `#`
//! and blank lines are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dataset::{DeviceRecord, LatencySample, MeasurementDataset, RuntimeLabel};
use crate::archspace::{MacroConfig, NUM_ARCHITECTURES};
use crate::counters::{HardwareDescriptor, DESCRIPTOR_LEN};
use crate::error::{Error, Result};

pub const DATASET_HEADER: &str = "edgelat-dataset v1";

pub(crate) fn push_reals(out: &mut String, values: &[f64]) {
    for v in values {
        write!(out, " {v:.16e}").expect("write to string");
    }
}

/// Serializes a dataset to its canonical text form.
pub fn write_dataset(ds: &MeasurementDataset) -> String {
    let mut out = String::with_capacity(64 + ds.samples().len() * 48);
    out.push_str(DATASET_HEADER);
    out.push('\n');
    let cells = ds.macro_config().cells_per_stage();
    for d in ds.devices() {
        writeln!(
            out,
            "device {} runtime={} macro.cells_per_stage={cells}",
            d.id, d.runtime
        )
        .unwrap();
        out.push_str("descriptor");
        push_reals(&mut out, d.descriptor.values());
        out.push('\n');
        if let Some(raw) = &d.raw_descriptor {
            out.push_str("raw_descriptor");
            push_reals(&mut out, raw.values());
            out.push('\n');
        }
    }
    for s in ds.samples() {
        writeln!(out, "sample {} {} {:.16e}", s.device_id, s.arch_index, s.latency_s).unwrap();
    }
    out
}

pub fn export_dataset(ds: &MeasurementDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_dataset(ds))?;
    Ok(())
}

pub fn import_dataset(path: impl AsRef<Path>) -> Result<MeasurementDataset> {
    read_dataset(&fs::read_to_string(path)?)
}

struct PendingDevice {
    line: usize,
    id: String,
    runtime: RuntimeLabel,
    descriptor: Option<HardwareDescriptor>,
    raw: Option<HardwareDescriptor>,
}

impl PendingDevice {
    fn finish(self) -> Result<DeviceRecord> {
        let descriptor = self
            .descriptor
            .ok_or_else(|| Error::parse(self.line, format!("device `{}` has no descriptor line", self.id)))?;
        Ok(DeviceRecord {
            id: self.id,
            runtime: self.runtime,
            descriptor,
            raw_descriptor: self.raw,
        })
    }
}

fn parse_reals(line: usize, what: &str, fields: &[&str]) -> Result<Vec<f64>> {
    if fields.len() != DESCRIPTOR_LEN {
        return Err(Error::parse(
            line,
            format!("{what} has {} values, expected {DESCRIPTOR_LEN}", fields.len()),
        ));
    }
    fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("{what} field {} `{f}` is not a finite real", i + 1)))
        })
        .collect()
}

fn key_value<'a>(line: usize, field: &'a str, key: &str) -> Result<&'a str> {
    field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::parse(line, format!("expected `{key}=...`, found `{field}`")))
}

/// Parses dataset text, validating every invariant.
pub fn read_dataset(text: &str) -> Result<MeasurementDataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = lines.by_ref().find(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match header {
        Some((_, l)) if l == DATASET_HEADER => {}
        Some((n, l)) => {
            return Err(Error::parse(
                n,
                format!("expected header `{DATASET_HEADER}`, found `{l}`"),
            ))
        }
        None => return Err(Error::parse(1, "empty dataset file")),
    }

    let mut devices: Vec<DeviceRecord> = Vec::new();
    let mut pending: Option<PendingDevice> = None;
    let mut cells: Option<usize> = None;
    let mut samples = Vec::new();
    let mut sample_lines = Vec::new();

    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "device" => {
                if let Some(p) = pending.take() {
                    devices.push(p.finish()?);
                }
                if fields.len() != 4 {
                    return Err(Error::parse(
                        n,
                        "device line needs an id, runtime= and macro.cells_per_stage=",
                    ));
                }
                let runtime = key_value(n, fields[2], "runtime")?
                    .parse()
                    .map_err(|e: Error| Error::parse(n, e.to_string()))?;
                let c: usize = key_value(n, fields[3], "macro.cells_per_stage")?
                    .parse()
                    .ok()
                    .filter(|&c| c > 0)
                    .ok_or_else(|| Error::parse(n, "macro.cells_per_stage must be a positive integer"))?;
                match cells {
                    Some(prev) if prev != c => {
                        return Err(Error::parse(
                            n,
                            format!("cells_per_stage {c} differs from earlier {prev}"),
                        ))
                    }
                    _ => cells = Some(c),
                }
                pending = Some(PendingDevice {
                    line: n,
                    id: fields[1].to_string(),
                    runtime,
                    descriptor: None,
                    raw: None,
                });
            }
            kind @ ("descriptor" | "raw_descriptor") => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| Error::parse(n, format!("`{kind}` outside a device block")))?;
                let values = parse_reals(n, kind, &fields[1..])?;
                let d = HardwareDescriptor::from_values(p.id.clone(), values)
                    .map_err(|e| Error::parse(n, e.to_string()))?;
                let slot = if kind == "descriptor" {
                    &mut p.descriptor
                } else {
                    &mut p.raw
                };
                if slot.replace(d).is_some() {
                    return Err(Error::parse(n, format!("repeated `{kind}` for device `{}`", p.id)));
                }
            }
            "sample" => {
                if fields.len() != 4 {
                    return Err(Error::parse(n, "sample line needs device, architecture and latency"));
                }
                let arch_index: usize = fields[2]
                    .parse()
                    .ok()
                    .filter(|&i| i < NUM_ARCHITECTURES)
                    .ok_or_else(|| Error::parse(n, format!("architecture index `{}` invalid", fields[2])))?;
                let latency_s: f64 = fields[3]
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| Error::parse(n, format!("latency `{}` must be a positive real", fields[3])))?;
                samples.push(LatencySample {
                    device_id: fields[1].to_string(),
                    arch_index,
                    latency_s,
                });
                sample_lines.push(n);
            }
            other => return Err(Error::parse(n, format!("unknown record `{other}`"))),
        }
    }
    if let Some(p) = pending.take() {
        devices.push(p.finish()?);
    }

    // Report referential problems with their line numbers.
    let known: HashSet<&str> = devices.iter().map(|d| d.id.as_str()).collect();
    let mut seen = HashSet::new();
    for (s, &n) in samples.iter().zip(&sample_lines) {
        if !known.contains(s.device_id.as_str()) {
            return Err(Error::Referential(format!(
                "line {n}: unknown device `{}`",
                s.device_id
            )));
        }
        if !seen.insert((s.device_id.as_str(), s.arch_index)) {
            return Err(Error::Referential(format!(
                "line {n}: duplicate sample for device `{}` architecture {}",
                s.device_id, s.arch_index
            )));
        }
    }
    let macro_cfg = match cells {
        Some(c) => MacroConfig::new(c)?,
        None => MacroConfig::default(),
    };
    MeasurementDataset::new(devices, samples, macro_cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archspace::PositionRange;
    use crate::synthdev::{generate_dataset, make_device_pool, PoolSpec};

    fn two_device_dataset() -> MeasurementDataset {
        let mut spec = PoolSpec::default();
        spec.devices = vec![spec.devices[1].clone(), spec.devices[4].clone()];
        let pool = make_device_pool(&spec, 21).unwrap();
        generate_dataset(&pool, PositionRange::new(0, 49).unwrap(), &spec.macro_config().unwrap()).unwrap()
    }

    #[test]
    fn round_trip() {
        let ds = two_device_dataset();
        let text = write_dataset(&ds);
        let back = read_dataset(&text).unwrap();
        assert_eq!(back, ds);
        assert_eq!(write_dataset(&back), text);
    }

    #[test]
    fn file_round_trip() {
        let ds = two_device_dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        export_dataset(&ds, &path).unwrap();
        assert_eq!(import_dataset(&path).unwrap(), ds);
    }

    fn mini(descriptor_line: &str, samples: &str) -> String {
        format!("{DATASET_HEADER}\n# comment\ndevice a runtime=imported macro.cells_per_stage=5\n{descriptor_line}\n{samples}")
    }

    fn ones() -> String {
        let mut s = "descriptor".to_string();
        push_reals(&mut s, &[1.0; DESCRIPTOR_LEN]);
        s
    }

    #[test]
    fn accepts_comments_and_plain_reals() {
        let text = mini(&ones(), "sample a 3 0.25\n\nsample a 4 1e-2\n");
        let ds = read_dataset(&text).unwrap();
        assert_eq!(ds.samples().len(), 2);
        assert_eq!(ds.device("a").unwrap().runtime, RuntimeLabel::Imported);
        assert!(ds.device("a").unwrap().raw_descriptor.is_none());
    }

    #[test]
    fn duplicate_pair_is_referential() {
        let text = mini(&ones(), "sample a 3 0.25\nsample a 3 0.5\n");
        match read_dataset(&text) {
            Err(Error::Referential(msg)) => assert!(msg.contains("line 6"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_latency_is_parse_error() {
        let text = mini(&ones(), "sample a 3 -0.25\n");
        assert!(matches!(read_dataset(&text), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn unknown_device_is_referential() {
        let text = mini(&ones(), "sample b 3 0.25\n");
        assert!(matches!(read_dataset(&text), Err(Error::Referential(_))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_dataset("nope\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_dataset(""), Err(Error::Parse { .. })));
        let short = mini("descriptor 1 2 3", "");
        assert!(matches!(read_dataset(&short), Err(Error::Parse { line: 4, .. })));
        let bad_field = mini(&ones().replacen("1.0000000000000000e0", "x", 1), "");
        match read_dataset(&bad_field) {
            Err(Error::Parse { line: 4, message }) => assert!(message.contains("field 1"), "{message}"),
            other => panic!("{other:?}"),
        }
        let no_desc = format!("{DATASET_HEADER}\ndevice a runtime=additive macro.cells_per_stage=5\n");
        assert!(matches!(read_dataset(&no_desc), Err(Error::Parse { line: 2, .. })));
        let arch = mini(&ones(), "sample a 15625 0.1\n");
        assert!(matches!(read_dataset(&arch), Err(Error::Parse { line: 5, .. })));
    }
}
