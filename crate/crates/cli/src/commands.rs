use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use edgelat::archspace::{architecture_from_index, BenchmarkOrder};
use edgelat::counters::CounterMode;
use edgelat::harness::{
    format_ablation, format_report, format_sweep, run_ablation_stack, run_adaptation_sweep, run_experiment,
    train_trial, write_ablation, write_report, write_sweep, ExperimentConfig, DEFAULT_BOUND,
};
use edgelat::regressor::{load_model, predict_many, save_model};
use edgelat::synthdev::{export_dataset, generate_dataset, import_dataset, make_device_pool, MeasurementDataset};

use crate::config::{config_error, CliConfig};
use crate::{Cli, Command, Overrides};

struct RunContext {
    config: CliConfig,
    seed: u64,
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(config_error("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let config = CliConfig::load(cli.config.as_deref())?;
    let ctx = RunContext {
        seed: cli.seed.unwrap_or(config.seed),
        config,
        out: cli.out,
    };
    match cli.command {
        Command::GenPool => gen_pool(&ctx),
        Command::Import { input } => import(&ctx, &input),
        Command::Train {
            dataset,
            trial,
            overrides,
        } => train(&ctx, &dataset, trial, &overrides),
        Command::Predict {
            model,
            dataset,
            device,
            archs,
            positions,
        } => {
            let archs = match positions {
                Some(range) => BenchmarkOrder::canonical_range(range)?,
                None if archs.is_empty() => return Err(config_error("give --archs or --positions")),
                None => archs,
            };
            predict(&ctx, &model, &dataset, &device, &archs)
        }
        Command::Evaluate {
            dataset,
            pairs,
            overrides,
        } => evaluate(&ctx, &dataset, pairs.as_deref(), &overrides),
        Command::Ablate {
            dataset,
            poolings,
            overrides,
        } => {
            let ds = load_dataset(&dataset)?;
            let exp = experiment(&ctx, &overrides)?;
            let poolings = if poolings.is_empty() {
                ctx.config.ablate.poolings.clone()
            } else {
                poolings
            };
            let table = run_ablation_stack(&ds, &exp, &poolings)?;
            print!("{}", format_ablation(&table));
            emit(ctx.out.as_deref(), &write_ablation(&table))
        }
        Command::Sweep {
            n_values,
            k_values,
            dataset,
            overrides,
        } => {
            let ds = load_dataset(&dataset)?;
            let exp = experiment(&ctx, &overrides)?;
            let pick = |flag: Vec<usize>, cfg: &Vec<usize>| if flag.is_empty() { cfg.clone() } else { flag };
            let n_values = pick(n_values, &ctx.config.sweep.n_values);
            let k_values = pick(k_values, &ctx.config.sweep.k_values);
            let grid = run_adaptation_sweep(&ds, &exp, &n_values, &k_values)?;
            print!("{}", format_sweep(&grid));
            emit(ctx.out.as_deref(), &write_sweep(&grid))
        }
    }
}

fn load_dataset(path: &Path) -> anyhow::Result<MeasurementDataset> {
    import_dataset(path).with_context(|| format!("reading dataset {}", path.display()))
}

fn required_out(ctx: &RunContext) -> anyhow::Result<&Path> {
    ctx.out
        .as_deref()
        .ok_or_else(|| config_error("this command needs --out"))
}

/// Writes `text` to `out` when given.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    if let Some(p) = out {
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn experiment(ctx: &RunContext, o: &Overrides) -> anyhow::Result<ExperimentConfig> {
    let mut e = match (&ctx.config.experiment, &o.test_device) {
        (None, Some(id)) => ExperimentConfig {
            seed: ctx.seed,
            ..ExperimentConfig::new(id)
        },
        _ => ctx.config.experiment(ctx.seed)?,
    };
    if let Some(v) = &o.test_device {
        e.test_device = v.clone();
    }
    if let Some(v) = o.method {
        e.method = v;
    }
    if let Some(v) = o.pooling {
        e.pooling = v;
    }
    if let Some(v) = o.strategy {
        e.strategy = v;
    }
    if let Some(v) = o.normalization {
        e.normalization = v;
    }
    if let Some(v) = o.n_adapt {
        e.n_adapt = v;
    }
    if let Some(v) = o.k_augment {
        e.k_augment = v;
    }
    if let Some(v) = o.trials {
        e.n_trials = v;
    }
    if let Some(v) = o.epochs {
        e.train.epochs = v;
    }
    if let Some(v) = o.train_range {
        e.train_range = v;
    }
    if let Some(v) = o.test_range {
        e.test_range = v;
    }
    e.validate()?;
    e.train.validate()?;
    Ok(e)
}

fn print_summary(ds: &MeasurementDataset) -> anyhow::Result<()> {
    println!(
        "{:<16} {:<10} {:>8} {:>14}",
        "device", "runtime", "samples", "mean_latency_s"
    );
    for d in ds.devices() {
        let lat = ds.latencies(&d.id)?;
        let mean = lat.values().sum::<f64>() / lat.len().max(1) as f64;
        println!(
            "{:<16} {:<10} {:>8} {:>14.6}",
            d.id,
            d.runtime.to_string(),
            lat.len(),
            mean
        );
    }
    Ok(())
}

fn gen_pool(ctx: &RunContext) -> anyhow::Result<()> {
    let out = required_out(ctx)?;
    let spec = ctx.config.pool_spec();
    let pool = make_device_pool(&spec, ctx.seed)?;
    let ds = generate_dataset(&pool, ctx.config.dataset_range, &spec.macro_config()?)?;
    export_dataset(&ds, out).with_context(|| format!("writing {}", out.display()))?;
    print_summary(&ds)?;
    println!("seed {} -> {}", ctx.seed, out.display());
    Ok(())
}

fn import(ctx: &RunContext, input: &Path) -> anyhow::Result<()> {
    let ds = load_dataset(input)?;
    print_summary(&ds)?;
    if let Some(out) = &ctx.out {
        export_dataset(&ds, out).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn train(ctx: &RunContext, dataset: &Path, trial: usize, o: &Overrides) -> anyhow::Result<()> {
    let out = required_out(ctx)?;
    let ds = load_dataset(dataset)?;
    let exp = experiment(ctx, o)?;
    if trial >= exp.n_trials {
        return Err(config_error(format!(
            "trial {trial} outside the {} configured trials",
            exp.n_trials
        )));
    }
    let start = Instant::now();
    let t = train_trial(&ds, &exp, trial)?;
    save_model(&t.model, out).with_context(|| format!("writing {}", out.display()))?;
    println!("training devices: {}", t.training_devices.join(" "));
    println!("adaptation: {:?}", t.adaptation.arch_indices);
    println!(
        "rows {}  final log-mse {:.6}  wall time {:.1} s",
        t.n_rows,
        t.final_loss,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn predict(ctx: &RunContext, model: &Path, dataset: &Path, device: &str, archs: &[usize]) -> anyhow::Result<()> {
    let model = load_model(model).with_context(|| format!("reading model {}", model.display()))?;
    let ds = load_dataset(dataset)?;
    let rec = ds.device(device)?;
    let desc = match model.counter_mode() {
        CounterMode::Normalized => rec.descriptor.clone(),
        CounterMode::Raw => rec.raw(),
    };
    let arch_list = archs
        .iter()
        .map(|&a| architecture_from_index(a))
        .collect::<edgelat::Result<Vec<_>>>()?;
    let predicted = predict_many(&model, &arch_list, &desc)?;
    let truth = ds.latencies(device)?;

    let sink: Box<dyn Write> = match &ctx.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["arch_index", "predicted_s", "true_s", "within_bound"])?;
    for (&a, p) in archs.iter().zip(&predicted) {
        let (t, within) = match truth.get(&a) {
            Some(&t) => (
                t.to_string(),
                ((p - t).abs() <= (DEFAULT_BOUND + 1e-12) * t).to_string(),
            ),
            None => (String::new(), String::new()),
        };
        w.write_record([a.to_string(), p.to_string(), t, within])?;
    }
    w.flush()?;
    Ok(())
}

fn evaluate(ctx: &RunContext, dataset: &Path, pairs: Option<&Path>, o: &Overrides) -> anyhow::Result<()> {
    let ds = load_dataset(dataset)?;
    let exp = experiment(ctx, o)?;
    let report = run_experiment(&ds, &exp)?;
    print!("{}", format_report(&report));
    println!("seed {}  wall time {:.1} s", exp.seed, report.wall_time_s);
    emit(ctx.out.as_deref(), &write_report(&report))?;
    if let Some(p) = pairs {
        let mut w = csv::Writer::from_path(p).with_context(|| format!("creating {}", p.display()))?;
        w.write_record(["arch_index", "predicted_s", "true_s"])?;
        for pair in &report.pairs {
            w.write_record([
                pair.arch_index.to_string(),
                pair.predicted_s.to_string(),
                pair.true_s.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}
