use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use discern_core::classify::{misclassification, ClassifierModel};
use discern_core::io::{read_batch, write_batch};
use discern_core::summarize::{feature_vector, FEATURE_NAMES};
use discern_experiment::config::{parse_feature_list, ExperimentConfig, Process};
use discern_experiment::error::{Context, ExperimentError, Result};
use discern_experiment::report::{
    class_results, emit_scatter, read_features, write_features, FeatureRow, RateWithCi,
};
use discern_experiment::run::train_from_rows;
use discern_experiment::{render_table, Experiment, ExperimentReport};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "discern", version, about = "Tell regular point processes apart from single realizations")]
struct Cli {
    /// TOML configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (or file, for `features`, `train` and `scatter`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated feature subset.
    #[arg(long, global = true)]
    features: Option<String>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate realizations of one process into a batch directory.
    Simulate {
        #[arg(long)]
        process: String,
        #[arg(long)]
        n: usize,
    },
    /// Compute feature vectors of every realization below a directory.
    Features {
        #[arg(long)]
        input: PathBuf,
    },
    /// Train the configured classifier on a two-label feature table.
    Train {
        #[arg(long)]
        input: PathBuf,
    },
    /// Evaluate a trained model on a feature table.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Strauss against another process.
    Pair {
        #[arg(long)]
        process: Option<String>,
    },
    /// Two halves of one process against each other.
    Split {
        #[arg(long)]
        process: Option<String>,
    },
    /// Strauss against another process, five realizations per feature vector.
    Pooled {
        #[arg(long)]
        process: Option<String>,
    },
    /// Label plus two feature columns from a feature table.
    Scatter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "alpha,beta")]
        columns: String,
    },
}

fn load_config(cli: &Cli, process: Option<&str>) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(f) = &cli.features {
        c.features = parse_feature_list(f)?;
    }
    if let Some(p) = process {
        c.partner = p.parse()?;
    }
    c.validated()
}

fn out_path(cli: &Cli) -> Result<&Path> {
    cli.out
        .as_deref()
        .ok_or_else(|| ExperimentError::Config("--out is required".into()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

fn run_experiment(cli: &Cli, kind: &str, process: Option<&str>) -> Result<()> {
    let config = load_config(cli, process)?;
    let out = out_path(cli)?;
    let start = Instant::now();
    let mut exp = Experiment::new(config, out)?;
    let report: ExperimentReport = match kind {
        "pair" => exp.run_pair()?,
        "split" => exp.run_same_model_split()?,
        _ => exp.run_pooled()?,
    };
    let stem = format!("{kind}-{}", exp.config().partner);
    report.write(out, &stem)?;
    let timing = serde_json::json!({ "wall_clock_seconds": start.elapsed().as_secs_f64() });
    write_text(&out.join(format!("{stem}.timing.json")), &format!("{timing}\n"))?;
    let text = fs::read_to_string(out.join(format!("{stem}.json"))).map_err(|e| ExperimentError::io(out, e))?;
    print!("{}", render_table(&text)?);
    Ok(())
}

fn simulate(cli: &Cli, process: &str, n: usize) -> Result<()> {
    let process: Process = process.parse()?;
    let mut config = load_config(cli, None)?;
    if process != Process::Strauss {
        config.partner = process;
    }
    let out = out_path(cli)?;
    let mut exp = Experiment::new(config.clone(), out)?;
    let sim = exp.simulator(process)?;
    let (outer, inner) = (config.outer(), config.inner());
    let batch = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let seed = discern_core::seed::derive_seed(config.seed, process.tag(), i);
            sim.realize(&outer, &inner, seed)
                .map(|r| r.with_label(process.tag()))
                .context(|| format!("simulating {process} realization {i} (seed {seed})"))
        })
        .collect::<Result<Vec<_>>>()?;
    write_batch(out, process.tag(), &batch).context(|| out.display().to_string())?;
    println!("wrote {n} {process} realizations to {}", out.join(process.tag()).display());
    Ok(())
}

fn features(cli: &Cli, input: &Path) -> Result<()> {
    let out = out_path(cli)?;
    let batch = read_batch(input).context(|| input.display().to_string())?;
    let rows = batch
        .par_iter()
        .map(|r| {
            let features =
                feature_vector(r).context(|| format!("features of realization with seed {}", r.seed))?;
            Ok(FeatureRow {
                label: r.label.clone().unwrap_or_default(),
                seed: r.seed,
                features,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_features(out, &rows)?;
    println!("wrote {} feature rows to {}", rows.len(), out.display());
    Ok(())
}

fn train(cli: &Cli, input: &Path) -> Result<()> {
    let config = load_config(cli, None)?;
    let out = out_path(cli)?;
    let rows = read_features(input)?;
    let (model, labels) = train_from_rows(&config, &rows)?;
    let names: Vec<&str> = config.features.iter().map(String::as_str).collect();
    write_text(out, &model.to_text([&labels[0], &labels[1]], &names))?;
    println!("trained {} on {} rows ({} vs {})", config.classifier, rows.len(), labels[0], labels[1]);
    Ok(())
}

fn evaluate(cli: &Cli, input: &Path, model_path: &Path) -> Result<()> {
    let text = fs::read_to_string(model_path).map_err(|e| ExperimentError::io(model_path, e))?;
    let (model, labels, names): (ClassifierModel, _, _) =
        ClassifierModel::from_text(&text).context(|| model_path.display().to_string())?;
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            FEATURE_NAMES
                .iter()
                .position(|f| f == n)
                .ok_or_else(|| ExperimentError::Config(format!("model uses unknown feature {n:?}")))
        })
        .collect::<Result<_>>()?;
    let rows = read_features(input)?;
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for r in &rows {
        let class = labels.iter().position(|l| *l == r.label).ok_or_else(|| {
            ExperimentError::Config(format!("label {:?} not in model labels {labels:?}", r.label))
        })?;
        let a = r.features.to_array();
        let x: Vec<f64> = cols.iter().map(|&k| a[k]).collect();
        pred.push(model.predict(&x));
        truth.push(class);
    }
    let counts = misclassification(&pred, &truth).context(|| "counting misclassifications".into())?;
    let results = class_results([&labels[0], &labels[1]], &counts, &counts)?;
    let per_class: Vec<(&str, &RateWithCi)> = results.iter().map(|c| (c.label.as_str(), &c.test)).collect();
    for (label, r) in &per_class {
        println!("MR {label}: {}/{}  ({:.3}, {:.3})", r.misclassified, r.total, r.ci_lower, r.ci_upper);
    }
    if let Some(out) = &cli.out {
        let json = serde_json::json!({
            "model": model_path.display().to_string(),
            "input": input.display().to_string(),
            "classes": per_class.iter().map(|(l, r)| serde_json::json!({ "label": l, "test": r })).collect::<Vec<_>>(),
        });
        write_text(out, &format!("{}\n", serde_json::to_string_pretty(&json).expect("serializes")))?;
    }
    Ok(())
}

fn scatter(cli: &Cli, input: &Path, columns: &str) -> Result<()> {
    let cols: Vec<&str> = columns.split(',').map(str::trim).collect();
    let [a, b] = cols.as_slice() else {
        return Err(ExperimentError::Config(format!("--columns needs two names, got {columns:?}")));
    };
    let out = out_path(cli)?;
    let rows = read_features(input)?;
    emit_scatter(&rows, (a, b), out)?;
    println!("wrote {} scatter rows to {}", rows.len(), out.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { process, n } => simulate(cli, process, *n),
        Command::Features { input } => features(cli, input),
        Command::Train { input } => train(cli, input),
        Command::Evaluate { input, model } => evaluate(cli, input, model),
        Command::Pair { process } => run_experiment(cli, "pair", process.as_deref()),
        Command::Split { process } => run_experiment(cli, "split", process.as_deref()),
        Command::Pooled { process } => run_experiment(cli, "pooled", process.as_deref()),
        Command::Scatter { input, columns } => scatter(cli, input, columns),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("config error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .expect("global pool is configured once");
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
