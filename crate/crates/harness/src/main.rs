//! `uq` — train small classifiers and measure their predictive uncertainty.
//!
//! Subcommands: `train`, `sweep`, `report`, `calibration`, `synth`.
//! Exit codes: 0 success, 1 validation error, 2 IO/parse error, 3 training
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uq_core::data::{synth_aleatoric, write_canonical_csv};
use uq_core::nn::save_model;
use uq_core::uncertainty::{save_ensemble, Method};
use uq_core::{Error, Result};

use uq_harness::{
    load_dataset, prepare_method, reliability_for, report_uncertain, run_sweep,
    select_operating_point, train_method, write_loss_history_csv, write_manifest,
    write_reliability_csv, write_report_json, write_sweep_csv, ExperimentConfig, Manifest,
    ManifestEntry, OperatingPointCriterion, Overrides, SweepResult, TrainedArtifact,
};

#[derive(Parser)]
#[command(
    name = "uq",
    version,
    about = "Uncertainty quantification for small classifiers: MC-Dropout, MC-DropConnect and deep ensembles with a calibration-aware evaluation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model per configured method (ensembles train all members) and save them
    Train(RunArgs),
    /// Emit error/NLL/ECE curves over T = 1..samples for each method
    Sweep(RunArgs),
    /// Emit the top-k most uncertain test samples with per-size ensemble probabilities
    Report(RunArgs),
    /// Emit reliability curves at the best-accuracy and best-ECE operating points
    Calibration(RunArgs),
    /// Generate a synthetic crowd-labelled dataset as canonical CSV
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML); flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; fixes every number in every emitted file
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the run to one method
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Max stochastic passes / ensemble members
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct SynthArgs {
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Number of samples to generate
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 8)]
    classes: usize,
    /// Feature length; must be a perfect square and >= classes
    #[arg(long, default_value_t = 16)]
    input_dim: usize,
    /// Probability of a 6/4 two-class vote split
    #[arg(long, default_value_t = 0.3)]
    flip_rate: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Validation(_) | Error::Dimension(_) => 1,
        Error::Io(_) | Error::Parse { .. } | Error::Format(_) | Error::Json(_) => 2,
        Error::Training(_) => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
        Command::Calibration(args) => cmd_calibration(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.apply(&Overrides {
        seed: args.seed,
        out: args.out.clone(),
        method: args.method,
        samples: args.samples,
        epochs: args.epochs,
        batch_size: args.batch_size,
    });
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    Ok(config)
}

fn load_with_notice(config: &ExperimentConfig) -> Result<uq_core::data::Dataset> {
    let (dataset, skipped) = load_dataset(config)?;
    if skipped > 0 {
        eprintln!("note: skipped {skipped} rows with zero retained votes");
    }
    Ok(dataset)
}

fn cmd_train(args: RunArgs) -> Result<()> {
    let config = experiment_config(&args)?;
    let dataset = load_with_notice(&config)?;

    for &method in &config.methods {
        let artifact = train_method(&config, &dataset, method)?;
        match artifact {
            TrainedArtifact::Single {
                config: model_config,
                model,
            } => {
                let model_path = config.out_dir.join(format!("model_{method}.json"));
                save_model(&model_config, &model.params, &model_path)?;
                let loss_path = config.out_dir.join(format!("loss_{method}.csv"));
                write_loss_history_csv(&model.loss_history, &loss_path)?;
                println!("trained {method}: {}", model_path.display());
            }
            TrainedArtifact::Members(ensemble) => {
                let dir = config.out_dir.join("ensemble");
                save_ensemble(&ensemble, &dir)?;
                println!(
                    "trained {method} ({} members): {}",
                    ensemble.len(),
                    dir.display()
                );
            }
        }
    }
    Ok(())
}

fn cmd_sweep(args: RunArgs) -> Result<()> {
    let config = experiment_config(&args)?;
    let dataset = load_with_notice(&config)?;
    let sweeps: Vec<SweepResult> = run_sweep(&config, &dataset)?
        .into_iter()
        .map(|(_, sweep)| sweep)
        .collect();

    let csv_name = "sweep_curves.csv";
    write_sweep_csv(&sweeps, &config.out_dir.join(csv_name))?;

    let mut manifest = Manifest::new("sweep", config.master_seed);
    manifest.push(ManifestEntry {
        name: csv_name.to_string(),
        kind: "sweep-curves".to_string(),
        method: None,
        criterion: None,
        t: None,
    });
    write_manifest(&manifest, &config.out_dir.join("manifest.json"))?;
    println!(
        "wrote {} and manifest.json to {}",
        csv_name,
        config.out_dir.display()
    );
    Ok(())
}

fn cmd_report(args: RunArgs) -> Result<()> {
    let config = experiment_config(&args)?;
    let dataset = load_with_notice(&config)?;
    let prepared = prepare_method(&config, &dataset, Method::DeepEnsemble)?;
    let report = report_uncertain(&config, &dataset, &prepared)?;
    let path = config.out_dir.join("uncertain_report.json");
    write_report_json(&report, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_calibration(args: RunArgs) -> Result<()> {
    let config = experiment_config(&args)?;
    let dataset = load_with_notice(&config)?;

    let mut manifest = Manifest::new("calibration", config.master_seed);
    for (p, sweep) in &run_sweep(&config, &dataset)? {
        for criterion in [
            OperatingPointCriterion::BestAccuracy,
            OperatingPointCriterion::BestEce,
        ] {
            let t = select_operating_point(sweep, criterion)?;
            let (bins, _) = reliability_for(p, t, config.ece_bins)?;
            let name = format!("reliability_{}_{}.csv", p.method, criterion.name());
            write_reliability_csv(&bins, &config.out_dir.join(&name))?;
            manifest.push(ManifestEntry {
                name,
                kind: "reliability-curve".to_string(),
                method: Some(p.method.name().to_string()),
                criterion: Some(criterion.name().to_string()),
                t: Some(t),
            });
        }
    }
    write_manifest(&manifest, &config.out_dir.join("manifest.json"))?;
    println!(
        "wrote {} reliability curves and manifest.json to {}",
        manifest.files.len(),
        config.out_dir.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let dataset = synth_aleatoric(
        args.samples,
        args.classes,
        args.input_dim,
        args.flip_rate,
        args.seed,
    )?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_canonical_csv(&dataset, &args.out)?;
    println!("wrote {} samples to {}", dataset.len(), args.out.display());
    Ok(())
}
