use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use darcylab::experiment::{
    self, ExperimentConfig, ExperimentId, OutputFormat, PressureSelection, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "darcylab",
    version,
    about = "Condition numbers of block-preconditioned Darcy and Biot systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset (see `list-presets`) or a TOML configuration file.
    Run(RunArgs),
    /// List the built-in experiments.
    ListPresets,
    /// Print the configuration of a preset as TOML, a starting point for
    /// custom experiments.
    ShowConfig { preset: String },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Preset name or path to a configuration file.
    target: String,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pressure_mode: Option<Mode>,
    /// Also record preconditioned MINRES iteration counts.
    #[arg(long)]
    minres: bool,
    /// Finest allowed mesh exponent, replacing the desk-scale cap.
    #[arg(long)]
    max_h_exp: Option<u32>,
    /// Worker threads for the parameter grid.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the K (or K0) values, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    /// Override the mesh exponents e (h = 2^-e), comma separated.
    #[arg(long, value_delimiter = ',')]
    h_exp: Option<Vec<u32>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dg,
    ExactSchur,
    Both,
}

fn load_config(target: &str) -> Result<ExperimentConfig> {
    if let Ok(id) = target.parse::<ExperimentId>() {
        return Ok(ExperimentConfig::preset(id)?);
    }
    let path = Path::new(target);
    if !path.exists() {
        let names: Vec<_> = ExperimentId::PRESETS.iter().map(|p| p.name()).collect();
        bail!(
            "`{target}` is neither a preset ({}) nor a readable file",
            names.join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = load_config(&args.target)?;
    if let Some(f) = args.format {
        config.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Md => OutputFormat::Md,
        };
    }
    if let Some(m) = args.pressure_mode {
        config.pressure_mode = match m {
            Mode::Dg => PressureSelection::Dg,
            Mode::ExactSchur => PressureSelection::ExactSchur,
            Mode::Both => PressureSelection::Both,
        };
    }
    if args.minres {
        config.minres = true;
    }
    if let Some(k) = args.k {
        config.k_values = k;
    }
    if let Some(h) = args.h_exp {
        config.h_exponents = h;
    }
    let opts = RunOptions {
        jobs: args.jobs,
        max_h_exp: args.max_h_exp,
    };
    let output = experiment::run(&config, opts)
        .with_context(|| format!("experiment {} failed", config.experiment))?;
    let text = output.render(config.format);
    match args.out {
        Some(path) => {
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::ListPresets => {
            for id in ExperimentId::PRESETS {
                println!("{:<13} {}", id.name(), id.description());
            }
            Ok(())
        }
        Command::ShowConfig { preset } => {
            let id: ExperimentId = preset.parse()?;
            print!("{}", ExperimentConfig::preset(id)?.to_toml());
            Ok(())
        }
    }
}
