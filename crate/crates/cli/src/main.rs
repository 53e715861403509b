use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hartman::experiment::{self, ExperimentConfig, ExperimentKind};
use hartman::Error;

#[derive(Parser)]
#[command(name = "hartman", version, about = "Tunnelling-time experiments on symmetric 1D barriers")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: `output` from the config, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Verb {
    /// Stationary amplitudes over the spectral grid.
    Amplitudes,
    /// Exact and asymptotic group times.
    Times,
    /// Centre-of-mass traces of the transmitted and free packets.
    PacketTrace,
    /// Clock times against barrier width.
    HartmanSweep,
    /// Larmor clock readings and the spinor simulation.
    Larmor,
    /// Run a named configuration, or print it with --print.
    Preset {
        name: String,
        /// Print the configuration as TOML and exit.
        #[arg(long)]
        print: bool,
    },
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_config() {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        hartman::parallel::configure_threads(n);
    }
    let (cfg, kind) = match cli.verb {
        Verb::Preset { name, print } => {
            let cfg = experiment::preset(&name)?;
            if print {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            let kind = experiment::default_experiment(&name)?;
            (cfg, kind)
        }
        verb => {
            let path = cli
                .common
                .config
                .as_ref()
                .ok_or_else(|| Error::Config("--config is required".into()))?;
            let cfg = ExperimentConfig::load(path)?;
            let requested = match verb {
                Verb::Amplitudes => ExperimentKind::Amplitudes,
                Verb::Times => ExperimentKind::Times,
                Verb::PacketTrace => ExperimentKind::PacketTrace,
                Verb::HartmanSweep => ExperimentKind::HartmanSweep,
                Verb::Larmor => ExperimentKind::Larmor,
                Verb::Preset { .. } => unreachable!(),
            };
            let kind = cfg.select(Some(requested))?;
            (cfg, kind)
        }
    };
    let out = cli
        .common
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = experiment::run(&cfg, kind, &out)?;
    for (key, value) in &report.summary {
        println!("{key} = {}", experiment::output::fmt(*value));
    }
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
