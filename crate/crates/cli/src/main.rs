use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pwdiag::experiments::{self, ExperimentConfig, THREADS_ENV};
use pwdiag::Error;

/// Piecewise-polynomial diagonal unitaries: synthesis, gate counts, dynamics.
#[derive(Parser)]
#[command(name = "pwdiag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gate counts and errors over an (epsilon, tau) sweep.
    Ne1(Source),
    /// Split-step wave-packet dynamics with the synthesized potential.
    Ne2(Source),
    /// Predicted and synthesized gate counts with crossover points.
    Counts(Source),
    /// Write the synthesized circuit as text.
    ExportCircuit(Source),
}

#[derive(Args)]
struct Source {
    /// TOML experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Builtin configuration: cos-ne1, eckart-ne2, gauss3-ne2.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

impl Source {
    fn load(
        &self,
        default: impl FnOnce() -> Result<ExperimentConfig, Error>,
    ) -> Result<ExperimentConfig, Error> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::from_file(path),
            (None, Some(name)) => ExperimentConfig::preset(name),
            (None, None) => default(),
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Error> {
    let (source, driver): (&Source, fn(&ExperimentConfig, &std::path::Path) -> pwdiag::Result<Vec<PathBuf>>) =
        match &cli.command {
            Command::Ne1(s) => (s, experiments::run_ne1),
            Command::Ne2(s) => (s, experiments::run_ne2),
            Command::Counts(s) => (s, experiments::run_gatecount),
            Command::ExportCircuit(s) => (s, experiments::export_circuit),
        };
    let cfg = source.load(|| match cli.command {
        Command::Counts(_) => Ok(experiments::reference_counts_config()),
        _ => Err(Error::Config("give --config <path> or --preset <name>".into())),
    })?;
    let out = source.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    if let Some(t) = source.threads {
        // the library reads the thread count from the environment
        std::env::set_var(THREADS_ENV, t.to_string());
    }
    experiments::with_thread_pool(|| driver(&cfg, &out))?
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
