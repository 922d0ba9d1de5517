use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use matterwave_cli::{config, plot, runner, CliResult};

#[derive(Parser)]
#[command(
    name = "mwsim",
    version,
    about = "Matter-wave optics scenarios: four-wave mixing, parametric amplification, holography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the config's `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reserved; no stochastic paths exist yet. Recorded in the manifest.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (or sweep) and write CSVs plus a manifest.
    Run { config: PathBuf },
    /// Render a figure (fig1, fig2, g212) from a manifest.
    Plot { manifest: PathBuf, figure: String },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => {
            let workers = cli
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let options = runner::RunOptions {
                out: cli.out,
                workers,
                seed: cli.seed,
            };
            let (path, manifest) = runner::run(&config, &options)?;
            for o in &manifest.outputs {
                println!("wrote {}", o.file);
            }
            println!("manifest {}", path.display());
        }
        Command::Plot { manifest, figure } => {
            let path = plot::plot(&manifest, &figure, cli.out.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = config::load(&config)?;
            println!(
                "{}: {} scenario `{}`, {} run(s)",
                config.display(),
                cfg.kind.block(),
                cfg.name,
                cfg.jobs.len()
            );
            for job in &cfg.jobs {
                println!("  {}", job.stem);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
