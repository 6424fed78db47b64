use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use squeezeprobe_cli::{run, Command, RunConfig, RunOptions};

/// Spin-squeezing simulations for quadrupolar nuclei.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Command,

    /// JSON configuration file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set eta=1` or `--set T2.omegaQ_inv=0.4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: hardware parallelism).
    #[arg(long)]
    threads: Option<usize>,

    /// Effective Hamiltonian order, 1 or 2.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: Option<u8>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = match RunConfig::load(args.config.as_deref(), &args.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let opts = RunOptions {
        command: args.command,
        config,
        out_dir: args.out,
        threads: args.threads,
        order: args.order,
    };
    match run(&opts) {
        Ok(manifest) => {
            for f in &manifest.files {
                log::info!("wrote {} ({} rows)", f.name, f.rows);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
