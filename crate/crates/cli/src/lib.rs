//! Command-line orchestration for the `squeezeprobe` simulator: configuration,
//! subcommands and reproducible file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use squeezeprobe::hamiltonian::PerturbationOrder;
use squeezeprobe::states::polarization_factor;
use squeezeprobe::sweeps::Execution;

pub use commands::Command;
pub use config::RunConfig;
pub use error::{CliError, ConfigError};
pub use output::Manifest;

use output::{Constants, Derived};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: Command,
    pub config: RunConfig,
    /// Overrides `config.output_dir`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the hardware parallelism.
    pub threads: Option<usize>,
    /// Effective-Hamiltonian order; `None` uses the command's default.
    pub order: Option<u8>,
}

/// Runs one subcommand, writing its CSV files and `manifest.json`.
pub fn run(opts: &RunOptions) -> Result<Manifest, CliError> {
    let mut config = opts.config.clone();
    if let Some(dir) = &opts.out_dir {
        config.output_dir = dir.clone();
    }
    config.validate()?;
    let resolved = config.resolve()?;
    let order_number = opts.order.unwrap_or(opts.command.default_order());
    let order = PerturbationOrder::try_from(order_number)
        .map_err(|e| ConfigError::range("order", e.to_string()))?;
    std::fs::create_dir_all(&config.output_dir).map_err(|source| CliError::Io {
        path: config.output_dir.clone(),
        source,
    })?;

    let ctx = commands::Context {
        config: &config,
        resolved,
        order,
        out_dir: &config.output_dir,
        exec: Execution::Parallel,
    };
    let (files, diagnostics) = with_threads(opts.threads, || commands::execute(opts.command, &ctx))?;

    let manifest = Manifest {
        command: opts.command.name().to_string(),
        order: order_number,
        config: config.clone(),
        constants: Constants::default(),
        derived: Derived {
            omega0_rad_s: resolved.spec.omega0,
            omega_q_rad_s: resolved.spec.omega_q,
            nu_q_hz: resolved.spec.nu_q(),
            polarization_factor: polarization_factor(&resolved.env),
        },
        diagnostics,
        files,
    };
    manifest.write(&config.output_dir)?;
    Ok(manifest)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::ThreadPool(e.to_string()))?
            .install(f),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    if threads.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; running on one thread");
    }
    f()
}
