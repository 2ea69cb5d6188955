use clap::Parser;
use nanoflux_cli::{execute, Mode, Overrides};
use std::path::PathBuf;

/// Regularized fixed-point solver for stationary nanofluid convection.
#[derive(Debug, Parser)]
#[command(name = "nanoflux", version)]
struct Cli {
    mode: Mode,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monotone upwind transport in the fraction equation.
    #[arg(long)]
    upwind: bool,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NANOFLUX_LOG", "warn")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            log::warn!("cannot size the thread pool: {e}");
        }
    }
    let overrides = Overrides {
        out: cli.out,
        upwind: cli.upwind,
    };
    std::process::exit(execute(cli.mode, &cli.config, &overrides));
}
