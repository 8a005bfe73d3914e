use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dbicm::commands;
use dbicm::config::{
    merge, CapacityOptions, ConfigError, DesignCodeOptions, DumpOptions, OptimizeDelayOptions, SimulateOptions,
};

/// Delayed bit-interleaved coded modulation toolkit.
///
/// Options may also come from a TOML file given with --config, using the
/// flag names as keys (e.g. `tol-db = 0.01`). Flags win over the file.
/// DBICM_THREADS sets the number of worker threads.
#[derive(Parser)]
#[command(name = "dbicm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-bit, DBICM and coded-modulation capacities over an SNR grid
    Capacity {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: CapacityOptions,
    },
    /// Search the delay scheme that needs the least SNR at a rate
    OptimizeDelay {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: OptimizeDelayOptions,
    },
    /// Optimize and construct an LDPC code for a delay scheme
    DesignCode {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: DesignCodeOptions,
    },
    /// Bit error rate simulation of a code over the delayed channel
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: SimulateOptions,
    },
    /// Points and labels of a constellation as CSV
    DumpConstellation {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        opts: DumpOptions,
    },
}

fn threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("DBICM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("DBICM_THREADS must be a positive integer, not '{v}'")))?;
    if n == 0 {
        return Err(ConfigError("DBICM_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(e.to_string()))
}

fn run(cmd: Command) -> anyhow::Result<Vec<PathBuf>> {
    threads()?;
    match cmd {
        Command::Capacity { config, opts } => {
            let cfg = merge(config.as_deref(), opts, CapacityOptions::overlay)?.resolve()?;
            commands::capacity(&cfg)
        }
        Command::OptimizeDelay { config, opts } => {
            let cfg = merge(config.as_deref(), opts, OptimizeDelayOptions::overlay)?.resolve()?;
            commands::optimize_delay(&cfg)
        }
        Command::DesignCode { config, opts } => {
            let cfg = merge(config.as_deref(), opts, DesignCodeOptions::overlay)?.resolve()?;
            commands::design_code(&cfg)
        }
        Command::Simulate { config, opts } => {
            let cfg = merge(config.as_deref(), opts, SimulateOptions::overlay)?.resolve()?;
            commands::simulate(&cfg)
        }
        Command::DumpConstellation { config, opts } => {
            let cfg = merge(config.as_deref(), opts, DumpOptions::overlay)?.resolve()?;
            commands::dump_constellation(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
