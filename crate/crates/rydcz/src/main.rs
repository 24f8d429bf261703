use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rydcz::config::{parse_config, RunConfig};
use rydcz::{dispatch, Command, PulseDumpOptions, RunError, OUTPUT_DIR_ENV};

/// Simulate the two-atom Rydberg controlled-phase gate.
///
/// All frequencies in configuration files are plain frequencies in MHz
/// (ω = 2π·f internally); all times are in μs.
#[derive(Parser, Debug)]
#[command(name = "rydcz", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration; defaults are used for everything it omits.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(short, long, env = OUTPUT_DIR_ENV)]
    output: Option<PathBuf>,
    /// Worker threads; 0 uses one per logical CPU.
    #[arg(short, long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Write Ω, Δ and the CD amplitudes f0, f1 on a uniform time grid.
    PulseDump {
        #[command(flatten)]
        common: Common,
        /// Also propagate the benchmark state and write its populations.
        #[arg(long)]
        trajectory: bool,
        /// Also write the Hamiltonian at a few times as JSON.
        #[arg(long)]
        dump_hamiltonian: bool,
    },
    /// Infidelity, phase error and leakage on a (T_tot, V) grid.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Process tomography of the simulated gate.
    Qpt {
        #[command(flatten)]
        common: Common,
    },
    /// Three-qubit bit-flip code with CNOTs built from the simulated gate.
    Qec {
        #[command(flatten)]
        common: Common,
    },
    /// Run the invariant suite; exits nonzero if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<(), RunError> {
    let (command, common) = match cli.command {
        Sub::PulseDump {
            common,
            trajectory,
            dump_hamiltonian,
        } => (
            Command::PulseDump(PulseDumpOptions {
                trajectory,
                dump_hamiltonian,
            }),
            common,
        ),
        Sub::Sweep { common } => (Command::Sweep, common),
        Sub::Qpt { common } => (Command::Qpt, common),
        Sub::Qec { common } => (Command::Qec, common),
        Sub::Verify { common } => (Command::Verify, common),
    };
    let config = match &common.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    let output = common
        .output
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));
    let report = dispatch(command, &config, &output, common.jobs)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for line in &report.lines {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
