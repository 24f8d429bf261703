//! Configuration, result files, parallel sweeps and the `rydcz` command
//! line on top of [`rydcz_core`].

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

pub use commands::PulseDumpOptions;
use config::{ConfigError, RunConfig};
use output::OutputDir;

/// Environment variable that overrides `output.directory`.
pub const OUTPUT_DIR_ENV: &str = "RYDCZ_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(rydcz_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl From<rydcz_core::Error> for RunError {
    fn from(e: rydcz_core::Error) -> Self {
        match e {
            rydcz_core::Error::InvalidParameter { .. } | rydcz_core::Error::NotNormalized { .. } => {
                RunError::Validation(e.to_string())
            }
            _ => RunError::Numerical(e),
        }
    }
}

impl RunError {
    /// 1 for bad input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Validation(_) | RunError::Io(_) => 1,
            RunError::Numerical(_) | RunError::VerifyFailed { .. } => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    PulseDump(PulseDumpOptions),
    Sweep,
    Qpt,
    Qec,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PulseDump(_) => "pulse-dump",
            Command::Sweep => "sweep",
            Command::Qpt => "qpt",
            Command::Qec => "qec",
            Command::Verify => "verify",
        }
    }
}

/// What a finished command reports back to the caller.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

/// Runs `command`, writing its files (and `manifest.json`) under
/// `output_dir`. `verify` writes nothing and fails with
/// [`RunError::VerifyFailed`] if any check fails.
pub fn dispatch(
    command: Command,
    config: &RunConfig,
    output_dir: &std::path::Path,
    jobs: usize,
) -> Result<Report, RunError> {
    let start = Instant::now();
    let mut report = Report::default();
    if let Command::Verify = command {
        let checks = verify::run_verify(config)?;
        let failed = checks.iter().filter(|c| !c.passed()).count();
        report.lines = checks.iter().map(|c| c.to_string()).collect();
        if failed > 0 {
            for line in &report.lines {
                eprintln!("{line}");
            }
            return Err(RunError::VerifyFailed {
                failed,
                total: checks.len(),
            });
        }
        return Ok(report);
    }

    let schedule = config.schedule()?;
    let mut out = OutputDir::create(output_dir)?;
    match command {
        Command::PulseDump(options) => commands::write_pulse_dump(config, options, &mut out)?,
        Command::Sweep => {
            let spec = config.sweep_spec();
            let shortest = spec.total_times.iter().cloned().fold(f64::INFINITY, f64::min);
            let fast = rydcz_core::PulseSchedule::new(
                config.pulse_params().with_total_time(shortest),
                config.pulses.detuning_shape,
            )?;
            report.warnings.extend(commands::frequency_warning(&config.model_params(), &fast));
            let grid = commands::compute_sweep(config, jobs)?;
            let failed = grid.cells.iter().filter(|c| c.outcome.is_err()).count();
            if failed > 0 {
                report
                    .warnings
                    .push(format!("{failed} of {} sweep cells failed; see sweep.json", grid.cells.len()));
            }
            commands::write_sweep(config, &grid, &mut out)?;
        }
        Command::Qpt => {
            report
                .warnings
                .extend(commands::frequency_warning(&config.model_params(), &schedule));
            let runs = commands::compute_qpt(config)?;
            report.lines.push(format!(
                "max |delta chi| = {:.3e} ({} target)",
                runs[0].deviation.max(),
                runs[0].convention.name()
            ));
            commands::write_qpt(config, &runs, &mut out)?;
        }
        Command::Qec => {
            report
                .warnings
                .extend(commands::frequency_warning(&config.qec_model(), &schedule));
            let results = commands::compute_qec(config, jobs)?;
            if let Some(f) = results.gate.suite_fidelities() {
                report.lines.push(format!(
                    "minimum suite fidelity {:.6}",
                    f.iter().cloned().fold(f64::INFINITY, f64::min)
                ));
            }
            commands::write_qec(config, &results, &mut out)?;
        }
        Command::Verify => unreachable!(),
    }
    let wall = start.elapsed().as_secs_f64();
    out.write_manifest(command.name(), &config.hash(), wall, &report.warnings)?;
    report.files = out.written().to_vec();
    Ok(report)
}
