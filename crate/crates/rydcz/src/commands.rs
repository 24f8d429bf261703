//! The `pulse-dump`, `sweep`, `qpt` and `qec` pipelines.
//!
//! Each `compute_*` function is pure; the matching `write_*` function turns
//! its result into files.

use rayon::prelude::*;
use rydcz_core::basis::TwoAtomBasis;
use rydcz_core::metrics::{evaluate_cell, SweepCell, SweepGrid};
use rydcz_core::model::{self, cd_amplitudes, max_cd_amplitude};
use rydcz_core::propagate::{full_propagator, propagate};
use rydcz_core::qec::{
    cnot_deviation, density_matrix_deviation, physical_cnot, run_code, CodeOutcome,
    Configuration,
};
use rydcz_core::tomography::{
    best_convention, gate_tomography, min_eigenvalue, pauli_label, process_from_propagator,
    trace, GateTomography, TargetConvention,
};
use rydcz_core::units::angular_to_mhz;
use rydcz_core::{DriveMode, ModelParams, PropagationConfig, PulseSchedule};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{complex_table, jnum, num, real_table, Csv, OutputDir};
use crate::RunError;

/// Worker pool of `jobs` threads (0: one per logical CPU).
pub fn pool(jobs: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| RunError::Validation(format!("cannot start {jobs} worker threads: {e}")))
}

/// Warning for oscillating modes whose `ω` does not exceed the largest
/// `|f_k|` of `schedule`, where the averaging argument breaks down.
pub fn frequency_warning(model: &ModelParams, schedule: &PulseSchedule) -> Option<String> {
    if !model.drive_mode.is_oscillating() {
        return None;
    }
    let f = max_cd_amplitude(schedule, 4000);
    (model.ecd_frequency < f).then(|| {
        format!(
            "ω/2π = {:.1} MHz is below max|f_k|/2π = {:.1} MHz at T_tot = {} μs; \
             the oscillating field will not average to the CD term",
            angular_to_mhz(model.ecd_frequency),
            angular_to_mhz(f),
            schedule.total_time()
        )
    })
}

// ---- pulse-dump ----------------------------------------------------------

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PulseDumpOptions {
    pub trajectory: bool,
    pub dump_hamiltonian: bool,
}

pub fn write_pulse_dump(
    config: &RunConfig,
    options: PulseDumpOptions,
    out: &mut OutputDir,
) -> Result<(), RunError> {
    let hash = config.hash();
    let schedule = config.schedule()?;
    let n = config.output.pulse_samples;
    let total = schedule.total_time();
    let mut csv = Csv::new(
        &hash,
        &["frequencies are f = ω/2π in MHz, times in μs"],
        &["t_us", "omega_mhz", "delta_mhz", "f0_mhz", "f1_mhz"],
    );
    for k in 0..n {
        let t = total * k as f64 / (n - 1) as f64;
        let s = schedule.sample(t)?;
        let (f0, f1) = cd_amplitudes(&s);
        csv.row(&[
            num(t),
            num(angular_to_mhz(s.omega)),
            num(angular_to_mhz(s.delta)),
            num(angular_to_mhz(f0)),
            num(angular_to_mhz(f1)),
        ]);
    }
    out.write("pulses.csv", &csv.finish())?;

    let model = config.model_params();
    if options.trajectory {
        let case = config.benchmark_case()?;
        let prop = PropagationConfig {
            trajectory_samples: config.output.trajectory_samples.max(2),
            ..config.propagation_config()
        };
        let result = propagate(&model, &schedule, &prop, &case.initial)?;
        let mut header = vec!["t_us".to_string()];
        header.extend((0..9).map(|i| format!("p_{}", TwoAtomBasis::label(i))));
        header.push("norm".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let comment = format!(
            "initial state {}, drive mode {}",
            case.label,
            model.drive_mode.name()
        );
        let mut csv = Csv::new(&hash, &[&comment], &header);
        for (t, psi) in &result.trajectory {
            let mut row = vec![num(*t)];
            row.extend(psi.iter().map(|z| num(z.norm_sqr())));
            row.push(num(psi.norm()));
            csv.row(&row);
        }
        out.write("trajectory.csv", &csv.finish())?;
    }
    if options.dump_hamiltonian {
        let m = config.output.hamiltonian_samples;
        let mut samples = Vec::with_capacity(m);
        for k in 0..m {
            let t = if m == 1 {
                0.5 * total
            } else {
                total * k as f64 / (m - 1) as f64
            };
            let h = model::hamiltonian(&model, &schedule, t)?;
            samples.push(json!({ "t_us": t, "hamiltonian": complex_table(&h) }));
        }
        let basis: Vec<&str> = (0..9).map(TwoAtomBasis::label).collect();
        let doc = json!({
            "config_hash": hash,
            "drive_mode": model.drive_mode.name(),
            "units": "rad/us",
            "basis": basis,
            "samples": samples,
        });
        out.write_json("hamiltonian.json", &doc)?;
    }
    Ok(())
}

// ---- sweep ---------------------------------------------------------------

/// Parallel version of [`rydcz_core::metrics::run_sweep`]; the cell order
/// and values do not depend on the number of workers.
pub fn compute_sweep(config: &RunConfig, jobs: usize) -> Result<SweepGrid, RunError> {
    let spec = config.sweep_spec();
    spec.validate()?;
    let setup = config.cell_setup()?;
    let cells: Vec<SweepCell> = pool(jobs)?.install(|| {
        (0..spec.len())
            .into_par_iter()
            .map(|i| {
                let (total_time, blockade) = spec.cell(i);
                SweepCell {
                    total_time,
                    blockade,
                    outcome: evaluate_cell(&setup, total_time, blockade),
                }
            })
            .collect()
    });
    Ok(SweepGrid::from_cells(&spec, setup.model.drive_mode, cells)?)
}

pub fn write_sweep(config: &RunConfig, grid: &SweepGrid, out: &mut OutputDir) -> Result<(), RunError> {
    let hash = config.hash();
    let mut csv = Csv::new(
        &hash,
        &[&format!(
            "drive mode {}, case {}; phase_error is |phi_e|/pi; NaN marks a failed cell",
            grid.drive_mode.name(),
            config.sweep.case
        )],
        &["T_tot_us", "V_MHz", "infidelity", "phase_error", "leakage"],
    );
    // the configured MHz values, not a round trip through 2π
    let blockades_mhz = config.sweep.blockade_mhz.values();
    let mut failures = Vec::new();
    for (i, cell) in grid.cells.iter().enumerate() {
        let v = blockades_mhz[i % blockades_mhz.len()];
        match &cell.outcome {
            Ok(m) => csv.row(&[
                num(cell.total_time),
                num(v),
                num(m.infidelity),
                num(m.phase_error.unwrap_or(f64::NAN)),
                num(m.leakage),
            ]),
            Err(e) => {
                csv.row(&[num(cell.total_time), num(v), num(f64::NAN), num(f64::NAN), num(f64::NAN)]);
                failures.push(json!({
                    "T_tot_us": cell.total_time,
                    "V_MHz": v,
                    "error": e.to_string(),
                }));
            }
        }
    }
    out.write("sweep.csv", &csv.finish())?;
    let sidecar = json!({
        "config_hash": hash,
        "config": config,
        "config_toml": config.to_toml(),
        "drive_mode": grid.drive_mode.name(),
        "case": config.sweep.case,
        "total_times_us": grid.total_times,
        "blockades_mhz": blockades_mhz,
        "cells": grid.cells.len(),
        "failures": failures,
    });
    out.write_json("sweep.json", &sidecar)?;
    Ok(())
}

// ---- qpt -----------------------------------------------------------------

/// Tomography under the configured convention; with `best` both conventions
/// are run and the better one comes first.
pub fn compute_qpt(config: &RunConfig) -> Result<Vec<GateTomography>, RunError> {
    let schedule = config.schedule()?;
    let u = full_propagator(&config.model_params(), &schedule, &config.propagation_config())?;
    Ok(match config.qpt.convention.fixed() {
        Some(c) => vec![gate_tomography(&u, c)?],
        None => best_convention(&u)?.into(),
    })
}

pub fn write_qpt(config: &RunConfig, runs: &[GateTomography], out: &mut OutputDir) -> Result<(), RunError> {
    let hash = config.hash();
    let best = &runs[0];
    let labels: Vec<String> = (0..16).map(pauli_label).collect();
    let others: Vec<Value> = runs[1..]
        .iter()
        .map(|g| {
            json!({
                "convention": g.convention.name(),
                "max_abs_delta_chi": jnum(g.deviation.max()),
            })
        })
        .collect();
    let doc = json!({
        "config_hash": hash,
        "drive_mode": config.model.drive_mode.name(),
        "total_time_us": config.pulses.total_time_us,
        "blockade_mhz": config.model.blockade_mhz,
        "ecd_frequency_mhz": config.model.ecd_frequency_mhz(),
        "convention": best.convention.name(),
        "max_abs_delta_chi": jnum(best.deviation.max()),
        "other_conventions": others,
        "trace_loss": jnum(best.trace_loss),
        "chi_trace": jnum(trace(&best.chi)),
        "chi_min_eigenvalue": jnum(min_eigenvalue(&best.chi)),
        "chi_hermiticity_defect": jnum(best.hermiticity_defect),
        "basis": labels,
        "basis_order": "index 4j+k is sigma_j (x) sigma_k with sigma = (I, X, Y, Z)",
        "kraus": complex_table(&best.kraus),
        "chi": complex_table(&best.chi),
        "chi_reference": complex_table(&best.reference),
        "delta_chi_magnitude": real_table(&best.deviation.magnitude),
        "delta_chi_phase": real_table(&best.deviation.phase),
    });
    out.write_json("qpt.json", &doc)?;

    let comment = format!(
        "|chi - chi_target| against the {} target; rows (i, j) in row-major (I,X,Y,Z)x(I,X,Y,Z) order; phase NaN where |delta| <= 1e-12",
        best.convention.name()
    );
    let mut csv = Csv::new(&hash, &[&comment], &["i", "j", "label_i", "label_j", "magnitude", "phase"]);
    for i in 0..16 {
        for j in 0..16 {
            csv.row(&[
                i.to_string(),
                j.to_string(),
                labels[i].clone(),
                labels[j].clone(),
                num(best.deviation.magnitude[(i, j)]),
                num(best.deviation.phase[(i, j)]),
            ]);
        }
    }
    out.write("qpt_delta_chi.csv", &csv.finish())?;
    Ok(())
}

// ---- qec -----------------------------------------------------------------

/// The code run with one physical gate.
#[derive(Clone, Debug)]
pub struct GateRun {
    pub drive_mode: DriveMode,
    pub cnot_deviation: f64,
    /// All six configurations, flip-free first.
    pub outcomes: Vec<(Configuration, Result<CodeOutcome, rydcz_core::Error>)>,
}

impl GateRun {
    /// Fidelities of the five-configuration suite, in order; `None` if a
    /// run in the suite failed.
    pub fn suite_fidelities(&self) -> Option<Vec<f64>> {
        self.outcomes
            .iter()
            .filter(|(c, _)| !c.is_excluded())
            .map(|(_, o)| o.as_ref().ok().map(|o| o.fidelity))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct QecResults {
    pub gate: GateRun,
    pub adiabatic: Option<GateRun>,
}

fn gate_run(model: &ModelParams, schedule: &PulseSchedule, prop: &PropagationConfig) -> Result<GateRun, RunError> {
    let u = full_propagator(model, schedule, prop)?;
    let cnot = physical_cnot(&process_from_propagator(&u), TargetConvention::Native);
    let outcomes = Configuration::all()
        .into_par_iter()
        .map(|c| (c, run_code(&c.input.vector(), c.flip, &cnot)))
        .collect();
    Ok(GateRun {
        drive_mode: model.drive_mode,
        cnot_deviation: cnot_deviation(&cnot),
        outcomes,
    })
}

pub fn compute_qec(config: &RunConfig, jobs: usize) -> Result<QecResults, RunError> {
    let schedule = config.schedule()?;
    let prop = config.propagation_config();
    let model = config.qec_model();
    let baseline = ModelParams {
        drive_mode: DriveMode::Adiabatic,
        ..model
    };
    pool(jobs)?.install(|| {
        let (gate, adiabatic) = rayon::join(
            || gate_run(&model, &schedule, &prop),
            || {
                config
                    .qec
                    .adiabatic_baseline
                    .then(|| gate_run(&baseline, &schedule, &prop))
                    .transpose()
            },
        );
        Ok(QecResults {
            gate: gate?,
            adiabatic: adiabatic?,
        })
    })
}

fn gate_run_json(run: &GateRun) -> Value {
    let configurations: Vec<Value> = run
        .outcomes
        .iter()
        .map(|(c, outcome)| {
            let mut entry = json!({
                "label": c.label(),
                "input": c.input.label(),
                "flip": c.flip,
                "excluded": c.is_excluded(),
            });
            match outcome {
                Ok(o) => {
                    let psi = c.input.vector();
                    let (mag, phase) = density_matrix_deviation(&o.recovered, &(psi * psi.adjoint()));
                    entry["fidelity"] = jnum(o.fidelity);
                    entry["leakage"] = jnum(o.leakage);
                    entry["recovered"] = complex_table(&o.recovered);
                    entry["delta_rho_magnitude"] = real_table(&mag);
                    entry["delta_rho_phase"] = real_table(&phase);
                    entry["max_abs_delta_rho"] = jnum(mag.max());
                }
                Err(e) => entry["error"] = json!(e.to_string()),
            }
            entry
        })
        .collect();
    let suite = run.suite_fidelities();
    json!({
        "drive_mode": run.drive_mode.name(),
        "cnot_deviation": jnum(run.cnot_deviation),
        "suite_min_fidelity": suite.as_ref().map(|f| jnum(f.iter().cloned().fold(f64::INFINITY, f64::min))),
        "suite_mean_fidelity": suite.as_ref().map(|f| jnum(f.iter().sum::<f64>() / f.len() as f64)),
        "configurations": configurations,
    })
}

pub fn write_qec(config: &RunConfig, results: &QecResults, out: &mut OutputDir) -> Result<(), RunError> {
    let hash = config.hash();
    let doc = json!({
        "config_hash": hash,
        "total_time_us": config.pulses.total_time_us,
        "blockade_mhz": config.model.blockade_mhz,
        "ecd_frequency_mhz": config.qec.ecd_frequency_mhz,
        "gate": gate_run_json(&results.gate),
        "adiabatic": results.adiabatic.as_ref().map(gate_run_json),
    });
    out.write_json("qec.json", &doc)?;

    let fidelity = |run: Option<&GateRun>, c: Configuration| {
        run.and_then(|r| r.outcomes.iter().find(|(k, _)| *k == c))
            .and_then(|(_, o)| o.as_ref().ok())
            .map_or(f64::NAN, |o| o.fidelity)
    };
    let comment = format!(
        "five-configuration suite; gate drive mode {}; NaN marks a missing run",
        results.gate.drive_mode.name()
    );
    let mut csv = Csv::new(&hash, &[&comment], &["configuration", "fidelity_ecd", "fidelity_adiabatic"]);
    for c in Configuration::suite() {
        csv.row(&[
            c.label(),
            num(fidelity(Some(&results.gate), c)),
            num(fidelity(results.adiabatic.as_ref(), c)),
        ]);
    }
    out.write("qec_summary.csv", &csv.finish())?;
    Ok(())
}
