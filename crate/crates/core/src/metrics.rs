//! Gate-quality measures and `(T_tot, V)` sweeps.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Vector2, Vector3};
use num_traits::Float;

use crate::basis::TwoAtomBasis;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, real, TwoAtomState, C64, ONE};
use crate::model::{blockade_block, DriveMode, ModelParams, TwoLevelBlock};
use crate::propagate::{
    evolve_dense, full_propagator, propagate, Method, PropagationConfig, PropagationResult,
};
use crate::pulses::{DetuningShape, Phase, PulseParams, PulseSchedule};

/// Initial state and the state an ideal gate maps it to.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkCase {
    pub label: String,
    pub initial: TwoAtomState,
    pub target: TwoAtomState,
}

/// The protocol's native gate on the qubit subspace, `diag(1, −1, −1, −1)`.
pub const NATIVE_PHASES: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

impl BenchmarkCase {
    pub fn new(label: impl Into<String>, initial: TwoAtomState, target: TwoAtomState) -> Result<Self> {
        for v in [&initial, &target] {
            let norm = v.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized { norm });
            }
        }
        Ok(BenchmarkCase {
            label: label.into(),
            initial,
            target,
        })
    }

    /// Target obtained by applying the native gate to `initial`, which must
    /// lie in the qubit subspace.
    pub fn native_gate(label: impl Into<String>, initial: TwoAtomState) -> Result<Self> {
        let mut target = TwoAtomState::zeros();
        let mut inside = 0.0;
        for (k, &i) in TwoAtomBasis::COMPUTATIONAL.iter().enumerate() {
            target[i] = initial[i] * NATIVE_PHASES[k];
            inside += initial[i].norm_sqr();
        }
        if (inside - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("initial", "must lie in the qubit subspace"));
        }
        Self::new(label, initial, target)
    }

    /// `(|00⟩ + |11⟩)/√2 → (|00⟩ − |11⟩)/√2`.
    pub fn bell() -> Self {
        let mut psi = TwoAtomState::zeros();
        psi[TwoAtomBasis::S00] = real(FRAC_1_SQRT_2);
        psi[TwoAtomBasis::S11] = real(FRAC_1_SQRT_2);
        Self::native_gate("bell", psi).expect("bell state is normalized")
    }

    /// A computational basis state, e.g. `"11"`.
    pub fn basis(label: &str) -> Result<Self> {
        let index = TwoAtomBasis::parse(label)
            .filter(|i| TwoAtomBasis::is_computational(*i))
            .ok_or_else(|| Error::invalid("case", alloc::format!("unknown qubit state {label:?}")))?;
        Self::native_gate(TwoAtomBasis::label(index), TwoAtomBasis::ket(index))
    }

    /// `"bell"` or a qubit basis label.
    pub fn parse(label: &str) -> Result<Self> {
        if label == "bell" {
            Ok(Self::bell())
        } else {
            Self::basis(label)
        }
    }
}

/// `1 − |⟨ψ_target|ψ⟩|²`.
pub fn state_infidelity(psi: &TwoAtomState, target: &TwoAtomState) -> f64 {
    (1.0 - target.dotc(psi).norm_sqr()).clamp(0.0, 1.0)
}

pub fn infidelity(result: &PropagationResult, case: &BenchmarkCase) -> f64 {
    state_infidelity(&result.final_state, &case.target)
}

/// Population outside the qubit subspace.
pub fn leakage(psi: &TwoAtomState) -> f64 {
    let inside: f64 = TwoAtomBasis::COMPUTATIONAL
        .iter()
        .map(|&i| psi[i].norm_sqr())
        .sum();
    (psi.norm_squared() - inside).clamp(0.0, 1.0)
}

/// Signed `φ_e = π − |arg⟨11|ψ⟩|`, phases referenced to `|00⟩`.
pub fn phase_deviation(psi: &TwoAtomState) -> Result<f64> {
    let a = psi[TwoAtomBasis::S11];
    if a.norm() < 1e-6 {
        return Err(Error::UndefinedPhase { amplitude: a.norm() });
    }
    Ok(PI - a.arg().abs())
}

/// `|φ_e|/π` for a propagation that started in `|11⟩`.
pub fn relative_phase_error(result: &PropagationResult) -> Result<f64> {
    Ok(phase_deviation(&result.final_state)?.abs() / PI)
}

const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            sum += w * (f(mid - 0.5 * h * x) + f(mid + 0.5 * h * x));
        }
    }
    0.5 * h * sum
}

/// Composite 8-point Gauss–Legendre quadrature, panel count doubled until
/// the relative change is below `rel_tol`.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut panels = 4;
    let mut previous = gauss_panels(&f, a, b, panels);
    for _ in 0..16 {
        panels *= 2;
        let next = gauss_panels(&f, a, b, panels);
        if (next - previous).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        previous = next;
    }
    previous
}

/// `∫ Ω²/(4V) dt` over the protocol, the excess phase the finite blockade
/// imprints on `|11⟩`.
pub fn dynamical_phase_error(schedule: &PulseSchedule, blockade: f64) -> Result<f64> {
    if !(blockade > 0.0 && blockade.is_finite()) {
        return Err(Error::invalid(
            "blockade",
            alloc::format!("must be positive, got {blockade}"),
        ));
    }
    let mut total = 0.0;
    for phase in [Phase::Excitation, Phase::Deexcitation] {
        let (a, b) = schedule.phase_window(phase);
        let w = |t: f64| {
            let s = schedule.sample_in_phase(phase, t);
            s.omega * s.omega
        };
        total += gauss_legendre(w, a, b, 1e-12);
    }
    Ok(total / (4.0 * blockade))
}

/// Smallest overlap `|⟨n(t)|ψ(t)⟩|²` along an `H + H_CD` run started in
/// `|01⟩`, where `|n(t)⟩` is the instantaneous eigenstate of the
/// `{|01⟩, |0r⟩}` block continuously connected to `|01⟩`.
pub fn cd_tracking_min_overlap(
    schedule: &PulseSchedule,
    config: &PropagationConfig,
    samples: usize,
) -> Result<f64> {
    let params = ModelParams {
        blockade: 0.0,
        ecd_frequency: 0.0,
        drive_mode: DriveMode::ExactCd,
    };
    let config = PropagationConfig {
        trajectory_samples: samples.max(2),
        ..*config
    };
    let result = propagate(&params, schedule, &config, &TwoAtomBasis::ket(TwoAtomBasis::S01))?;
    let mut tracked = Vector2::new(ONE, C64::new(0.0, 0.0));
    let mut worst = 1.0f64;
    for (t, psi) in &result.trajectory {
        let s = schedule.sample(*t)?;
        let (_, vecs) = hermitian_eigen(&TwoLevelBlock::Single.hamiltonian(&s));
        let pick = (0..2)
            .max_by(|&a, &b| {
                let oa = vecs.column(a).dotc(&tracked).norm();
                let ob = vecs.column(b).dotc(&tracked).norm();
                oa.total_cmp(&ob)
            })
            .expect("two columns");
        tracked = vecs.column(pick).into_owned();
        let local = Vector2::new(psi[TwoAtomBasis::S01], psi[TwoAtomBasis::S0R]);
        worst = worst.min(tracked.dotc(&local).norm_sqr());
    }
    Ok(worst)
}

/// Distance `‖P ψ_full(T) − ψ_reduced(T)‖` between the `{|11⟩, |d+⟩, |rr⟩}`
/// propagation projected on `{|11⟩, |d+⟩}` and the blockaded two-state
/// model, both started in `|11⟩`.
pub fn elimination_error(schedule: &PulseSchedule, blockade: f64, steps_per_period: usize) -> f64 {
    let fastest = schedule.omega_max().max(schedule.delta_max()).max(blockade + 2.0 * schedule.delta_max());
    let mut full = Vector3::new(ONE, real(0.0), real(0.0));
    let mut reduced = Vector2::new(ONE, real(0.0));
    for phase in Phase::ALL {
        let (a, b) = schedule.phase_window(phase);
        let periods = (b - a) * fast_periods(fastest);
        let steps = ((periods * steps_per_period as f64).ceil() as usize).max(64);
        let u3 = evolve_dense(
            |t| blockade_block(&schedule.sample_in_phase(phase, t), blockade),
            a,
            b,
            steps,
            Method::FourthOrder,
        );
        let u2 = evolve_dense(
            |t| TwoLevelBlock::Pair.hamiltonian(&schedule.sample_in_phase(phase, t)),
            a,
            b,
            steps,
            Method::FourthOrder,
        );
        full = u3 * full;
        reduced = u2 * reduced;
    }
    (Vector2::new(full[0], full[1]) - reduced).norm()
}

fn fast_periods(angular: f64) -> f64 {
    angular / (2.0 * PI)
}

/// Axes of a `(T_tot, V)` sweep; blockades in rad/μs.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub total_times: Vec<f64>,
    pub blockades: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.total_times.is_empty() || self.blockades.is_empty() {
            return Err(Error::invalid("sweep", "both axes need at least one value"));
        }
        if self.total_times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("sweep.total_times", "values must be positive"));
        }
        if self.blockades.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("sweep.blockades", "values must be non-negative"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.total_times.len() * self.blockades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(T_tot, V)` of cell `index`, `T_tot` varying slowest.
    pub fn cell(&self, index: usize) -> (f64, f64) {
        let nv = self.blockades.len();
        (self.total_times[index / nv], self.blockades[index % nv])
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMetrics {
    pub infidelity: f64,
    /// `|φ_e|/π` from the `|11⟩` column; `None` when that amplitude vanishes.
    pub phase_error: Option<f64>,
    /// Population outside the qubit subspace for the benchmark state.
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub total_time: f64,
    pub blockade: f64,
    pub outcome: core::result::Result<CellMetrics, Error>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub total_times: Vec<f64>,
    pub blockades: Vec<f64>,
    pub drive_mode: DriveMode,
    /// Row-major, `T_tot` varying slowest.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn from_cells(spec: &SweepSpec, drive_mode: DriveMode, cells: Vec<SweepCell>) -> Result<Self> {
        if cells.len() != spec.len() {
            return Err(Error::Internal("sweep cell count does not match the grid"));
        }
        Ok(SweepGrid {
            total_times: spec.total_times.clone(),
            blockades: spec.blockades.clone(),
            drive_mode,
            cells,
        })
    }

    pub fn get(&self, t_index: usize, v_index: usize) -> &SweepCell {
        &self.cells[t_index * self.blockades.len() + v_index]
    }
}

/// Everything a sweep cell needs besides its `(T_tot, V)` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSetup {
    pub pulses: PulseParams,
    pub shape: DetuningShape,
    pub model: ModelParams,
    pub config: PropagationConfig,
    pub case: BenchmarkCase,
}

/// One sweep cell: pulses rescaled to `total_time`, blockade replaced.
pub fn evaluate_cell(setup: &CellSetup, total_time: f64, blockade: f64) -> Result<CellMetrics> {
    let schedule = PulseSchedule::new(setup.pulses.with_total_time(total_time), setup.shape)?;
    let model = ModelParams {
        blockade,
        ..setup.model
    };
    let u = full_propagator(&model, &schedule, &setup.config)?;
    let psi = u * setup.case.initial;
    let column = u.column(TwoAtomBasis::S11).into_owned();
    Ok(CellMetrics {
        infidelity: state_infidelity(&psi, &setup.case.target),
        phase_error: phase_deviation(&column).ok().map(|p| p.abs() / PI),
        leakage: leakage(&psi),
    })
}

/// Sequential sweep; failures are kept per cell.
pub fn run_sweep(spec: &SweepSpec, setup: &CellSetup) -> Result<SweepGrid> {
    spec.validate()?;
    let cells = (0..spec.len())
        .map(|i| {
            let (total_time, blockade) = spec.cell(i);
            SweepCell {
                total_time,
                blockade,
                outcome: evaluate_cell(setup, total_time, blockade),
            }
        })
        .collect();
    SweepGrid::from_cells(spec, setup.model.drive_mode, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::units::mhz_to_angular;
    use proptest::prelude::*;

    fn setup(mode: DriveMode) -> CellSetup {
        CellSetup {
            pulses: PulseParams::default(),
            shape: DetuningShape::PhaseSweep,
            model: ModelParams::from_mhz(500.0, 300.0, mode),
            config: PropagationConfig {
                method: Method::FourthOrder,
                convergence_target: 1e-7,
                ..Default::default()
            },
            case: BenchmarkCase::bell(),
        }
    }

    #[test]
    fn cases() {
        let bell = BenchmarkCase::bell();
        assert!((bell.target[TwoAtomBasis::S11] + real(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(BenchmarkCase::basis("01").unwrap().target[TwoAtomBasis::S01], -ONE);
        assert!(BenchmarkCase::basis("1r").is_err());
        assert!(BenchmarkCase::parse("00").is_ok());
        assert!(BenchmarkCase::new("x", TwoAtomBasis::ket(0) * real(2.0), TwoAtomBasis::ket(0)).is_err());
    }

    #[test]
    fn exact_target_has_zero_infidelity() {
        let case = BenchmarkCase::bell();
        assert!(state_infidelity(&case.target, &case.target) < 1e-15);
        assert!((state_infidelity(&case.initial, &case.target) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_error_of_exact_action_is_zero() {
        let psi = -TwoAtomBasis::ket(TwoAtomBasis::S11);
        assert!(phase_deviation(&psi).unwrap().abs() < 1e-15);
        assert!(matches!(
            phase_deviation(&TwoAtomBasis::ket(0)),
            Err(Error::UndefinedPhase { .. })
        ));
        let tilted = TwoAtomBasis::ket(TwoAtomBasis::S11) * C64::from_polar(1.0, PI - 0.3);
        assert!((phase_deviation(&tilted).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn leakage_counts_rydberg_population() {
        let mut psi = TwoAtomState::zeros();
        psi[TwoAtomBasis::S11] = real(0.6);
        psi[TwoAtomBasis::S1R] = c(0.0, 0.8);
        assert!((leakage(&psi) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn quadrature_constant_and_polynomial() {
        let v = gauss_legendre(|_| 4.0, 0.0, 2.5, 1e-12);
        assert!((v - 10.0).abs() < 1e-13);
        let p = gauss_legendre(|x| x.powi(9), 0.0, 1.0, 1e-12);
        assert!((p - 0.1).abs() < 1e-14);
        // constant Ω over T: Ω²T/4V
        let (omega, t, v) = (3.0, 0.7, 50.0);
        let phi = gauss_legendre(|_| omega * omega, 0.0, t, 1e-12) / (4.0 * v);
        assert!((phi - omega * omega * t / (4.0 * v)).abs() < 1e-15);
    }

    #[test]
    fn dynamical_phase_scaling() {
        let s = PulseSchedule::standard();
        let v = mhz_to_angular(500.0);
        let a = dynamical_phase_error(&s, v).unwrap();
        let b = dynamical_phase_error(&s, 10.0 * v).unwrap();
        assert!((a / b - 10.0).abs() < 1e-10);
        let doubled = PulseParams {
            omega_max: 2.0 * PulseParams::default().omega_max,
            ..PulseParams::default()
        };
        let s2 = PulseSchedule::new(doubled, DetuningShape::PhaseSweep).unwrap();
        let c2 = dynamical_phase_error(&s2, v).unwrap();
        assert!((c2 / a - 4.0).abs() < 1e-10);
        assert!(dynamical_phase_error(&s, 0.0).is_err());
    }

    #[test]
    fn single_cell_sweep_matches_direct_call() {
        let setup = setup(DriveMode::Adiabatic);
        let spec = SweepSpec {
            total_times: alloc::vec![0.594],
            blockades: alloc::vec![mhz_to_angular(500.0)],
        };
        let grid = run_sweep(&spec, &setup).unwrap();
        let direct = evaluate_cell(&setup, 0.594, mhz_to_angular(500.0)).unwrap();
        assert_eq!(grid.get(0, 0).outcome.as_ref().unwrap(), &direct);
        let s = PulseSchedule::standard();
        let r = propagate(&setup.model, &s, &setup.config, &setup.case.initial).unwrap();
        assert!((infidelity(&r, &setup.case) - direct.infidelity).abs() < 1e-12);
    }

    #[test]
    fn sweep_records_failures_and_continues() {
        let mut setup = setup(DriveMode::Adiabatic);
        setup.config.convergence_target = 1e-15;
        setup.config.max_halvings = 1;
        let spec = SweepSpec {
            total_times: alloc::vec![0.3, 0.594],
            blockades: alloc::vec![mhz_to_angular(100.0)],
        };
        let grid = run_sweep(&spec, &setup).unwrap();
        assert_eq!(grid.cells.len(), 2);
        assert!(grid.cells.iter().all(|c| c.outcome.is_err()));
        assert!(run_sweep(&SweepSpec { total_times: alloc::vec![], blockades: alloc::vec![1.0] }, &setup).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.2, 0.6, 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.2);
        assert_eq!(v[4], 0.6);
        assert_eq!(linspace(1.0, 2.0, 1), alloc::vec![1.0]);
    }

    proptest! {
        #[test]
        fn infidelity_ignores_global_phase(theta in -PI..PI, a in 0.0f64..1.0) {
            let case = BenchmarkCase::bell();
            let mut psi = TwoAtomState::zeros();
            psi[TwoAtomBasis::S00] = real(a.sqrt());
            psi[TwoAtomBasis::S11] = real((1.0 - a).sqrt());
            let rotated = psi * C64::from_polar(1.0, theta);
            prop_assert!((state_infidelity(&psi, &case.target) - state_infidelity(&rotated, &case.target)).abs() < 1e-14);
        }

        #[test]
        fn leakage_in_unit_interval(re in proptest::array::uniform9(-1.0f64..1.0)) {
            let mut psi = TwoAtomState::from_fn(|i, _| real(re[i]));
            let n = psi.norm();
            prop_assume!(n > 1e-6);
            psi /= real(n);
            let l = leakage(&psi);
            prop_assert!((0.0..=1.0).contains(&l));
        }
    }
}
