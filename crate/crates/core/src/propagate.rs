//! Time-dependent Schrödinger propagation on the two-atom space.
//!
//! Every drive mode leaves the blocks of [`TwoAtomBasis::INVARIANT_BLOCKS`]
//! invariant, so steps exponentiate the 1×1, 2×2 (closed form) and 4×4
//! blocks separately while the propagator itself stays a full 9×9 matrix.
//! Each protocol phase is integrated on its own grid, so no step straddles
//! a kink of the pulses.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_traits::Float;

use crate::basis::TwoAtomBasis;
use crate::error::{Error, Result};
use crate::linalg::{
    c, evolution_operator, evolution_operator_2x2, max_abs, real, unitarity_defect,
    TwoAtomOperator, TwoAtomState, C64,
};
use crate::model::{self, cd_amplitudes, DriveMode, ModelParams};
use crate::pulses::{Phase, PulseSample, PulseSchedule};

/// Integration scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exact exponential of `H` at the step midpoint; second order.
    #[default]
    Midpoint,
    /// Triple-jump composition of midpoint steps; fourth order.
    FourthOrder,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Midpoint => "midpoint",
            Method::FourthOrder => "fourth-order",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Method::Midpoint, Method::FourthOrder]
            .into_iter()
            .find(|m| m.name() == s)
    }

    // fractions of the step taken by the midpoint sub-steps
    fn substeps(self) -> &'static [f64] {
        const W1: f64 = 1.351_207_191_959_657_8; // 1/(2 − 2^(1/3))
        const W0: f64 = -1.702_414_383_919_315_3; // −2^(1/3)/(2 − 2^(1/3))
        match self {
            Method::Midpoint => &[1.0],
            Method::FourthOrder => &[W1, W0, W1],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationConfig {
    /// Steps per period of the fastest frequency in the Hamiltonian.
    pub steps_per_fastest_period: usize,
    pub method: Method,
    /// Largest allowed change of the propagator (max-norm) between the last
    /// two step halvings.
    pub convergence_target: f64,
    pub max_halvings: u32,
    /// Number of `(t, ψ)` samples to record; 0 disables the trajectory.
    pub trajectory_samples: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            steps_per_fastest_period: 64,
            method: Method::Midpoint,
            convergence_target: 1e-9,
            max_halvings: 12,
            trajectory_samples: 0,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_fastest_period < 16 {
            return Err(Error::invalid(
                "steps_per_fastest_period",
                alloc::format!("must be at least 16, got {}", self.steps_per_fastest_period),
            ));
        }
        if !(self.convergence_target > 0.0 && self.convergence_target.is_finite()) {
            return Err(Error::invalid(
                "convergence_target",
                alloc::format!("must be positive, got {}", self.convergence_target),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationResult {
    pub final_state: TwoAtomState,
    /// Full propagator, rephased so that `⟨00|U|00⟩` is real and positive.
    pub propagator: TwoAtomOperator,
    pub trajectory: Vec<(f64, TwoAtomState)>,
    pub max_unitarity_defect: f64,
    /// Steps of the accepted run.
    pub steps: usize,
    pub halvings: u32,
    /// Propagator change between the accepted run and the one before it.
    pub change: f64,
}

/// Largest angular frequency the step size has to resolve.
pub fn fastest_frequency(params: &ModelParams, schedule: &PulseSchedule) -> f64 {
    let mut f = schedule.omega_max().max(schedule.delta_max());
    if params.drive_mode.is_oscillating() {
        f = f.max(params.ecd_frequency);
    }
    f
}

// Block-diagonal unitary in the invariant-block layout.
#[derive(Clone, Copy, Debug)]
struct BlockUnitary {
    b0: C64,
    b1: Matrix2<C64>,
    b2: Matrix2<C64>,
    b3: Matrix4<C64>,
}

const B1: [usize; 2] = [TwoAtomBasis::S01, TwoAtomBasis::S0R];
const B2: [usize; 2] = [TwoAtomBasis::S10, TwoAtomBasis::SR0];
const B3: [usize; 4] = [
    TwoAtomBasis::S11,
    TwoAtomBasis::S1R,
    TwoAtomBasis::SR1,
    TwoAtomBasis::SRR,
];

impl BlockUnitary {
    fn identity() -> Self {
        BlockUnitary {
            b0: real(1.0),
            b1: Matrix2::identity(),
            b2: Matrix2::identity(),
            b3: Matrix4::identity(),
        }
    }

    fn step(h: &TwoAtomOperator, dt: f64) -> Self {
        let b1 = Matrix2::from_fn(|r, col| h[(B1[r], B1[col])]);
        let b2 = Matrix2::from_fn(|r, col| h[(B2[r], B2[col])]);
        let b3 = Matrix4::from_fn(|r, col| h[(B3[r], B3[col])]);
        BlockUnitary {
            b0: C64::from_polar(1.0, -h[(0, 0)].re * dt),
            b1: evolution_operator_2x2(&b1, dt),
            b2: evolution_operator_2x2(&b2, dt),
            b3: evolution_operator(&b3, dt),
        }
    }

    // self ← step · self
    fn apply(&mut self, step: &BlockUnitary) {
        self.b0 = step.b0 * self.b0;
        self.b1 = step.b1 * self.b1;
        self.b2 = step.b2 * self.b2;
        self.b3 = step.b3 * self.b3;
    }

    fn dense(&self) -> TwoAtomOperator {
        let mut u = TwoAtomOperator::zeros();
        u[(0, 0)] = self.b0;
        for r in 0..2 {
            for col in 0..2 {
                u[(B1[r], B1[col])] = self.b1[(r, col)];
                u[(B2[r], B2[col])] = self.b2[(r, col)];
            }
        }
        for r in 0..4 {
            for col in 0..4 {
                u[(B3[r], B3[col])] = self.b3[(r, col)];
            }
        }
        u
    }
}

struct Run {
    propagator: TwoAtomOperator,
    trajectory: Vec<(f64, TwoAtomOperator)>,
    steps: usize,
}

fn steps_per_phase(schedule: &PulseSchedule, base: usize) -> [usize; 3] {
    let total = schedule.total_time();
    let d = schedule.phase_durations();
    core::array::from_fn(|k| ((base as f64 * d[k] / total).ceil() as usize).max(1))
}

fn run(
    params: &ModelParams,
    schedule: &PulseSchedule,
    method: Method,
    per_phase: [usize; 3],
    record_every: Option<usize>,
) -> Run {
    let mut u = BlockUnitary::identity();
    let mut trajectory = Vec::new();
    let mut count = 0usize;
    if record_every.is_some() {
        trajectory.push((0.0, u.dense()));
    }
    for (k, phase) in Phase::ALL.into_iter().enumerate() {
        let (start, end) = schedule.phase_window(phase);
        let len = end - start;
        let graded = params.drive_mode.is_oscillating() && phase != Phase::Inversion;
        let n = per_phase[k];
        let dx = 1.0 / n as f64;
        for i in 0..n {
            let mut x = i as f64 * dx;
            for &w in method.substeps() {
                let h = w * dx;
                let (mid, rate) = time_map(graded, x + 0.5 * h);
                let t = start + len * mid;
                let sample = schedule.sample_in_phase(phase, t);
                let hm = model::hamiltonian_at(params, &sample, t);
                u.apply(&BlockUnitary::step(&hm, h * len * rate));
                x += h;
            }
            count += 1;
            if let Some(every) = record_every {
                if count.is_multiple_of(every) || (k == 2 && i + 1 == n) {
                    let t = start + len * time_map(graded, (i + 1) as f64 * dx).0;
                    trajectory.push((t, u.dense()));
                }
            }
        }
    }
    Run {
        propagator: u.dense(),
        trajectory,
        steps: count,
    }
}

// Fraction of a phase elapsed at mesh coordinate x, and its derivative.
// The oscillating fields go as √|f| and f vanishes linearly at the pulse
// edges, so those phases use x − sin(2πx)/2π, which clusters steps at
// both ends and restores the order of the integrator.
fn time_map(graded: bool, x: f64) -> (f64, f64) {
    if !graded {
        return (x, 1.0);
    }
    let (s, c) = (2.0 * PI * x).sin_cos();
    (x - s / (2.0 * PI), 1.0 - c)
}

fn rephase(u: &TwoAtomOperator) -> TwoAtomOperator {
    let z = u[(0, 0)];
    if z.norm() == 0.0 {
        return *u;
    }
    u * (z.conj() / z.norm())
}

// Step halving on the full propagator, which bounds the change of any
// final state.
fn converge(
    params: &ModelParams,
    schedule: &PulseSchedule,
    config: &PropagationConfig,
) -> Result<(Run, u32, f64)> {
    params.validate()?;
    config.validate()?;
    let periods = schedule.total_time() * fastest_frequency(params, schedule) / (2.0 * PI);
    let base = ((periods * config.steps_per_fastest_period as f64).ceil() as usize).max(16);
    let record = |per_phase: [usize; 3]| {
        (config.trajectory_samples > 0).then(|| {
            let total: usize = per_phase.iter().sum();
            (total / config.trajectory_samples).max(1)
        })
    };
    let mut per_phase = steps_per_phase(schedule, base);
    let mut previous = run(params, schedule, config.method, per_phase, record(per_phase));
    let mut change = f64::INFINITY;
    for halvings in 1..=config.max_halvings {
        per_phase = per_phase.map(|n| 2 * n);
        let next = run(params, schedule, config.method, per_phase, record(per_phase));
        change = max_abs(&(next.propagator - previous.propagator));
        previous = next;
        if change < config.convergence_target {
            return Ok((previous, halvings, change));
        }
    }
    Err(Error::NotConverged {
        steps: previous.steps,
        halvings: config.max_halvings,
        change,
        target: config.convergence_target,
    })
}

/// Propagates `initial` over the whole protocol.
pub fn propagate(
    params: &ModelParams,
    schedule: &PulseSchedule,
    config: &PropagationConfig,
    initial: &TwoAtomState,
) -> Result<PropagationResult> {
    let norm = initial.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let (run, halvings, change) = converge(params, schedule, config)?;
    let propagator = rephase(&run.propagator);
    let phase = if run.propagator[(0, 0)].norm() > 0.0 {
        run.propagator[(0, 0)].conj() / run.propagator[(0, 0)].norm()
    } else {
        real(1.0)
    };
    let trajectory = run
        .trajectory
        .iter()
        .map(|(t, u)| (*t, u * initial * phase))
        .collect();
    Ok(PropagationResult {
        final_state: propagator * initial,
        max_unitarity_defect: unitarity_defect(&propagator),
        propagator,
        trajectory,
        steps: run.steps,
        halvings,
        change,
    })
}

/// The 9×9 propagator over the whole protocol.
pub fn full_propagator(
    params: &ModelParams,
    schedule: &PulseSchedule,
    config: &PropagationConfig,
) -> Result<TwoAtomOperator> {
    let config = PropagationConfig {
        trajectory_samples: 0,
        ..*config
    };
    let (run, _, _) = converge(params, schedule, &config)?;
    Ok(rephase(&run.propagator))
}

/// Fixed-step propagator of a generic `N`-level Hamiltonian over `[t0, t1]`.
pub fn evolve_dense<const N: usize>(
    h: impl Fn(f64) -> SMatrix<C64, N, N>,
    t0: f64,
    t1: f64,
    steps: usize,
    method: Method,
) -> SMatrix<C64, N, N> {
    let steps = steps.max(1);
    let dt = (t1 - t0) / steps as f64;
    let mut u = SMatrix::<C64, N, N>::identity();
    for i in 0..steps {
        let mut t = t0 + i as f64 * dt;
        for &w in method.substeps() {
            let step = w * dt;
            u = evolution_operator(&h(t + 0.5 * step), step) * u;
            t += step;
        }
    }
    u
}

fn ecd_window(
    params: &ModelParams,
    schedule: &PulseSchedule,
    t_start: f64,
) -> Result<(f64, PulseSample, Phase)> {
    params.validate()?;
    if !(params.ecd_frequency > 0.0) {
        return Err(Error::invalid("ecd_frequency", "must be positive"));
    }
    let period = 2.0 * PI / params.ecd_frequency;
    let end = t_start + period;
    let total = schedule.total_time();
    if t_start < 0.0 || end > total {
        return Err(Error::OutOfRange {
            t: if t_start < 0.0 { t_start } else { end },
            total,
        });
    }
    for boundary in schedule.phase_boundaries() {
        if t_start < boundary && end > boundary {
            return Err(Error::WindowCrossesBoundary {
                start: t_start,
                end,
                boundary,
            });
        }
    }
    let mid = t_start + 0.5 * period;
    let phase = schedule.phase_at(mid)?;
    Ok((period, schedule.sample_in_phase(phase, mid), phase))
}

// Oscillating field at frozen f and its period-averaged target.
fn frozen_field(params: &ModelParams, s: &PulseSample) -> (impl Fn(f64) -> TwoAtomOperator, TwoAtomOperator) {
    let (f0, f1) = cd_amplitudes(s);
    let omega = params.ecd_frequency;
    let separable = params.drive_mode == DriveMode::Separable;
    let f_mean = 0.5 * (f0 + f1);
    let target = if separable {
        model::cd_single_atom_at(f_mean)
    } else {
        model::cd_exact_at(f0, f1)
    };
    let field = move |t: f64| {
        if separable {
            model::ecd_separable_at(omega, f_mean, t)
        } else {
            model::ecd_at(omega, f0, f1, t)
        }
    };
    (field, target)
}

/// First two Magnus terms of the oscillating field over one period
/// `[t_start, t_start + 2π/ω]` with `f_k` frozen at the window centre.
///
/// Returns `(‖∫H dt‖_max, ‖i·M2 − T·H_CD‖_max)` where
/// `M2 = −½∫∫_{t2<t1}[H(t1), H(t2)]`; both are phases (dimensionless).
/// The separable mode is checked against the single-atom CD term of `f̄`.
pub fn magnus_period_check(
    params: &ModelParams,
    schedule: &PulseSchedule,
    t_start: f64,
) -> Result<(f64, f64)> {
    let (period, sample, _) = ecd_window(params, schedule, t_start)?;
    let (field, target) = frozen_field(params, &sample);
    let n = 2048;
    let dt = period / n as f64;
    let mut first = TwoAtomOperator::zeros();
    let mut second = TwoAtomOperator::zeros();
    let mut prefix = TwoAtomOperator::zeros();
    for k in 0..n {
        let hk = field(t_start + (k as f64 + 0.5) * dt);
        second += crate::linalg::commutator(&hk, &prefix) * real(-0.5 * dt * dt);
        prefix += hk;
        first += hk * real(dt);
    }
    let h1 = max_abs(&(second * c(0.0, 1.0) - target * real(period)));
    Ok((max_abs(&first), h1))
}

/// `‖U_period − exp(−i·T·H_CD)‖_max` for one oscillation period with
/// frozen `f_k`, the propagator computed with `steps` fourth-order steps.
pub fn period_propagator_deviation(
    params: &ModelParams,
    schedule: &PulseSchedule,
    t_start: f64,
    steps: usize,
) -> Result<f64> {
    let (period, sample, _) = ecd_window(params, schedule, t_start)?;
    let (field, target) = frozen_field(params, &sample);
    let u = evolve_dense(field, t_start, t_start + period, steps, Method::FourthOrder);
    let reference = evolution_operator(&target, period);
    Ok(max_abs(&(u - reference)))
}
