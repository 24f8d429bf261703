//! Three-phase adiabatic control pulses.
//!
//! Phase I excites `|1⟩ → |r⟩` with a quartic-Gaussian Rabi pulse while the
//! detuning sweeps through resonance, phase II inverts the detuning with the
//! Rabi drive exactly off, and phase III repeats phase I to de-excite. The
//! two Rabi segments are identical and each is centred in its phase.

use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::units::mhz_to_angular;

/// Pulse amplitudes and timings, quoted at `reference_time`.
///
/// Amplitudes are angular frequencies (rad/μs), times are μs. When the
/// protocol is run for `total_time ≠ reference_time`, amplitudes scale as
/// `reference_time / total_time` and the width scales as
/// `total_time / reference_time`, so `omega_max · total_time` is invariant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams {
    pub omega_max: f64,
    pub delta_max: f64,
    pub total_time: f64,
    pub width: f64,
    pub phase2_fraction: f64,
    pub reference_time: f64,
}

impl Default for PulseParams {
    /// Ω_max/2π = 17 MHz, Δ_max/2π = 23 MHz, τ = 0.0945 μs at 0.594 μs.
    fn default() -> Self {
        PulseParams {
            omega_max: mhz_to_angular(17.0),
            delta_max: mhz_to_angular(23.0),
            total_time: 0.594,
            width: 0.0945,
            phase2_fraction: 0.1,
            reference_time: 0.594,
        }
    }
}

impl PulseParams {
    /// Same quoted amplitudes, run for a different duration.
    pub fn with_total_time(mut self, total_time: f64) -> Self {
        self.total_time = total_time;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_max", self.omega_max),
            ("delta_max", self.delta_max),
            ("total_time", self.total_time),
            ("width", self.width),
            ("reference_time", self.reference_time),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, alloc::format!("must be positive, got {value}")));
            }
        }
        let f = self.phase2_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::invalid(
                "phase2_fraction",
                alloc::format!("must lie in (0, 1), got {f}"),
            ));
        }
        Ok(())
    }

    /// `reference_time / total_time`.
    pub fn amplitude_scale(&self) -> f64 {
        self.reference_time / self.total_time
    }

    pub fn effective_omega_max(&self) -> f64 {
        self.omega_max * self.amplitude_scale()
    }

    pub fn effective_delta_max(&self) -> f64 {
        self.delta_max * self.amplitude_scale()
    }

    pub fn effective_width(&self) -> f64 {
        self.width / self.amplitude_scale()
    }
}

/// Detuning profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DetuningShape {
    /// `−Δmax·cos(πs/T_I)` in phases I and III (a sweep from `−Δmax` to
    /// `+Δmax` crossing resonance at the pulse centre) joined by the
    /// half-cosine inversion `Δmax·cos(π(t−T_I)/T_II)` in phase II.
    #[default]
    PhaseSweep,
    /// One sinusoid over the whole protocol, `Δmax·sin(2π(t−t0)/(T_I+T_II))`,
    /// with zero crossings at both pulse centres and in the middle of
    /// phase II.
    FullSine,
}

impl DetuningShape {
    pub fn name(self) -> &'static str {
        match self {
            DetuningShape::PhaseSweep => "phase-sweep",
            DetuningShape::FullSine => "full-sine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "phase-sweep" => Some(DetuningShape::PhaseSweep),
            "full-sine" => Some(DetuningShape::FullSine),
            _ => None,
        }
    }
}

/// Protocol phase: excitation pulse, detuning inversion, de-excitation pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Excitation,
    Inversion,
    Deexcitation,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Excitation, Phase::Inversion, Phase::Deexcitation];
}

/// Ω, Δ and their time derivatives at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PulseSample {
    pub omega: f64,
    pub delta: f64,
    pub d_omega: f64,
    pub d_delta: f64,
}

/// Solves for `a`, `b` in `exp(−(t−t0)⁴/τ⁴) − a − b·t(t−2t0)` such that the
/// function and its slope vanish at `t = 0` (and, by symmetry, at `2t0`).
pub fn solve_shape_coefficients(t0: f64, tau: f64) -> Result<(f64, f64)> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::invalid("t0", alloc::format!("must be positive, got {t0}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", alloc::format!("must be positive, got {tau}")));
    }
    // f(0) = e0 − a = 0,  f'(0) = 4 t0³ e0 / τ⁴ + 2 b t0 = 0
    let e0 = (-(t0 / tau).powi(4)).exp();
    let a = e0;
    let b = -2.0 * t0 * t0 * e0 / tau.powi(4);
    Ok((a, b))
}

/// Immutable pulse schedule for one protocol duration.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    params: PulseParams,
    shape: DetuningShape,
    omega_max: f64,
    delta_max: f64,
    tau: f64,
    a: f64,
    b: f64,
    norm: f64,
    durations: [f64; 3],
}

impl PulseSchedule {
    pub fn new(params: PulseParams, shape: DetuningShape) -> Result<Self> {
        params.validate()?;
        let total = params.total_time;
        let inversion = params.phase2_fraction * total;
        let side = 0.5 * (total - inversion);
        let tau = params.effective_width();
        let (a, b) = solve_shape_coefficients(0.5 * side, tau)?;
        let mut schedule = PulseSchedule {
            params,
            shape,
            omega_max: params.effective_omega_max(),
            delta_max: params.effective_delta_max(),
            tau,
            a,
            b,
            norm: 1.0,
            durations: [side, inversion, side],
        };
        schedule.norm = schedule.segment_peak();
        if !(schedule.norm > 0.0) {
            return Err(Error::invalid(
                "width",
                alloc::format!("pulse segment has no positive lobe (τ = {tau} μs)"),
            ));
        }
        Ok(schedule)
    }

    /// Default parameters with the default detuning shape.
    pub fn standard() -> Self {
        Self::new(PulseParams::default(), DetuningShape::default())
            .expect("default pulse parameters are valid")
    }

    pub fn params(&self) -> &PulseParams {
        &self.params
    }

    pub fn shape(&self) -> DetuningShape {
        self.shape
    }

    pub fn total_time(&self) -> f64 {
        self.params.total_time
    }

    /// Effective (rescaled) peak Rabi frequency.
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Effective (rescaled) detuning amplitude.
    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    /// Effective pulse width τ.
    pub fn width(&self) -> f64 {
        self.tau
    }

    /// Shape coefficients `(a, b, N)`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.norm)
    }

    /// Durations of phases I, II, III.
    pub fn phase_durations(&self) -> [f64; 3] {
        self.durations
    }

    /// End of phase I and end of phase II.
    pub fn phase_boundaries(&self) -> [f64; 2] {
        [self.durations[0], self.durations[0] + self.durations[1]]
    }

    /// Centre of the phase-I Rabi segment.
    pub fn pulse_center(&self) -> f64 {
        0.5 * self.durations[0]
    }

    fn check(&self, t: f64) -> Result<f64> {
        let total = self.total_time();
        let slack = 1e-12 * total;
        if !(t >= -slack && t <= total + slack) {
            return Err(Error::OutOfRange { t, total });
        }
        Ok(t.clamp(0.0, total))
    }

    pub fn phase_at(&self, t: f64) -> Result<Phase> {
        let t = self.check(t)?;
        Ok(self.phase_unchecked(t))
    }

    fn phase_unchecked(&self, t: f64) -> Phase {
        let [end1, end2] = self.phase_boundaries();
        if t < end1 {
            Phase::Excitation
        } else if t < end2 {
            Phase::Inversion
        } else {
            Phase::Deexcitation
        }
    }

    pub fn omega_at(&self, t: f64) -> Result<f64> {
        Ok(self.sample(t)?.omega)
    }

    pub fn delta_at(&self, t: f64) -> Result<f64> {
        Ok(self.sample(t)?.delta)
    }

    /// Analytic `(∂tΩ, ∂tΔ)`.
    pub fn pulse_derivatives(&self, t: f64) -> Result<(f64, f64)> {
        let s = self.sample(t)?;
        Ok((s.d_omega, s.d_delta))
    }

    pub fn sample(&self, t: f64) -> Result<PulseSample> {
        let t = self.check(t)?;
        Ok(self.sample_unchecked(t))
    }

    /// Evaluation without the domain check; `t` is clamped to the protocol.
    pub(crate) fn sample_unchecked(&self, t: f64) -> PulseSample {
        let t = t.clamp(0.0, self.total_time());
        self.sample_in_phase(self.phase_unchecked(t), t)
    }

    /// Evaluates the analytic formulas of `phase` at `t`, continuing them
    /// smoothly past the phase edges.
    pub fn sample_in_phase(&self, phase: Phase, t: f64) -> PulseSample {
        let (omega, d_omega) = self.rabi(phase, t);
        let (delta, d_delta) = self.detuning(phase, t);
        PulseSample {
            omega,
            delta,
            d_omega,
            d_delta,
        }
    }

    /// Start and end time of `phase`.
    pub fn phase_window(&self, phase: Phase) -> (f64, f64) {
        let [end1, end2] = self.phase_boundaries();
        match phase {
            Phase::Excitation => (0.0, end1),
            Phase::Inversion => (end1, end2),
            Phase::Deexcitation => (end2, self.total_time()),
        }
    }

    // Unnormalized segment value and slope at local time s ∈ [0, 2t0].
    fn segment(&self, s: f64) -> (f64, f64) {
        let t0 = self.pulse_center();
        let x = (s - t0) / self.tau;
        let e = (-x.powi(4)).exp();
        let value = e - self.a - self.b * s * (s - 2.0 * t0);
        let slope = -4.0 * x.powi(3) / self.tau * e - self.b * (2.0 * s - 2.0 * t0);
        (value, slope)
    }

    // The correction term leaves a shallow dip at the centre, so the peak is
    // located numerically: grid scan of the left half, then golden section.
    fn segment_peak(&self) -> f64 {
        let t0 = self.pulse_center();
        let n = 2048;
        let h = t0 / n as f64;
        let (mut best_s, mut best) = (t0, self.segment(t0).0);
        for k in 0..n {
            let s = k as f64 * h;
            let v = self.segment(s).0;
            if v > best {
                best = v;
                best_s = s;
            }
        }
        let (mut lo, mut hi) = ((best_s - h).max(0.0), (best_s + h).min(t0));
        let g = 0.5 * (5.0f64.sqrt() - 1.0);
        for _ in 0..80 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if self.segment(m1).0 < self.segment(m2).0 {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best.max(self.segment(0.5 * (lo + hi)).0)
    }

    fn rabi(&self, phase: Phase, t: f64) -> (f64, f64) {
        let local = match phase {
            Phase::Excitation => t,
            Phase::Inversion => return (0.0, 0.0),
            Phase::Deexcitation => t - self.phase_boundaries()[1],
        };
        let (v, dv) = self.segment(local);
        let k = self.omega_max / self.norm;
        (k * v, k * dv)
    }

    fn detuning(&self, phase: Phase, t: f64) -> (f64, f64) {
        let d = self.delta_max;
        let [side, inversion, _] = self.durations;
        match self.shape {
            DetuningShape::PhaseSweep => match phase {
                Phase::Excitation => sweep(d, t / side, side),
                Phase::Inversion => {
                    let arg = PI * (t - side) / inversion;
                    (d * arg.cos(), -d * PI / inversion * arg.sin())
                }
                Phase::Deexcitation => sweep(d, (t - side - inversion) / side, side),
            },
            DetuningShape::FullSine => {
                let period = side + inversion;
                let arg = 2.0 * PI * (t - self.pulse_center()) / period;
                (d * arg.sin(), d * 2.0 * PI / period * arg.cos())
            }
        }
    }
}

// −Δ·cos(πu) over u ∈ [0, 1] of a phase lasting `len`.
fn sweep(d: f64, u: f64, len: f64) -> (f64, f64) {
    let arg = PI * u;
    (-d * arg.cos(), d * PI / len * arg.sin())
}
