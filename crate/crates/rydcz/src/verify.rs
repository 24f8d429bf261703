//! Invariant suite behind `rydcz verify`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rydcz_core::basis::TwoAtomBasis;
use rydcz_core::linalg::{hermiticity_defect, max_abs, real, unitarity_defect};
use rydcz_core::metrics::elimination_error;
use rydcz_core::model::{cd_blockwise_oracle, hamiltonian, hamiltonian_cd_exact};
use rydcz_core::propagate::{magnus_period_check, propagate};
use rydcz_core::units::mhz_to_angular;
use rydcz_core::{DriveMode, ModelParams, PropagationConfig, TwoAtomState, C64};

use crate::config::RunConfig;
use crate::RunError;

/// One line of the suite: `value` must not exceed `tolerance`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

fn random_state(rng: &mut ChaCha8Rng) -> TwoAtomState {
    let v = TwoAtomState::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    v / real(v.norm())
}

fn mode_params(config: &RunConfig, mode: DriveMode) -> ModelParams {
    let f = if mode == config.model.drive_mode {
        config.model.ecd_frequency_mhz()
    } else {
        mode.default_ecd_frequency_mhz()
    };
    ModelParams::from_mhz(config.model.blockade_mhz, f, mode)
}

/// Runs every check on the configured pulses and blockade. Numerical
/// failures inside a check are errors, not failed checks.
pub fn run_verify(config: &RunConfig) -> Result<Vec<Check>, RunError> {
    let schedule = config.schedule()?;
    let total = schedule.total_time();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();
    let times: Vec<f64> = (0..200).map(|k| total * (k as f64 + 0.5) / 200.0).collect();

    for mode in DriveMode::ALL {
        let params = mode_params(config, mode);
        let mut worst = 0.0f64;
        for &t in &times {
            let h = hamiltonian(&params, &schedule, t)?;
            worst = worst.max(hermiticity_defect(&h) / max_abs(&h).max(1.0));
        }
        checks.push(Check::new(format!("hermiticity [{}]", mode.name()), worst, 1e-12));
    }

    let mut dark_minus = TwoAtomState::zeros();
    dark_minus[TwoAtomBasis::SR1] = real(std::f64::consts::FRAC_1_SQRT_2);
    dark_minus[TwoAtomBasis::S1R] = real(-std::f64::consts::FRAC_1_SQRT_2);
    let prop = PropagationConfig {
        trajectory_samples: 64,
        ..config.propagation_config()
    };
    for mode in DriveMode::ALL {
        let params = mode_params(config, mode);
        let result = propagate(&params, &schedule, &prop, &random_state(&mut rng))?;
        let u = result.propagator;
        checks.push(Check::new(
            format!("unitarity [{}]", mode.name()),
            unitarity_defect(&u).max(result.max_unitarity_defect),
            1e-8,
        ));
        let drift = result
            .trajectory
            .iter()
            .map(|(_, psi)| (psi.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(Check::new(format!("norm conservation [{}]", mode.name()), drift, 1e-9));
        for (label, psi) in [("|00>", TwoAtomBasis::ket(TwoAtomBasis::S00)), ("(|r1>-|1r>)/sqrt2", dark_minus)] {
            let loss = 1.0 - psi.dotc(&(u * psi)).norm_sqr();
            checks.push(Check::new(
                format!("dark state {label} [{}]", mode.name()),
                loss.abs(),
                1e-9,
            ));
        }
    }

    let mut worst = 0.0f64;
    for &t in &times {
        let exact = hamiltonian_cd_exact(&schedule, t)?;
        let oracle = cd_blockwise_oracle(&schedule.sample(t)?)?;
        worst = worst.max(max_abs(&(exact - oracle)) / max_abs(&exact).max(1.0));
    }
    checks.push(Check::new("CD operator vs eigenbasis formula (relative)", worst, 1e-9));

    // one oscillation period early in the first pulse, ω and 2ω
    let t_start = 0.4 * schedule.pulse_center();
    let base = mode_params(config, DriveMode::EcdOnly);
    let doubled = ModelParams {
        ecd_frequency: 2.0 * base.ecd_frequency,
        ..base
    };
    let (h0, h1) = magnus_period_check(&base, &schedule, t_start)?;
    let (_, h1_doubled) = magnus_period_check(&doubled, &schedule, t_start)?;
    checks.push(Check::new("first Magnus term vanishes", h0, 1e-10));
    checks.push(Check::new(
        "second Magnus term converges to CD: |ratio at 2w - 1/2|",
        (h1_doubled / h1 - 0.5).abs(),
        0.1,
    ));

    let v = mhz_to_angular(config.model.blockade_mhz.max(250.0));
    let e1 = elimination_error(&schedule, v, 32);
    let e2 = elimination_error(&schedule, 2.0 * v, 32);
    checks.push(Check::new(
        "adiabatic elimination error halves when V doubles: |ratio - 1/2|",
        (e2 / e1 - 0.5).abs(),
        0.1,
    ));
    Ok(checks)
}
