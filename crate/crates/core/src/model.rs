//! Two-atom Hamiltonians.
//!
//! Single-atom drive `H_d = (Ω/2)(|r⟩⟨1| + |1⟩⟨r|) + Δ|r⟩⟨r|` acts on both
//! atoms, and the van der Waals shift `V` sits on `|rr⟩`. Under the
//! blockade the dynamics splits into two-level problems
//! `H_k = [[0, Ω_k/2], [Ω_k/2, Δ]]` with `Ω_0 = Ω` (one atom in `|0⟩`) and
//! `Ω_1 = √2·Ω` (the pair `|11⟩, |d+⟩`), whose counterdiabatic terms are
//! `f_k = (Δ∂tΩ_k − Ω_k∂tΔ)/(Δ² + Ω_k²)`.

use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::{Matrix2, Matrix3, SMatrix};
use num_traits::Float;

use crate::basis::{projector, transition, Level, TwoAtomBasis};
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, real, TwoAtomOperator, C64, I, ZERO};
use crate::pulses::{PulseSample, PulseSchedule};
use crate::units::mhz_to_angular;

/// Which Hamiltonian is simulated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DriveMode {
    /// `H(t)` alone.
    #[default]
    Adiabatic,
    /// `H(t) + H_CD(t)`.
    ExactCd,
    /// Oscillating effective CD field alone (plus the interaction `V`).
    EcdOnly,
    /// `H(t)` plus the single-atom oscillating field built from `f̄`.
    Separable,
}

impl DriveMode {
    pub const ALL: [DriveMode; 4] = [
        DriveMode::Adiabatic,
        DriveMode::ExactCd,
        DriveMode::EcdOnly,
        DriveMode::Separable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DriveMode::Adiabatic => "adiabatic",
            DriveMode::ExactCd => "exact-cd",
            DriveMode::EcdOnly => "ecd-only",
            DriveMode::Separable => "separable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Whether the Hamiltonian oscillates at `ω`.
    pub fn is_oscillating(self) -> bool {
        matches!(self, DriveMode::EcdOnly | DriveMode::Separable)
    }

    /// ω/2π used when none is configured: 300 MHz for the eCD-only field,
    /// 1 GHz for the separable one.
    pub fn default_ecd_frequency_mhz(self) -> f64 {
        match self {
            DriveMode::Separable => 1000.0,
            _ => 300.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Interaction `V` (rad/μs).
    pub blockade: f64,
    /// Oscillation frequency `ω` of the eCD fields (rad/μs).
    pub ecd_frequency: f64,
    pub drive_mode: DriveMode,
}

impl ModelParams {
    /// `V` and `ω` given as plain frequencies in MHz.
    pub fn from_mhz(blockade_mhz: f64, ecd_frequency_mhz: f64, drive_mode: DriveMode) -> Self {
        ModelParams {
            blockade: mhz_to_angular(blockade_mhz),
            ecd_frequency: mhz_to_angular(ecd_frequency_mhz),
            drive_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.blockade.is_finite() && self.blockade >= 0.0) {
            return Err(Error::invalid(
                "blockade",
                alloc::format!("must be finite and non-negative, got {}", self.blockade),
            ));
        }
        if self.drive_mode.is_oscillating()
            && !(self.ecd_frequency.is_finite() && self.ecd_frequency > 0.0)
        {
            return Err(Error::invalid(
                "ecd_frequency",
                alloc::format!("must be positive in {} mode", self.drive_mode.name()),
            ));
        }
        Ok(())
    }
}

/// One of the two decoupled two-level problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwoLevelBlock {
    /// `{|1⟩, |r⟩}` of one atom with the partner in `|0⟩`; `Ω_0 = Ω`.
    Single,
    /// `{|11⟩, |d+⟩}`; `Ω_1 = √2·Ω`.
    Pair,
}

impl TwoLevelBlock {
    pub fn index(self) -> usize {
        match self {
            TwoLevelBlock::Single => 0,
            TwoLevelBlock::Pair => 1,
        }
    }

    pub fn rabi_factor(self) -> f64 {
        match self {
            TwoLevelBlock::Single => 1.0,
            TwoLevelBlock::Pair => SQRT_2,
        }
    }

    /// `(Ω_k, ∂tΩ_k)`.
    pub fn rabi(self, s: &PulseSample) -> (f64, f64) {
        let k = self.rabi_factor();
        (k * s.omega, k * s.d_omega)
    }

    /// `[[0, Ω_k/2], [Ω_k/2, Δ]]`.
    pub fn hamiltonian(self, s: &PulseSample) -> Matrix2<C64> {
        let (w, _) = self.rabi(s);
        Matrix2::new(ZERO, real(0.5 * w), real(0.5 * w), real(s.delta))
    }

    pub fn d_hamiltonian(self, s: &PulseSample) -> Matrix2<C64> {
        let (_, dw) = self.rabi(s);
        Matrix2::new(ZERO, real(0.5 * dw), real(0.5 * dw), real(s.d_delta))
    }

    pub fn cd_amplitude(self, s: &PulseSample) -> CdAmplitude {
        let (w, dw) = self.rabi(s);
        let den = s.delta * s.delta + w * w;
        if den <= f64::MIN_POSITIVE {
            return CdAmplitude {
                value: 0.0,
                degenerate: true,
            };
        }
        CdAmplitude {
            value: (s.delta * dw - w * s.d_delta) / den,
            degenerate: false,
        }
    }
}

/// `f_k(t)` in rad/μs. At `Δ = Ω_k = 0` the value is 0 by continuity and
/// `degenerate` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdAmplitude {
    pub value: f64,
    pub degenerate: bool,
}

pub fn cd_amplitude(block: TwoLevelBlock, schedule: &PulseSchedule, t: f64) -> Result<CdAmplitude> {
    Ok(block.cd_amplitude(&schedule.sample(t)?))
}

/// `(f_0, f_1)` at one sample.
pub fn cd_amplitudes(s: &PulseSample) -> (f64, f64) {
    (
        TwoLevelBlock::Single.cd_amplitude(s).value,
        TwoLevelBlock::Pair.cd_amplitude(s).value,
    )
}

/// `|a⟩⟨b| ⊗ |c⟩⟨d|`-style Kronecker product of single-atom operators.
pub fn kron3(a: &Matrix3<C64>, b: &Matrix3<C64>) -> TwoAtomOperator {
    TwoAtomOperator::from_fn(|r, col| a[(r / 3, col / 3)] * b[(r % 3, col % 3)])
}

/// `A ⊗ 1 + 1 ⊗ A`.
pub fn both_atoms(a: &Matrix3<C64>) -> TwoAtomOperator {
    let id = Matrix3::identity();
    kron3(a, &id) + kron3(&id, a)
}

fn single_atom_drive(s: &PulseSample) -> Matrix3<C64> {
    let flip = transition(Level::Rydberg, Level::One) + transition(Level::One, Level::Rydberg);
    flip * real(0.5 * s.omega) + projector(Level::Rydberg) * real(s.delta)
}

fn interaction(blockade: f64) -> TwoAtomOperator {
    let mut h = TwoAtomOperator::zeros();
    h[(TwoAtomBasis::SRR, TwoAtomBasis::SRR)] = real(blockade);
    h
}

pub(crate) fn adiabatic_at(blockade: f64, s: &PulseSample) -> TwoAtomOperator {
    both_atoms(&single_atom_drive(s)) + interaction(blockade)
}

pub(crate) fn cd_exact_at(f0: f64, f1: f64) -> TwoAtomOperator {
    let up = transition(Level::One, Level::Rydberg);
    let p0 = projector(Level::Zero);
    let mut h = (kron3(&up, &p0) + kron3(&p0, &up)) * c(0.0, 0.5 * f0);
    let bra = TwoAtomBasis::d_plus();
    let coupling = I * 0.5 * f1;
    for j in 0..TwoAtomBasis::DIM {
        h[(TwoAtomBasis::S11, j)] += coupling * bra[j].conj();
    }
    h + h.adjoint()
}

/// Single-atom CD term `(i f/2)|1⟩⟨r| + h.c.` on both atoms.
pub(crate) fn cd_single_atom_at(f: f64) -> TwoAtomOperator {
    let a = transition(Level::One, Level::Rydberg) * c(0.0, 0.5 * f);
    both_atoms(&(a + a.adjoint()))
}

fn signed_root(omega: f64, f: f64) -> f64 {
    f.signum() * (omega * f.abs()).sqrt()
}

/// Coefficients `(g1, g2, g3)` of the oscillating field at frozen `f_k`.
///
/// Each block is driven by a sin/cos pair whose one-period Magnus term is
/// `±ω f_k · T/ω`; the sign of `f_k` rides on one factor only, so the
/// average generator is `+H_CD` for either sign.
pub fn ecd_coefficients(omega: f64, f0: f64, f1: f64, t: f64) -> (f64, f64, f64) {
    let (sin, cos) = (omega * t).sin_cos();
    let g1 = signed_root(omega, f0) * sin;
    let g2 = signed_root(omega, f1) * FRAC_1_SQRT_2 * cos;
    let g3 = (omega * f1.abs()).sqrt() * sin - (omega * f0.abs()).sqrt() * cos;
    (g1, g2, g3)
}

pub(crate) fn ecd_at(omega: f64, f0: f64, f1: f64, t: f64) -> TwoAtomOperator {
    let (g1, g2, g3) = ecd_coefficients(omega, f0, f1, t);
    let down = transition(Level::Rydberg, Level::One);
    let p0 = projector(Level::Zero);
    let p1 = projector(Level::One);
    let lower = (kron3(&down, &p0) + kron3(&p0, &down)) * real(g1)
        + (kron3(&down, &p1) + kron3(&p1, &down)) * real(g2);
    lower + lower.adjoint() + both_atoms(&projector(Level::Rydberg)) * real(g3)
}

pub(crate) fn ecd_separable_at(omega: f64, f_mean: f64, t: f64) -> TwoAtomOperator {
    let (sin, cos) = (omega * t).sin_cos();
    let flip = transition(Level::Rydberg, Level::One) + transition(Level::One, Level::Rydberg);
    let a = flip * real(signed_root(omega, f_mean) * sin)
        - projector(Level::Rydberg) * real((omega * f_mean.abs()).sqrt() * cos);
    both_atoms(&a)
}

pub fn hamiltonian_adiabatic(
    params: &ModelParams,
    schedule: &PulseSchedule,
    t: f64,
) -> Result<TwoAtomOperator> {
    Ok(adiabatic_at(params.blockade, &schedule.sample(t)?))
}

/// `H_CD = H_CD,0 + H_CD,1` with purely imaginary couplings `±i f_k/2`.
pub fn hamiltonian_cd_exact(schedule: &PulseSchedule, t: f64) -> Result<TwoAtomOperator> {
    let (f0, f1) = cd_amplitudes(&schedule.sample(t)?);
    Ok(cd_exact_at(f0, f1))
}

/// The oscillating field
/// `g1(|r⟩⟨1|⊗P0 + P0⊗|r⟩⟨1|) + g2(|r⟩⟨1|⊗P1 + P1⊗|r⟩⟨1|) + h.c. + g3(Pr⊗1 + 1⊗Pr)`.
pub fn hamiltonian_ecd(params: &ModelParams, schedule: &PulseSchedule, t: f64) -> Result<TwoAtomOperator> {
    let (f0, f1) = cd_amplitudes(&schedule.sample(t)?);
    Ok(ecd_at(params.ecd_frequency, f0, f1, t))
}

/// Single-atom oscillating field `A⊗1 + 1⊗A` driven by `f̄ = (f0 + f1)/2`.
pub fn hamiltonian_ecd_separable(
    params: &ModelParams,
    schedule: &PulseSchedule,
    t: f64,
) -> Result<TwoAtomOperator> {
    let (f0, f1) = cd_amplitudes(&schedule.sample(t)?);
    Ok(ecd_separable_at(params.ecd_frequency, 0.5 * (f0 + f1), t))
}

/// Hamiltonian of the configured drive mode.
pub fn hamiltonian(params: &ModelParams, schedule: &PulseSchedule, t: f64) -> Result<TwoAtomOperator> {
    let s = schedule.sample(t)?;
    Ok(hamiltonian_at(params, &s, t))
}

pub(crate) fn hamiltonian_at(params: &ModelParams, s: &PulseSample, t: f64) -> TwoAtomOperator {
    let omega = params.ecd_frequency;
    match params.drive_mode {
        DriveMode::Adiabatic => adiabatic_at(params.blockade, s),
        DriveMode::ExactCd => {
            let (f0, f1) = cd_amplitudes(s);
            adiabatic_at(params.blockade, s) + cd_exact_at(f0, f1)
        }
        DriveMode::EcdOnly => {
            let (f0, f1) = cd_amplitudes(s);
            ecd_at(omega, f0, f1, t) + interaction(params.blockade)
        }
        DriveMode::Separable => {
            let (f0, f1) = cd_amplitudes(s);
            adiabatic_at(params.blockade, s) + ecd_separable_at(omega, 0.5 * (f0 + f1), t)
        }
    }
}

/// Relative eigenvalue gap below which the general CD formula refuses.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// `i Σ_{n≠m} |n⟩⟨n|∂tH|m⟩⟨m| / (E_m − E_n)` from the instantaneous
/// eigensystem of `h`.
pub fn cd_general_formula<const N: usize>(
    h: &SMatrix<C64, N, N>,
    dh: &SMatrix<C64, N, N>,
) -> Result<SMatrix<C64, N, N>> {
    let (values, vectors) = hermitian_eigen(h);
    cd_from_eigensystem(values.as_slice(), &vectors, dh)
}

/// As [`cd_general_formula`] with a caller-supplied eigensystem (columns of
/// `vectors`); any phase convention of the eigenvectors gives the same
/// result.
pub fn cd_from_eigensystem<const N: usize>(
    values: &[f64],
    vectors: &SMatrix<C64, N, N>,
    dh: &SMatrix<C64, N, N>,
) -> Result<SMatrix<C64, N, N>> {
    let scale = values.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let projected = vectors.adjoint() * dh * vectors;
    let mut inner = SMatrix::<C64, N, N>::zeros();
    for n in 0..N {
        for m in 0..N {
            if n == m {
                continue;
            }
            let gap = values[m] - values[n];
            if gap.abs() <= GAP_TOLERANCE * scale || gap == 0.0 {
                return Err(Error::Degenerate {
                    gap: if scale > 0.0 { gap.abs() / scale } else { 0.0 },
                    tolerance: GAP_TOLERANCE,
                });
            }
            inner[(n, m)] = I * projected[(n, m)] / gap;
        }
    }
    Ok(vectors * inner * vectors.adjoint())
}

/// `H_CD` assembled from the general formula applied to each decoupled
/// two-level block; an oracle for [`hamiltonian_cd_exact`].
pub fn cd_blockwise_oracle(s: &PulseSample) -> Result<TwoAtomOperator> {
    use TwoAtomBasis as B;
    let mut h = TwoAtomOperator::zeros();
    let single = cd_general_formula(
        &TwoLevelBlock::Single.hamiltonian(s),
        &TwoLevelBlock::Single.d_hamiltonian(s),
    )?;
    for (g, e) in [(B::S01, B::S0R), (B::S10, B::SR0)] {
        let idx = [g, e];
        for r in 0..2 {
            for col in 0..2 {
                h[(idx[r], idx[col])] = single[(r, col)];
            }
        }
    }
    let pair = cd_general_formula(
        &TwoLevelBlock::Pair.hamiltonian(s),
        &TwoLevelBlock::Pair.d_hamiltonian(s),
    )?;
    let kets = [B::ket(B::S11), B::d_plus()];
    for r in 0..2 {
        for col in 0..2 {
            h += kets[r] * kets[col].adjoint() * pair[(r, col)];
        }
    }
    Ok(h)
}

/// Blockaded `{|11⟩, |d+⟩}` model, `[[0, Ω/√2], [Ω/√2, Δ]]`.
pub fn reduced_model_blockaded(schedule: &PulseSchedule, t: f64) -> Result<Matrix2<C64>> {
    Ok(TwoLevelBlock::Pair.hamiltonian(&schedule.sample(t)?))
}

/// `{|11⟩, |d+⟩, |rr⟩}` block of `H(t)`.
pub fn blockade_block(s: &PulseSample, blockade: f64) -> Matrix3<C64> {
    let x = real(s.omega * FRAC_1_SQRT_2);
    Matrix3::new(
        ZERO,
        x,
        ZERO,
        x,
        real(s.delta),
        x,
        ZERO,
        x,
        real(2.0 * s.delta + blockade),
    )
}

/// Ratio `c_rr / c_+` obtained by setting `∂t c_rr = 0` in the three-state
/// block: `−Ω/(√2(2Δ + V))`.
pub fn eliminated_rydberg_ratio(s: &PulseSample, blockade: f64) -> f64 {
    -s.omega * FRAC_1_SQRT_2 / (2.0 * s.delta + blockade)
}

/// Largest `|f_k|` over a uniform sample of the protocol.
pub fn max_cd_amplitude(schedule: &PulseSchedule, samples: usize) -> f64 {
    let total = schedule.total_time();
    let n = samples.max(2);
    (0..n)
        .map(|k| {
            let s = schedule.sample_unchecked(total * k as f64 / (n - 1) as f64);
            let (f0, f1) = cd_amplitudes(&s);
            f0.abs().max(f1.abs())
        })
        .fold(0.0, f64::max)
}
