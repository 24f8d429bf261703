//! Three-qubit bit-flip code driven by CNOTs built from the simulated gate.
//!
//! Qubits are `q1, q2, q3, anc` with `q1` on the most significant bit of
//! the 16-dimensional register. Only the two-qubit gate is imperfect:
//! single-qubit rotations, the ancilla measurement and the recovery are
//! ideal.

use alloc::string::String;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix2, SMatrix, Vector2};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{c, kron2, max_abs, pauli, real, C64, ONE, ZERO};
use crate::tomography::{TargetConvention, TwoQubitOperator};

pub const QUBITS: usize = 4;
pub const DIM: usize = 16;
pub type RegisterOperator = SMatrix<C64, DIM, DIM>;

/// Register positions.
pub const Q1: usize = 0;
pub const Q2: usize = 1;
pub const Q3: usize = 2;
pub const ANC: usize = 3;

/// `exp(iθσ/2)` about axis `σ_1..σ_3`.
pub fn rotation(axis: usize, theta: f64) -> Matrix2<C64> {
    let (s, co) = (0.5 * theta).sin_cos();
    Matrix2::identity() * real(co) + pauli(axis) * c(0.0, s)
}

/// A two-qubit gate as a single Kraus operator, control on the more
/// significant index.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMap {
    pub label: String,
    pub kraus: TwoQubitOperator,
}

impl GateMap {
    /// Textbook CNOT.
    pub fn ideal_cnot() -> Self {
        let mut k = TwoQubitOperator::zeros();
        k[(0, 0)] = ONE;
        k[(1, 1)] = ONE;
        k[(2, 3)] = ONE;
        k[(3, 2)] = ONE;
        GateMap {
            label: String::from("ideal CNOT"),
            kraus: k,
        }
    }

    /// `max_ij |K†K − 1|`-style norm bound: largest singular value squared.
    pub fn kraus_norm(&self) -> f64 {
        let m = self.kraus.adjoint() * self.kraus;
        crate::linalg::hermitian_eigen(&m).0[3].max(0.0).sqrt()
    }
}

/// CNOT from a CZ-type gate given in `frame`:
/// `R_c^x(π) R_t^y(−π/2) CZ R_t^y(π/2) R_c^x(π)` with the gate first brought
/// to the native frame `diag(1, −1, −1, −1)` by a virtual `Z ⊗ Z` and a
/// final virtual `Z` on the control.
pub fn physical_cnot(cz: &TwoQubitOperator, frame: TargetConvention) -> GateMap {
    let native = frame.frame() * cz;
    let id = Matrix2::identity();
    let rc = kron2(&rotation(1, PI), &id);
    let ry_plus = kron2(&id, &rotation(2, PI / 2.0));
    let ry_minus = kron2(&id, &rotation(2, -PI / 2.0));
    let zc = kron2(&pauli(3), &id);
    GateMap {
        label: alloc::format!("CNOT from {} gate", frame.name()),
        kraus: zc * rc * ry_minus * native * ry_plus * rc,
    }
}

/// `max |K − e^{iθ}K_CNOT|` after aligning the global phase.
pub fn cnot_deviation(gate: &GateMap) -> f64 {
    crate::tomography::aligned_distance(&gate.kraus, &GateMap::ideal_cnot().kraus)
}

fn bit(index: usize, qubit: usize) -> usize {
    (index >> (QUBITS - 1 - qubit)) & 1
}

/// Single-qubit operator on `qubit` of the register.
pub fn embed_one(m: &Matrix2<C64>, qubit: usize) -> RegisterOperator {
    RegisterOperator::from_fn(|r, col| {
        let rest = !(1 << (QUBITS - 1 - qubit));
        if r & rest != col & rest {
            ZERO
        } else {
            m[(bit(r, qubit), bit(col, qubit))]
        }
    })
}

/// Two-qubit operator on `(a, b)`, `a` playing the more significant index.
pub fn embed_two(m: &TwoQubitOperator, a: usize, b: usize) -> RegisterOperator {
    let rest = !((1 << (QUBITS - 1 - a)) | (1 << (QUBITS - 1 - b)));
    RegisterOperator::from_fn(|r, col| {
        if r & rest != col & rest {
            ZERO
        } else {
            m[(2 * bit(r, a) + bit(r, b), 2 * bit(col, a) + bit(col, b))]
        }
    })
}

/// Register density matrix plus the probability lost from the qubit
/// subspace so far.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitState {
    pub rho: RegisterOperator,
    pub leakage: f64,
}

impl CircuitState {
    /// `|ψ⟩ ⊗ |000⟩`.
    pub fn encode_input(psi: &Vector2<C64>) -> Self {
        let mut v = SMatrix::<C64, DIM, 1>::zeros();
        v[0] = psi[0];
        v[1 << (QUBITS - 1)] = psi[1];
        CircuitState {
            rho: v * v.adjoint(),
            leakage: 0.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `ρ → KρK†`, booking the lost trace as leakage.
    pub fn apply(&mut self, k: &RegisterOperator) {
        let before = self.trace();
        self.rho = k * self.rho * k.adjoint();
        self.leakage += before - self.trace();
    }

    /// Ideal ancilla measurement followed by `X` on `q1` for outcome 1.
    pub fn measure_and_correct(&mut self) {
        let p0 = embed_one(&Matrix2::new(ONE, ZERO, ZERO, ZERO), ANC);
        let p1 = embed_one(&Matrix2::new(ZERO, ZERO, ZERO, ONE), ANC);
        let x1 = embed_one(&pauli(1), Q1);
        let zero = p0 * self.rho * p0;
        let one = x1 * p1 * self.rho * p1 * x1.adjoint();
        self.rho = zero + one;
    }

    /// Reduced state of `q1` (unnormalized).
    pub fn reduced_q1(&self) -> Matrix2<C64> {
        let half = DIM / 2;
        Matrix2::from_fn(|r, col| (0..half).map(|k| self.rho[(r * half + k, col * half + k)]).sum())
    }
}

/// Single-qubit input of the code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputState {
    Zero,
    One,
    Plus,
}

impl InputState {
    pub const ALL: [InputState; 3] = [InputState::Zero, InputState::One, InputState::Plus];

    pub fn vector(self) -> Vector2<C64> {
        match self {
            InputState::Zero => Vector2::new(ONE, ZERO),
            InputState::One => Vector2::new(ZERO, ONE),
            InputState::Plus => Vector2::new(real(FRAC_1_SQRT_2), real(FRAC_1_SQRT_2)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InputState::Zero => "0",
            InputState::One => "1",
            InputState::Plus => "+",
        }
    }
}

/// One input/flip combination of the benchmark suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub input: InputState,
    pub flip: bool,
}

impl Configuration {
    /// All six combinations, flip-free first.
    pub fn all() -> [Configuration; 6] {
        let mut out = [Configuration {
            input: InputState::Zero,
            flip: false,
        }; 6];
        for (k, flip) in [false, true].into_iter().enumerate() {
            for (j, input) in InputState::ALL.into_iter().enumerate() {
                out[3 * k + j] = Configuration { input, flip };
            }
        }
        out
    }

    /// `|1⟩` without a flip: the encoded register is `|111⟩`, so every
    /// two-qubit gate acts on its `|11⟩` input. It is left out of the
    /// five-configuration suite.
    pub fn is_excluded(self) -> bool {
        self.input == InputState::One && !self.flip
    }

    /// The five configurations of the benchmark suite.
    pub fn suite() -> impl Iterator<Item = Configuration> {
        Self::all().into_iter().filter(|c| !c.is_excluded())
    }

    pub fn label(self) -> String {
        alloc::format!("{}/{}", self.input.label(), if self.flip { "flip" } else { "no-flip" })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeOutcome {
    /// Renormalized state of `q1` after decoding.
    pub recovered: Matrix2<C64>,
    /// `⟨ψ|ρ|ψ⟩` of the renormalized state.
    pub fidelity: f64,
    pub leakage: f64,
}

/// Leakage above which the code run is abandoned.
pub const MAX_LEAKAGE: f64 = 0.5;

/// Encode, optionally flip `q1`, extract the syndrome, correct, decode.
pub fn run_code(input: &Vector2<C64>, flip: bool, cnot: &GateMap) -> Result<CodeOutcome> {
    let norm = input.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let gate = |a, b| embed_two(&cnot.kraus, a, b);
    let mut state = CircuitState::encode_input(input);
    state.apply(&gate(Q1, Q2));
    state.apply(&gate(Q1, Q3));
    if flip {
        state.apply(&embed_one(&pauli(1), Q1));
    }
    state.apply(&gate(Q1, ANC));
    state.apply(&gate(Q2, ANC));
    state.measure_and_correct();
    state.apply(&gate(Q1, Q3));
    state.apply(&gate(Q1, Q2));
    if state.leakage > MAX_LEAKAGE {
        return Err(Error::ExcessiveLeakage {
            leakage: state.leakage,
        });
    }
    let reduced = state.reduced_q1();
    let tr = reduced.trace().re;
    let recovered = reduced / real(tr);
    let fidelity = (input.adjoint() * recovered * input)[0].re;
    Ok(CodeOutcome {
        recovered,
        fidelity,
        leakage: state.leakage,
    })
}

/// Element-wise `|Δρ|` and `arg Δρ` (NaN where `|Δρ| ≤ 1e−12`).
pub fn density_matrix_deviation(
    recovered: &Matrix2<C64>,
    input: &Matrix2<C64>,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let d = recovered - input;
    (
        d.map(|z| z.norm()),
        d.map(|z| if z.norm() > 1e-12 { z.arg() } else { f64::NAN }),
    )
}

/// `max |ρ_out − ρ_in|`.
pub fn max_density_deviation(recovered: &Matrix2<C64>, input: &Vector2<C64>) -> f64 {
    max_abs(&(recovered - input * input.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;
    use proptest::prelude::*;

    fn cnot_action_matches(k: &TwoQubitOperator) -> bool {
        // ρ → KρK† on all 16 matrix units
        let ideal = GateMap::ideal_cnot().kraus;
        (0..16).all(|u| {
            let e = crate::tomography::matrix_unit(u);
            max_abs(&(k * e * k.adjoint() - ideal * e * ideal.adjoint())) < 1e-14
        })
    }

    #[test]
    fn rotations() {
        // R^x(π) = iσx
        assert!(max_abs(&(rotation(1, PI) - pauli(1) * c(0.0, 1.0))) < 1e-15);
        assert!(unitarity_defect(&rotation(2, 0.3)) < 1e-15);
    }

    #[test]
    fn ideal_gate_in_either_frame_gives_cnot() {
        for frame in TargetConvention::ALL {
            let g = physical_cnot(&frame.target(), frame);
            assert!(cnot_action_matches(&g.kraus), "{frame:?}");
            assert!(cnot_deviation(&g) < 1e-14);
        }
    }

    #[test]
    fn literal_composition_without_frame_handling() {
        // the bare sandwich around canonical CZ flips the target when the
        // control is |0⟩
        let id = Matrix2::identity();
        let rc = kron2(&rotation(1, PI), &id);
        let k = rc
            * kron2(&id, &rotation(2, -PI / 2.0))
            * TargetConvention::Canonical.target()
            * kron2(&id, &rotation(2, PI / 2.0))
            * rc;
        let zero_controlled = kron2(&Matrix2::new(ZERO, ZERO, ZERO, ONE), &id)
            + kron2(&Matrix2::new(ONE, ZERO, ZERO, ZERO), &pauli(1));
        assert!(crate::tomography::aligned_distance(&k, &zero_controlled) < 1e-14);
    }

    #[test]
    fn identity_gate_gives_single_qubit_unitary() {
        let g = physical_cnot(&TwoQubitOperator::identity(), TargetConvention::Native);
        // −Z on the control, nothing on the target
        let expected = kron2(&pauli(3), &Matrix2::identity());
        assert!(crate::tomography::aligned_distance(&g.kraus, &expected) < 1e-14);
        assert!(cnot_deviation(&g) > 0.5);
    }

    #[test]
    fn embedding_order() {
        // X on q1 maps |0000⟩ to |1000⟩ = index 8
        let x1 = embed_one(&pauli(1), Q1);
        assert_eq!(x1[(8, 0)], ONE);
        let cx = embed_two(&GateMap::ideal_cnot().kraus, Q1, ANC);
        assert_eq!(cx[(9, 8)], ONE);
        assert_eq!(cx[(1, 1)], ONE);
    }

    #[test]
    fn suite_has_five_configurations() {
        assert_eq!(Configuration::suite().count(), 5);
        assert!(Configuration::all().iter().any(|c| c.is_excluded()));
        assert_eq!(Configuration::all()[4].label(), "1/flip");
    }

    #[test]
    fn ideal_code_recovers_every_configuration() {
        let cnot = GateMap::ideal_cnot();
        for cfg in Configuration::all() {
            let psi = cfg.input.vector();
            let out = run_code(&psi, cfg.flip, &cnot).unwrap();
            assert!((out.fidelity - 1.0).abs() < 1e-14, "{}", cfg.label());
            assert!(out.leakage.abs() < 1e-14);
            let (mag, _) = density_matrix_deviation(&out.recovered, &(psi * psi.adjoint()));
            assert!(mag.max() < 1e-14);
        }
    }

    #[test]
    fn lossy_gate_books_leakage() {
        let mut cnot = GateMap::ideal_cnot();
        cnot.kraus *= real(0.99);
        let out = run_code(&InputState::Plus.vector(), true, &cnot).unwrap();
        // six gates, each keeping 0.99² of the trace
        assert!((out.leakage - (1.0 - 0.99f64.powi(12))).abs() < 1e-12);
        let mut bad = GateMap::ideal_cnot();
        bad.kraus *= real(0.5);
        assert!(matches!(
            run_code(&InputState::Zero.vector(), false, &bad),
            Err(Error::ExcessiveLeakage { .. })
        ));
    }

    #[test]
    fn measurement_branches_sum_to_reduced_state() {
        let cnot = GateMap::ideal_cnot();
        let mut s = CircuitState::encode_input(&InputState::Plus.vector());
        s.apply(&embed_two(&cnot.kraus, Q1, Q2));
        s.apply(&embed_one(&pauli(1), Q1));
        s.apply(&embed_two(&cnot.kraus, Q1, ANC));
        let before = s.rho;
        let p0 = embed_one(&Matrix2::new(ONE, ZERO, ZERO, ZERO), ANC);
        let p1 = embed_one(&Matrix2::new(ZERO, ZERO, ZERO, ONE), ANC);
        let branches = p0 * before * p0 + p1 * before * p1;
        // tracing out the ancilla commutes with the measurement
        let trace_anc = |m: &RegisterOperator| {
            SMatrix::<C64, 8, 8>::from_fn(|r, col| m[(2 * r, 2 * col)] + m[(2 * r + 1, 2 * col + 1)])
        };
        assert!(max_abs(&(trace_anc(&branches) - trace_anc(&before))) < 1e-15);
    }

    proptest! {
        #[test]
        fn ideal_code_is_identity_on_the_bloch_sphere(
            theta in 0.0f64..PI, phi in -PI..PI, flip in any::<bool>()
        ) {
            let psi = Vector2::new(real((0.5 * theta).cos()), C64::from_polar((0.5 * theta).sin(), phi));
            let out = run_code(&psi, flip, &GateMap::ideal_cnot()).unwrap();
            prop_assert!(max_density_deviation(&out.recovered, &psi) < 1e-13);
        }

        #[test]
        fn trace_plus_leakage_is_one(shrink in 0.9f64..1.0, flip in any::<bool>()) {
            let mut cnot = GateMap::ideal_cnot();
            cnot.kraus *= real(shrink);
            let mut s = CircuitState::encode_input(&InputState::Plus.vector());
            for (a, b) in [(Q1, Q2), (Q1, Q3), (Q1, ANC), (Q2, ANC)] {
                s.apply(&embed_two(&cnot.kraus, a, b));
                prop_assert!((s.trace() + s.leakage - 1.0).abs() < 1e-9);
            }
            if flip {
                s.apply(&embed_one(&pauli(1), Q1));
            }
            s.measure_and_correct();
            prop_assert!((s.trace() + s.leakage - 1.0).abs() < 1e-9);
        }
    }
}
