//! Process tomography of the simulated gate on the qubit subspace.
//!
//! The process is written as `E(ρ) = Σ_ij χ_ij A_i ρ A_j†` with
//! `A_{4j+k} = σ_j ⊗ σ_k` over `(I, X, Y, Z)`, so the order is
//! `II, IX, IY, IZ, XI, …, ZZ`.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix};

use crate::basis::TwoAtomBasis;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_defect, kron2, max_abs, pauli, real, TwoAtomOperator, C64, ZERO};

pub type TwoQubitOperator = Matrix4<C64>;
pub type ChiMatrix = SMatrix<C64, 16, 16>;

const PAULI_SYMBOLS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// `σ_{i/4} ⊗ σ_{i%4}`.
pub fn pauli_product(i: usize) -> TwoQubitOperator {
    kron2(&pauli(i / 4), &pauli(i % 4))
}

/// `"II"`, `"IX"`, …, `"ZZ"`.
pub fn pauli_label(i: usize) -> String {
    [PAULI_SYMBOLS[i / 4], PAULI_SYMBOLS[i % 4]].iter().collect()
}

/// Which ideal gate the simulated one is compared with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TargetConvention {
    /// `diag(1, −1, −1, −1)`, what the protocol produces.
    #[default]
    Native,
    /// `diag(1, 1, 1, −1)`; the measured gate gets a virtual `Z ⊗ Z` first.
    Canonical,
}

impl TargetConvention {
    pub const ALL: [TargetConvention; 2] = [TargetConvention::Native, TargetConvention::Canonical];

    pub fn name(self) -> &'static str {
        match self {
            TargetConvention::Native => "native",
            TargetConvention::Canonical => "canonical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn target(self) -> TwoQubitOperator {
        let d = match self {
            TargetConvention::Native => [1.0, -1.0, -1.0, -1.0],
            TargetConvention::Canonical => [1.0, 1.0, 1.0, -1.0],
        };
        Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|i, _| real(d[i])))
    }

    /// Virtual single-qubit frame change taking the native gate to this
    /// convention.
    pub fn frame(self) -> TwoQubitOperator {
        match self {
            TargetConvention::Native => Matrix4::identity(),
            TargetConvention::Canonical => kron2(&pauli(3), &pauli(3)),
        }
    }
}

/// `K = P U P` on `span{|00⟩, |01⟩, |10⟩, |11⟩}`.
pub fn process_from_propagator(u: &TwoAtomOperator) -> TwoQubitOperator {
    let idx = TwoAtomBasis::COMPUTATIONAL;
    Matrix4::from_fn(|r, col| u[(idx[r], idx[col])])
}

/// `K ρ K†`.
pub fn apply_kraus(k: &TwoQubitOperator, rho: &TwoQubitOperator) -> TwoQubitOperator {
    k * rho * k.adjoint()
}

/// `|a⟩⟨b|` on the qubit pair, `index = 4a + b`.
pub fn matrix_unit(index: usize) -> TwoQubitOperator {
    let mut e = Matrix4::zeros();
    e[(index / 4, index % 4)] = real(1.0);
    e
}

/// χ of a map by linear inversion over the 16 matrix units.
pub fn reconstruct_chi(map: impl Fn(&TwoQubitOperator) -> TwoQubitOperator) -> Result<ChiMatrix> {
    // Unknown χ_ij sits in column 16i + j; row 16·unit + 4c + d holds the
    // (c, d) entry of the output for that unit.
    let basis: Vec<TwoQubitOperator> = (0..16).map(pauli_product).collect();
    let mut system = DMatrix::<C64>::zeros(256, 256);
    let mut rhs = DVector::<C64>::zeros(256);
    for unit in 0..16 {
        let e = matrix_unit(unit);
        let out = map(&e);
        for i in 0..16 {
            let left = basis[i] * e;
            for j in 0..16 {
                let term = left * basis[j].adjoint();
                for entry in 0..16 {
                    system[(16 * unit + entry, 16 * i + j)] = term[(entry / 4, entry % 4)];
                }
            }
        }
        for entry in 0..16 {
            rhs[16 * unit + entry] = out[(entry / 4, entry % 4)];
        }
    }
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or(Error::Internal("Pauli-pair system is singular"))?;
    let chi = ChiMatrix::from_fn(|i, j| solution[16 * i + j]);
    Ok((chi + chi.adjoint()) * real(0.5))
}

/// χ of the single-Kraus process `ρ → KρK†`.
pub fn chi_of_process(k: &TwoQubitOperator) -> Result<ChiMatrix> {
    reconstruct_chi(|rho| apply_kraus(k, rho))
}

/// `Σ_ij χ_ij A_i ρ A_j†`.
pub fn apply_chi(chi: &ChiMatrix, rho: &TwoQubitOperator) -> TwoQubitOperator {
    let basis: Vec<TwoQubitOperator> = (0..16).map(pauli_product).collect();
    let mut out = Matrix4::zeros();
    for i in 0..16 {
        let left = basis[i] * rho;
        for j in 0..16 {
            if chi[(i, j)] != ZERO {
                out += left * basis[j].adjoint() * chi[(i, j)];
            }
        }
    }
    out
}

/// Smallest eigenvalue of χ (χ is Hermitian by construction).
pub fn min_eigenvalue(chi: &ChiMatrix) -> f64 {
    hermitian_eigen(chi).0[0]
}

pub fn trace(chi: &ChiMatrix) -> f64 {
    (0..16).map(|i| chi[(i, i)].re).sum()
}

/// Element-wise `|Δχ|` and `arg Δχ`; the phase is NaN where
/// `|Δχ| ≤ 1e−12`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiDeviation {
    pub magnitude: SMatrix<f64, 16, 16>,
    pub phase: SMatrix<f64, 16, 16>,
}

impl ChiDeviation {
    pub fn max(&self) -> f64 {
        self.magnitude.iter().fold(0.0, |m, x| m.max(*x))
    }
}

pub fn chi_deviation(chi: &ChiMatrix, reference: &ChiMatrix) -> ChiDeviation {
    let delta = chi - reference;
    ChiDeviation {
        magnitude: delta.map(|z| z.norm()),
        phase: delta.map(|z| if z.norm() > 1e-12 { z.arg() } else { f64::NAN }),
    }
}

/// Tomography of a simulated gate against one target convention.
#[derive(Clone, Debug, PartialEq)]
pub struct GateTomography {
    pub convention: TargetConvention,
    /// Qubit-subspace Kraus operator after the convention's frame change.
    pub kraus: TwoQubitOperator,
    pub chi: ChiMatrix,
    pub reference: ChiMatrix,
    pub deviation: ChiDeviation,
    /// `1 − Tr(K†K)/4`, the state-averaged leakage.
    pub trace_loss: f64,
    pub hermiticity_defect: f64,
}

pub fn gate_tomography(u: &TwoAtomOperator, convention: TargetConvention) -> Result<GateTomography> {
    let kraus = convention.frame() * process_from_propagator(u);
    let chi = chi_of_process(&kraus)?;
    let reference = chi_of_process(&convention.target())?;
    let deviation = chi_deviation(&chi, &reference);
    let trace_loss = 1.0 - (kraus.adjoint() * kraus).trace().re / 4.0;
    Ok(GateTomography {
        convention,
        kraus,
        hermiticity_defect: hermiticity_defect(&chi),
        chi,
        reference,
        deviation,
        trace_loss,
    })
}

/// Runs both conventions and returns them with the better one first.
pub fn best_convention(u: &TwoAtomOperator) -> Result<[GateTomography; 2]> {
    let native = gate_tomography(u, TargetConvention::Native)?;
    let canonical = gate_tomography(u, TargetConvention::Canonical)?;
    Ok(if canonical.deviation.max() < native.deviation.max() {
        [canonical, native]
    } else {
        [native, canonical]
    })
}

/// `max |K − e^{iθ}K_ref|` with the global phase θ chosen to align the
/// two operators.
pub fn aligned_distance(k: &TwoQubitOperator, reference: &TwoQubitOperator) -> f64 {
    let overlap = (reference.adjoint() * k).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        real(1.0)
    };
    max_abs(&(k - reference * phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;

    // Choi oracle: χ_ij = vec(A_i)† J vec(A_j) / 16 with
    // J = Σ_ab E(|a⟩⟨b|) ⊗ |a⟩⟨b| and row-major vec.
    fn chi_via_choi(k: &TwoQubitOperator) -> ChiMatrix {
        let mut j = SMatrix::<C64, 16, 16>::zeros();
        for unit in 0..16 {
            let out = apply_kraus(k, &matrix_unit(unit));
            let e = matrix_unit(unit);
            for r in 0..16 {
                for col in 0..16 {
                    j[(r, col)] += out[(r / 4, col / 4)] * e[(r % 4, col % 4)];
                }
            }
        }
        let vecs: Vec<nalgebra::SVector<C64, 16>> = (0..16)
            .map(|i| {
                let a = pauli_product(i);
                nalgebra::SVector::<C64, 16>::from_fn(|r, _| a[(r / 4, r % 4)])
            })
            .collect();
        ChiMatrix::from_fn(|a, b| (vecs[a].adjoint() * j * vecs[b])[0] / 16.0)
    }

    fn random_unitary(seed: [f64; 32]) -> TwoQubitOperator {
        let h = Matrix4::from_fn(|r, col| c(seed[4 * r + col], seed[16 + 4 * r + col]));
        let h = (h + h.adjoint()) * real(0.5);
        crate::linalg::evolution_operator(&h, 1.0)
    }

    #[test]
    fn labels_and_order() {
        assert_eq!(pauli_label(0), "II");
        assert_eq!(pauli_label(1), "IX");
        assert_eq!(pauli_label(4), "XI");
        assert_eq!(pauli_label(15), "ZZ");
        assert_eq!(TargetConvention::parse("canonical"), Some(TargetConvention::Canonical));
    }

    #[test]
    fn identity_process() {
        let u = TwoAtomOperator::identity();
        let k = process_from_propagator(&u);
        assert_eq!(k, Matrix4::identity());
        let chi = chi_of_process(&k).unwrap();
        let mut expected = ChiMatrix::zeros();
        expected[(0, 0)] = real(1.0);
        assert!(max_abs(&(chi - expected)) < 1e-13);
    }

    #[test]
    fn canonical_cz_chi() {
        // CZ = (II + IZ + ZI − ZZ)/2
        let chi = chi_of_process(&TargetConvention::Canonical.target()).unwrap();
        let mut v = nalgebra::SVector::<C64, 16>::zeros();
        v[0] = real(0.5);
        v[3] = real(0.5);
        v[12] = real(0.5);
        v[15] = real(-0.5);
        assert!(max_abs(&(chi - v * v.adjoint())) < 1e-13);
    }

    #[test]
    fn native_gate_chi() {
        // diag(1, −1, −1, −1) = (−II + IZ + ZI + ZZ)/2
        let chi = chi_of_process(&TargetConvention::Native.target()).unwrap();
        let mut v = nalgebra::SVector::<C64, 16>::zeros();
        v[0] = real(-0.5);
        v[3] = real(0.5);
        v[12] = real(0.5);
        v[15] = real(0.5);
        assert!(max_abs(&(chi - v * v.adjoint())) < 1e-13);
    }

    #[test]
    fn frame_change_maps_native_to_canonical() {
        let k = TargetConvention::Canonical.frame() * TargetConvention::Native.target();
        assert!(max_abs(&(k - TargetConvention::Canonical.target())) < 1e-15);
    }

    #[test]
    fn identical_inputs_have_zero_deviation() {
        let chi = chi_of_process(&TargetConvention::Native.target()).unwrap();
        let d = chi_deviation(&chi, &chi);
        assert_eq!(d.max(), 0.0);
        assert!(d.phase.iter().all(|p| p.is_nan()));
    }

    #[test]
    fn trace_loss_tracks_leakage() {
        // shrink one column: the |11⟩ input loses 19% of its norm
        let mut u = TwoAtomOperator::identity();
        u[(TwoAtomBasis::S11, TwoAtomBasis::S11)] = real(0.9);
        let t = gate_tomography(&u, TargetConvention::Native).unwrap();
        assert!((t.trace_loss - 0.19 / 4.0).abs() < 1e-14);
        assert!((trace(&t.chi) - (1.0 - t.trace_loss)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn reconstruction_matches_choi_oracle(seed in proptest::array::uniform32(-1.0f64..1.0), shrink in 0.8f64..1.0) {
            let k = random_unitary(seed) * real(shrink);
            let chi = chi_of_process(&k).unwrap();
            prop_assert!(max_abs(&(chi - chi_via_choi(&k))) < 1e-12);
            prop_assert!(hermiticity_defect(&chi) < 1e-10);
            prop_assert!(min_eigenvalue(&chi) > -1e-10);
            prop_assert!(trace(&chi) <= 1.0 + 1e-12);
        }

        #[test]
        fn chi_resynthesizes_the_map(
            seed in proptest::array::uniform32(-1.0f64..1.0),
            state in proptest::array::uniform8(-1.0f64..1.0),
        ) {
            let k = random_unitary(seed);
            let chi = chi_of_process(&k).unwrap();
            let psi = nalgebra::Vector4::from_fn(|i, _| c(state[i], state[4 + i]));
            prop_assume!(psi.norm() > 1e-3);
            let psi = psi / real(psi.norm());
            let rho = psi * psi.adjoint();
            prop_assert!(max_abs(&(apply_chi(&chi, &rho) - apply_kraus(&k, &rho))) < 1e-10);
        }

        #[test]
        fn conventions_agree_on_max_deviation(seed in proptest::array::uniform32(-0.05f64..0.05)) {
            // a gate near the native one
            let k = TargetConvention::Native.target() * random_unitary(seed);
            let mut u = TwoAtomOperator::identity();
            for (r, &i) in TwoAtomBasis::COMPUTATIONAL.iter().enumerate() {
                for (col, &j) in TwoAtomBasis::COMPUTATIONAL.iter().enumerate() {
                    u[(i, j)] = k[(r, col)];
                }
            }
            let [a, b] = best_convention(&u).unwrap();
            prop_assert!((a.deviation.max() - b.deviation.max()).abs() < 1e-12);
        }
    }
}
