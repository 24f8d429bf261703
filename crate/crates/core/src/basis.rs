//! The two-atom basis `{0,1,r} ⊗ {0,1,r}`.
//!
//! Index of `|ab⟩` is `3a + b`, with the first atom on the more significant
//! digit, so the ordering is `00, 01, 0r, 10, 11, 1r, r0, r1, rr`.

use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix3;

use crate::linalg::{real, TwoAtomState, C64, ONE, ZERO};

/// Single-atom level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Zero = 0,
    One = 1,
    Rydberg = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Zero, Level::One, Level::Rydberg];

    pub fn symbol(self) -> char {
        match self {
            Level::Zero => '0',
            Level::One => '1',
            Level::Rydberg => 'r',
        }
    }
}

/// Named indices and derived vectors of the two-atom basis.
pub struct TwoAtomBasis;

impl TwoAtomBasis {
    pub const DIM: usize = 9;
    pub const LABELS: [&'static str; 9] = ["00", "01", "0r", "10", "11", "1r", "r0", "r1", "rr"];

    pub const S00: usize = 0;
    pub const S01: usize = 1;
    pub const S0R: usize = 2;
    pub const S10: usize = 3;
    pub const S11: usize = 4;
    pub const S1R: usize = 5;
    pub const SR0: usize = 6;
    pub const SR1: usize = 7;
    pub const SRR: usize = 8;

    /// Qubit subspace in the order `00, 01, 10, 11`.
    pub const COMPUTATIONAL: [usize; 4] = [Self::S00, Self::S01, Self::S10, Self::S11];

    /// Subspaces left invariant by every drive: which atoms sit in `|0⟩` is
    /// conserved.
    pub const INVARIANT_BLOCKS: [&'static [usize]; 4] = [
        &[Self::S00],
        &[Self::S01, Self::S0R],
        &[Self::S10, Self::SR0],
        &[Self::S11, Self::S1R, Self::SR1, Self::SRR],
    ];

    pub const fn index(a: Level, b: Level) -> usize {
        3 * a as usize + b as usize
    }

    pub fn levels(index: usize) -> (Level, Level) {
        (Level::ALL[index / 3], Level::ALL[index % 3])
    }

    pub fn label(index: usize) -> &'static str {
        Self::LABELS[index]
    }

    /// Parses `"11"`, `"|0r⟩"`, `"1r"` and so on.
    pub fn parse(label: &str) -> Option<usize> {
        let trimmed = label
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('⟩')
            .trim_end_matches('>');
        Self::LABELS.iter().position(|l| *l == trimmed)
    }

    pub fn ket(index: usize) -> TwoAtomState {
        let mut v = TwoAtomState::zeros();
        v[index] = ONE;
        v
    }

    /// `(|1r⟩ + |r1⟩)/√2`, the blockade-coupled partner of `|11⟩`.
    pub fn d_plus() -> TwoAtomState {
        let mut v = TwoAtomState::zeros();
        v[Self::S1R] = real(FRAC_1_SQRT_2);
        v[Self::SR1] = real(FRAC_1_SQRT_2);
        v
    }

    /// `(|r1⟩ − |1r⟩)/√2`, never driven.
    pub fn d_minus() -> TwoAtomState {
        let mut v = TwoAtomState::zeros();
        v[Self::SR1] = real(FRAC_1_SQRT_2);
        v[Self::S1R] = real(-FRAC_1_SQRT_2);
        v
    }

    pub fn is_computational(index: usize) -> bool {
        Self::COMPUTATIONAL.contains(&index)
    }
}

/// `|to⟩⟨from|` on a single atom.
pub fn transition(to: Level, from: Level) -> Matrix3<C64> {
    let mut m = Matrix3::from_element(ZERO);
    m[(to as usize, from as usize)] = ONE;
    m
}

/// `|x⟩⟨x|` on a single atom.
pub fn projector(level: Level) -> Matrix3<C64> {
    transition(level, level)
}
