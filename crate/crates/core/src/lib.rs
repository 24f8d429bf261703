//! Shortcut-to-adiabatic controlled-phase gate for two Rydberg atoms.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! * [`pulses`] builds the three-phase Rabi/detuning schedule.
//! * [`model`] builds the adiabatic, counterdiabatic and effective
//!   counterdiabatic (oscillating) Hamiltonians on the 9-dimensional
//!   two-atom space, plus the reduced blockade models.
//! * [`propagate`] integrates the Schrödinger equation and checks the
//!   one-period Magnus construction of the oscillating drive.
//! * [`metrics`] computes infidelities, phase errors and parameter sweeps.
//! * [`tomography`] reconstructs the χ-matrix of the simulated gate.
//! * [`qec`] runs a three-qubit bit-flip code with CNOTs built from the
//!   simulated gate.
//!
//! Frequencies are angular frequencies in rad/μs and times are in μs
//! throughout; see [`units`] for the MHz conversion.

#![no_std]
// float methods come from `num_traits::Float`, or from std whenever std is linked anywhere in the build
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod propagate;
pub mod pulses;
pub mod qec;
pub mod tomography;
pub mod units;

pub use basis::{Level, TwoAtomBasis};
pub use error::{Error, Result};
pub use linalg::{TwoAtomOperator, TwoAtomState, C64};
pub use model::{DriveMode, ModelParams};
pub use propagate::{Method, PropagationConfig, PropagationResult};
pub use pulses::{DetuningShape, PulseParams, PulseSchedule};
