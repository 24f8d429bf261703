use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} μs is outside the protocol window [0, {total}] μs")]
    OutOfRange { t: f64, total: f64 },

    #[error("averaging window [{start}, {end}] μs crosses the phase boundary at {boundary} μs")]
    WindowCrossesBoundary { start: f64, end: f64, boundary: f64 },

    #[error("instantaneous spectrum is degenerate (relative gap {gap:.3e} < {tolerance:.1e})")]
    Degenerate { gap: f64, tolerance: f64 },

    #[error(
        "integration did not converge: {steps} steps after {halvings} halvings, \
         final-state change {change:.3e} above target {target:.1e}"
    )]
    NotConverged {
        steps: usize,
        halvings: u32,
        change: f64,
        target: f64,
    },

    #[error("phase of ⟨11|ψ⟩ is undefined (amplitude {amplitude:.3e})")]
    UndefinedPhase { amplitude: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("accumulated leakage {leakage:.4} exceeds 0.5, gate is far from its target")]
    ExcessiveLeakage { leakage: f64 },

    #[error("internal error: {0}")]
    Internal(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
