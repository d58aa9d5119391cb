//! Truncated Fock-space transformation of quantum states through lossy and
//! amplifying four-ports.
//!
//! Mode order is `(field 1, field 2, device 1, device 2)`: the input
//! four-vector `(a₁, a₂, g₁, g₂)` before the device, `(b₁, b₂, h₁, h₂)` after.
//! A single frequency bin per channel is modeled.

mod amplifier;
mod basis;
mod closed_form;
mod io;
mod passive;
mod states;
mod trace;

pub use amplifier::{
    amplifier_transform, amplifier_transform_density, decompose_amplifier, AmplifierDecomposition, AmplifierOutput,
    TruncationStatus, DEFAULT_AMPLIFIER_CUTOFF, DEFAULT_TRACE_DEFICIT_BOUND,
};
pub use basis::{Basis, Occupation, MAX_MODES};
pub use closed_form::{binomial_distribution, coincidence_distribution, output_channel_distribution, ChannelDistribution, DistributionMethod};
pub use io::{read_density, write_density};
pub use passive::{passive_transform, passive_transform_ensemble, passive_transform_ket};
pub use states::{ChannelPrep, FockDensity, FockEnsemble, FockKet, InputSpec};
pub use trace::partial_trace;

use thiserror::Error;

use crate::fourport::DeviceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("mode count must be 1..=4, got {0}")]
    ModeCount(usize),
    #[error("cutoff {cutoff} is below the {required} photons present; passive evolution needs cutoff >= {required}")]
    CutoffTooSmall { cutoff: usize, required: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("density matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace {0} exceeds 1")]
    TraceTooLarge(f64),
    #[error("partial trace needs a non-empty set of distinct modes within range")]
    InvalidKeep,
    #[error("channel index {0} out of range")]
    InvalidChannel(usize),
    #[error("dense matrix of dimension {0} is too large")]
    TooLarge(usize),
    #[error("Lambda is not a valid amplifier matrix (reconstruction residual {0:e})")]
    Decomposition(f64),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("state file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// `√(n!)` for n up to 170.
pub(crate) fn sqrt_factorial(n: usize) -> f64 {
    thread_local! {
        static TABLE: Vec<f64> = {
            let mut t = vec![1.0f64; 171];
            for k in 1..171 {
                t[k] = t[k - 1] * (k as f64).sqrt();
            }
            t
        };
    }
    TABLE.with(|t| t[n])
}
