//! Numerics for macroscopic QED in absorbing and amplifying dielectrics.
//!
//! * [`permittivity`]: causal permittivity models, a Kramers–Kronig transform
//!   and the split of anisotropic loss/gain tensors into noise couplings.
//! * [`layered1d`]: scattering amplitudes, Green functions and the
//!   absorption sum rule for one-dimensional multilayers.
//! * [`fourport`]: the 4×4 matrix coupling field and device channels of a
//!   lossy (unitary) or amplifying (pseudo-unitary) four-port.
//! * [`fockspace`]: exact truncated Fock-space transformation of quantum
//!   states through such devices.
//! * [`decay`]: spontaneous-emission rates of a dipole above an absorbing
//!   half-space.

pub mod constants;
pub mod decay;
pub mod fockspace;
pub mod fourport;
pub mod layered1d;
pub mod linalg;
pub mod permittivity;
pub mod quadrature;

pub use constants::PhysicalConstants;
pub use decay::{Dipole, HalfspaceGreenSample};
pub use fockspace::{FockDensity, FockEnsemble, FockKet, InputSpec};
pub use fourport::{DeviceKind, DeviceMatrices, LambdaMatrix};
pub use layered1d::{DielectricStack, Layer, ScatteringPair};
pub use linalg::{CMat2, CMat4, C64};
pub use permittivity::{GammaPair, LorentzModel, LorentzTerm, PermittivityModel, TabulatedModel, TensorPermittivity};

use thiserror::Error;

/// Umbrella error for callers that mix modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Permittivity(#[from] permittivity::PermittivityError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Layered(#[from] layered1d::LayeredError),
    #[error(transparent)]
    Device(#[from] fourport::DeviceError),
    #[error(transparent)]
    Fock(#[from] fockspace::FockError),
    #[error(transparent)]
    Decay(#[from] decay::DecayError),
}
