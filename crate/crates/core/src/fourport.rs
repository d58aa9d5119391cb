//! The 4×4 matrix Λ coupling the field amplitudes `a` and device
//! excitations `g` of a four-port to the outputs `b` and auxiliary device
//! modes `h`:
//!
//! ```text
//! Λ = [[ T,            A         ],
//!      [ −λ S C⁻¹ T,   C S⁻¹ A   ]],   C = √(T T†),  S = √(A A†)
//! ```
//!
//! For absorbing devices (λ = +1) Λ is unitary. For amplifying devices
//! (λ = −1) the device column acts on `g†` and Λ preserves
//! `J = diag(1, 1, −1, −1)`.

use nalgebra::Matrix2;
use serde::Serialize;
use thiserror::Error;

use crate::layered1d::ScatteringPair;
use crate::linalg::{c, hermitian_sqrt, max_abs, polar_unitary, spectral_norm, CMat2, CMat4, LinalgError};

/// Tolerance on `T T† ± A A† = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{kind:?} device violates its completeness relation by {residual:e}")]
    Completeness { kind: DeviceKind, residual: f64 },
    #[error("operation requires a {expected:?} device")]
    WrongKind { expected: DeviceKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    /// λ = +1, Λ ∈ U(4).
    Absorbing,
    /// λ = −1, Λ ∈ U(2,2).
    Amplifying,
}

impl DeviceKind {
    pub fn lambda(self) -> f64 {
        match self {
            DeviceKind::Absorbing => 1.0,
            DeviceKind::Amplifying => -1.0,
        }
    }

    /// Invariant metric: identity or `diag(1, 1, −1, −1)`.
    pub fn metric(self) -> CMat4 {
        let mut g = CMat4::identity();
        if self == DeviceKind::Amplifying {
            g[(2, 2)] = c(-1.0, 0.0);
            g[(3, 3)] = c(-1.0, 0.0);
        }
        g
    }
}

/// Transformation matrix `T`, absorption/gain matrix `A` and device class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceMatrices {
    t: CMat2,
    a: CMat2,
    kind: DeviceKind,
    /// Frequency annotation [rad/s], if known.
    pub omega: Option<f64>,
}

impl DeviceMatrices {
    /// Validates `T T† + λ A A† = I` within [`COMPLETENESS_TOL`].
    pub fn new(t: CMat2, a: CMat2, kind: DeviceKind) -> Result<Self, DeviceError> {
        let residual = completeness_residual(&t, &a, kind);
        if !(residual <= COMPLETENESS_TOL) {
            return Err(DeviceError::Completeness { kind, residual });
        }
        Ok(Self { t, a, kind, omega: None })
    }

    /// Absorbing device with the positive Hermitian gauge `A = √(I − T T†)`.
    pub fn absorbing(t: CMat2) -> Result<Self, DeviceError> {
        let a = hermitian_sqrt(&(CMat2::identity() - t * t.adjoint()))?;
        Self::new(t, a, DeviceKind::Absorbing)
    }

    /// Amplifier with `T = cosh r · I`, `A = sinh r · I` (two independent
    /// two-mode squeezers).
    pub fn squeezer(r: f64) -> Self {
        Self {
            t: CMat2::identity() * c(r.cosh(), 0.0),
            a: CMat2::identity() * c(r.sinh(), 0.0),
            kind: DeviceKind::Amplifying,
            omega: None,
        }
    }

    pub fn from_scattering(pair: &ScatteringPair) -> Result<Self, DeviceError> {
        let mut d = Self::new(pair.t, pair.a, pair.kind)?;
        d.omega = Some(pair.omega);
        Ok(d)
    }

    pub fn t(&self) -> &CMat2 {
        &self.t
    }

    pub fn a(&self) -> &CMat2 {
        &self.a
    }

    pub fn kind(&self) -> DeviceKind {
        self.kind
    }

    /// Same device with `A → A·V`; leaves `A A†` unchanged for unitary `V`.
    pub fn with_gauge(&self, v: &CMat2) -> Result<Self, DeviceError> {
        let mut d = Self::new(self.t, self.a * v, self.kind)?;
        d.omega = self.omega;
        Ok(d)
    }
}

fn completeness_residual(t: &CMat2, a: &CMat2, kind: DeviceKind) -> f64 {
    let r = t * t.adjoint() + a * a.adjoint() * c(kind.lambda(), 0.0) - CMat2::identity();
    max_abs(&r)
}

/// Λ together with its device class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMatrix {
    m: CMat4,
    kind: DeviceKind,
}

impl LambdaMatrix {
    /// Wraps an arbitrary 4×4 matrix, e.g. for diagnostics.
    pub fn from_raw(m: CMat4, kind: DeviceKind) -> Self {
        Self { m, kind }
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.m
    }

    pub fn kind(&self) -> DeviceKind {
        self.kind
    }

    pub fn block(&self, row: usize, col: usize) -> CMat2 {
        self.m.fixed_view::<2, 2>(2 * row, 2 * col).into_owned()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: self.m * c(s, 0.0), kind: self.kind }
    }
}

/// Builds Λ from the device matrices.
///
/// `C⁻¹T` and `S⁻¹A` are taken as the unitary polar factors of `T` and `A`
/// (`W V†` from their SVDs), which is the continuous extension of the
/// inverse to singular `C` or `S`. The top-left block is `T` verbatim.
pub fn build_lambda(dev: &DeviceMatrices) -> Result<LambdaMatrix, DeviceError> {
    let t = dev.t;
    let a = dev.a;
    let cmat = hermitian_sqrt(&(t * t.adjoint()))?;
    let smat = hermitian_sqrt(&(a * a.adjoint()))?;
    let ut = polar_unitary(&t);
    let ua = polar_unitary(&a);
    let lower_left = smat * ut * c(-dev.kind.lambda(), 0.0);
    let lower_right = cmat * ua;

    let mut m = CMat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&t);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&a);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&lower_left);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&lower_right);
    Ok(LambdaMatrix { m, kind: dev.kind })
}

/// Deviation of Λ from its group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupResidual {
    /// Spectral norm of `Λ G Λ† − G` with `G` the metric of the device class.
    pub isometry: f64,
    /// `|det Λ| − 1`.
    pub det_deviation: f64,
}

pub fn check_group(lambda: &LambdaMatrix) -> GroupResidual {
    let g = lambda.kind.metric();
    let r = lambda.m * g * lambda.m.adjoint() - g;
    GroupResidual { isometry: spectral_norm(&r), det_deviation: lambda.m.determinant().norm() - 1.0 }
}

/// 2×2 helper used by tests and the CLI.
pub fn cmat2(rows: [[(f64, f64); 2]; 2]) -> CMat2 {
    Matrix2::new(
        c(rows[0][0].0, rows[0][0].1),
        c(rows[0][1].0, rows[0][1].1),
        c(rows[1][0].0, rows[1][0].1),
        c(rows[1][1].0, rows[1][1].1),
    )
}
