//! Spontaneous decay of a two-level emitter in vacuum at height `z` above a
//! homogeneous dielectric half-space.
//!
//! The rate follows from the imaginary part of the Green tensor at the
//! emitter position,
//!
//! ```text
//! Γ = (2ω²/ħε₀c²) μ_k μ_k′ Im G_kk′(r_A, r_A, ω),
//! ```
//!
//! with the vacuum value `Im G_kk′ = (ω/6πc) δ_kk′`. For the half-space the
//! reflected part is a Sommerfeld integral over the in-plane wavevector
//! `s = k∥/k₀`:
//!
//! ```text
//! Im G_zz / (k₀/6π) = 1 + (3/2) Re ∫ s³/s_z r_p e^{2i s_z k₀z} ds
//! Im G_xx / (k₀/6π) = 1 + (3/4) Re ∫ s/s_z (r_s − s_z² r_p) e^{2i s_z k₀z} ds
//! ```
//!
//! `s_z = √(1 − s²)`, integrated with `s = sin θ` on the propagating part
//! and `s = cosh u` on the evanescent part, which removes the
//! inverse-square-root kink at the light line.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::constants::PhysicalConstants;
use crate::permittivity::{PermittivityError, PermittivityModel};
use crate::quadrature::adaptive_gk;

/// Default relative tolerance of the wavevector quadrature.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-9;
/// Evanescent tail cut once the envelope drops below this fraction of its peak.
pub const TAIL_CUTOFF: f64 = 1e-12;
const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecayError {
    #[error(transparent)]
    Permittivity(#[from] PermittivityError),
    #[error("invalid dipole: {0}")]
    InvalidDipole(&'static str),
    #[error("height must be positive and finite, got {0}")]
    InvalidHeight(f64),
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("lower medium has gain (Im eps = {0}); the rate is defined for Im eps >= 0")]
    Gain(f64),
    #[error("eps = -1: surface-plasmon pole, the near-surface rate diverges")]
    SurfaceModePole,
    #[error("sample at omega = {sample} rad/s does not match the dipole frequency {dipole} rad/s")]
    FrequencyMismatch { sample: f64, dipole: f64 },
    #[error("sample at z = {sample} m does not match the dipole height {dipole} m")]
    HeightMismatch { sample: f64, dipole: f64 },
    #[error("wavevector quadrature did not converge (error estimate {estimate:e})")]
    NoConvergence { estimate: f64 },
}

/// Point dipole emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dipole {
    /// Transition dipole moment [C·m].
    pub moment: [f64; 3],
    /// Transition frequency ω_A [rad/s].
    pub omega: f64,
    /// Height above the interface [m].
    pub z: f64,
}

impl Dipole {
    pub fn new(moment: [f64; 3], omega: f64, z: f64) -> Result<Self, DecayError> {
        if moment.iter().any(|m| !m.is_finite()) || moment.iter().all(|m| *m == 0.0) {
            return Err(DecayError::InvalidDipole("moment must be finite and nonzero"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(DecayError::InvalidFrequency(omega));
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(DecayError::InvalidHeight(z));
        }
        Ok(Self { moment, omega, z })
    }

    pub fn moment_sqr(&self) -> f64 {
        self.moment.iter().map(|m| m * m).sum()
    }

    /// `μ_z² / |μ|²`.
    pub fn perpendicular_fraction(&self) -> f64 {
        self.moment[2] * self.moment[2] / self.moment_sqr()
    }

    /// Dimensionless height `k₀ z = ω z / c`.
    pub fn reduced_height(&self) -> f64 {
        self.omega * self.z / PhysicalConstants::SI.c
    }
}

/// `Im G` at coincident points above the half-space [1/m].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfspaceGreenSample {
    pub omega: f64,
    pub z: f64,
    /// Free-space part `ω/6πc`, shared by all diagonal components.
    pub free_space: f64,
    /// Reflected contribution to `Im G_xx = Im G_yy`.
    pub scattered_xx: f64,
    /// Reflected contribution to `Im G_zz`.
    pub scattered_zz: f64,
    /// Absolute quadrature error estimate on the scattered parts.
    pub error_estimate: f64,
}

impl HalfspaceGreenSample {
    pub fn vacuum(omega: f64, z: f64) -> Self {
        Self {
            omega,
            z,
            free_space: vacuum_im_green(omega),
            scattered_xx: 0.0,
            scattered_zz: 0.0,
            error_estimate: 0.0,
        }
    }

    pub fn im_xx(&self) -> f64 {
        self.free_space + self.scattered_xx
    }

    pub fn im_yy(&self) -> f64 {
        self.im_xx()
    }

    pub fn im_zz(&self) -> f64 {
        self.free_space + self.scattered_zz
    }
}

/// `ω / 6πc` [1/m].
pub fn vacuum_im_green(omega: f64) -> f64 {
    omega / (6.0 * std::f64::consts::PI * PhysicalConstants::SI.c)
}

/// `Γ₀ = ω³|μ|²/(3πħε₀c³)`.
pub fn gamma_free_space(d: &Dipole) -> f64 {
    let k = PhysicalConstants::SI;
    d.omega.powi(3) * d.moment_sqr() / (3.0 * std::f64::consts::PI * k.hbar * k.epsilon0 * k.c.powi(3))
}

/// Fresnel coefficients `(r_s, r_p)` for vacuum above `eps`, given the
/// vacuum normal component `s_z`. The medium's `√(ε − s²)` is formed as
/// `√((ε − 1) + s_z²)`, which stays accurate near the light line.
pub fn fresnel(eps: Complex64, sz: Complex64) -> (Complex64, Complex64) {
    let sz1 = ((eps - 1.0) + sz * sz).sqrt();
    let rs = (sz - sz1) / (sz + sz1);
    let rp = (eps * sz - sz1) / (eps * sz + sz1);
    (rs, rp)
}

/// Upper limit in `u` (with `s = cosh u`) beyond which the envelope
/// `cosh³u · e^{−2a sinh u}` stays below [`TAIL_CUTOFF`] of its maximum.
fn evanescent_cutoff(a: f64) -> (f64, f64) {
    let log_env = |u: f64| 3.0 * (u.cosh().ln()) - 2.0 * a * u.sinh();
    let step = 0.05;
    let mut u = 0.0;
    let mut peak = (0.0, log_env(0.0));
    let limit = TAIL_CUTOFF.ln();
    loop {
        u += step;
        let l = log_env(u);
        if l > peak.1 {
            peak = (u, l);
        } else if l - peak.1 < limit {
            return (peak.0, u);
        }
    }
}

/// Reflected parts `(xx, zz)` in units of the vacuum value, and the error estimate.
fn scattered_ratio(eps: Complex64, a: f64, rel_tol: f64) -> Result<(f64, f64, f64), DecayError> {
    use std::f64::consts::FRAC_PI_2;
    let i = Complex64::new(0.0, 1.0);
    let n_abs = eps.norm().sqrt();

    let propagating = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let sz = Complex64::new(c, 0.0);
        let (rs, rp) = fresnel(eps, sz);
        let ph = (i * (2.0 * a * c)).exp();
        (0.75 * s * (rs - c * c * rp) * ph, 1.5 * s.powi(3) * rp * ph)
    };
    let evanescent = |u: f64| {
        let (sh, ch) = (u.sinh(), u.cosh());
        let sz = Complex64::new(0.0, sh);
        let (rs, rp) = fresnel(eps, sz);
        let decay = (-2.0 * a * sh).exp();
        (-i * 0.75 * ch * (rs + sh * sh * rp) * decay, -i * 1.5 * ch.powi(3) * rp * decay)
    };

    let mut theta_breaks = vec![0.0, FRAC_PI_2];
    if n_abs < 1.0 {
        theta_breaks.insert(1, n_abs.asin());
    }
    let (u_peak, u_max) = evanescent_cutoff(a);
    let mut u_breaks = vec![0.0, u_max];
    for b in [u_peak, if n_abs > 1.0 { n_abs.acosh() } else { 0.0 }] {
        if b > 0.0 && b < u_max {
            u_breaks.push(b);
        }
    }
    u_breaks.sort_by(f64::total_cmp);

    // absolute floor in units of the vacuum value
    let abs_tol = 1e-12;
    let mut total = [0.0f64; 2];
    let mut error = 0.0;
    for comp in 0..2 {
        let pick = |v: (Complex64, Complex64)| if comp == 0 { v.0 } else { v.1 };
        let p = adaptive_gk(|t| pick(propagating(t)), &theta_breaks, rel_tol, abs_tol, MAX_INTERVALS);
        let e = adaptive_gk(|u| pick(evanescent(u)), &u_breaks, rel_tol, abs_tol, MAX_INTERVALS);
        if !p.converged || !e.converged {
            return Err(DecayError::NoConvergence { estimate: p.error + e.error });
        }
        total[comp] = (p.value + e.value).re;
        error += p.error + e.error;
    }
    Ok((total[0], total[1], error))
}

/// `Im G` above a half-space with permittivity `eps` (vacuum above).
pub fn im_green_halfspace_eps(eps: Complex64, z: f64, omega: f64, rel_tol: f64) -> Result<HalfspaceGreenSample, DecayError> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(DecayError::InvalidHeight(z));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(DecayError::InvalidFrequency(omega));
    }
    if eps.im < 0.0 {
        return Err(DecayError::Gain(eps.im));
    }
    let free = vacuum_im_green(omega);
    let a = omega * z / PhysicalConstants::SI.c;
    let (xx, zz, err) = scattered_ratio(eps, a, rel_tol)?;
    Ok(HalfspaceGreenSample {
        omega,
        z,
        free_space: free,
        scattered_xx: free * xx,
        scattered_zz: free * zz,
        error_estimate: free * err,
    })
}

/// `Im G` above a half-space described by `model`, at the default tolerance.
pub fn im_green_halfspace(model: &PermittivityModel, z: f64, omega: f64) -> Result<HalfspaceGreenSample, DecayError> {
    let eps = model.eval_eps(omega)?;
    im_green_halfspace_eps(eps, z, omega, DEFAULT_QUADRATURE_TOL)
}

/// Decay rate from a Green-function sample.
pub fn gamma_rate(g: &HalfspaceGreenSample, d: &Dipole) -> Result<f64, DecayError> {
    if (g.omega - d.omega).abs() > 1e-12 * d.omega {
        return Err(DecayError::FrequencyMismatch { sample: g.omega, dipole: d.omega });
    }
    if (g.z - d.z).abs() > 1e-12 * d.z {
        return Err(DecayError::HeightMismatch { sample: g.z, dipole: d.z });
    }
    let k = PhysicalConstants::SI;
    let [mx, my, mz] = d.moment;
    let contraction = (mx * mx + my * my) * g.im_xx() + mz * mz * g.im_zz();
    Ok(2.0 * d.omega * d.omega / (k.hbar * k.epsilon0 * k.c * k.c) * contraction)
}

/// Nonradiative near-surface rate
/// `Γ₀ (1 + μ_z²/μ²) ε_I/|ε+1|² · 3c³/(2ω_A z)³`.
pub fn gamma_near_surface(eps: Complex64, d: &Dipole) -> Result<f64, DecayError> {
    if eps.im < 0.0 {
        return Err(DecayError::Gain(eps.im));
    }
    let denom = (eps + 1.0).norm_sqr();
    if denom == 0.0 {
        return Err(DecayError::SurfaceModePole);
    }
    let a = d.reduced_height();
    Ok(gamma_free_space(d) * (1.0 + d.perpendicular_fraction()) * eps.im / denom * 3.0 / (2.0 * a).powi(3))
}
