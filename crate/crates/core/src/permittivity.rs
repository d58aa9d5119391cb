//! Causal permittivity models, a numerical Kramers–Kronig transform and the
//! splitting of an anisotropic loss/gain tensor into noise-coupling matrices.
//!
//! Frequencies are angular frequencies in rad/s throughout.

use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative KK deviation below which a model is reported as causal-consistent.
pub const DEFAULT_KK_TOLERANCE: f64 = 0.01;

/// Relative eigenvalue magnitude (against the spectral norm) treated as zero
/// by [`gamma_decompose`].
pub const EIGEN_ZERO_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PermittivityError {
    #[error("invalid Lorentz term {index}: {reason}")]
    InvalidTerm { index: usize, reason: &'static str },

    #[error("frequency {omega} rad/s is outside the tabulated range [{min}, {max}]")]
    OutOfRange { omega: f64, min: f64, max: f64 },

    #[error("invalid tabulated data: {0}")]
    InvalidTable(&'static str),

    #[error("permittivity is singular at {omega} rad/s")]
    Singular { omega: f64 },

    #[error("KK evaluation frequency {omega} must lie strictly inside ({min}, {max})")]
    KkOutsideGrid { omega: f64, min: f64, max: f64 },

    #[error("tensor is not symmetric (|e_ij - e_ji| = {asymmetry})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite frequency {0}")]
    NonFinite(f64),
}

/// One damped oscillator contributing `ω_p² / (ω_T² − ω² − iγω)` to ε − 1.
///
/// A term with zero resonance frequency is a Drude term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzTerm {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

impl LorentzTerm {
    pub fn new(strength: f64, resonance: f64, damping: f64) -> Self {
        Self { strength, resonance, damping }
    }

    fn susceptibility(&self, omega: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let denom = self.resonance * self.resonance - omega * omega - i * self.damping * omega;
        self.strength * self.strength / denom
    }
}

/// Sum of Lorentz (and Drude) oscillators. Poles lie strictly in the lower
/// half-plane, so the model is holomorphic in the upper half-plane and tends
/// to one at high frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorentzModel {
    terms: Vec<LorentzTerm>,
}

impl LorentzModel {
    pub fn new(terms: Vec<LorentzTerm>) -> Result<Self, PermittivityError> {
        for (index, t) in terms.iter().enumerate() {
            if !(t.strength.is_finite() && t.resonance.is_finite() && t.damping.is_finite()) {
                return Err(PermittivityError::InvalidTerm { index, reason: "non-finite parameter" });
            }
            if t.damping <= 0.0 {
                return Err(PermittivityError::InvalidTerm { index, reason: "damping must be > 0" });
            }
            if t.strength < 0.0 {
                return Err(PermittivityError::InvalidTerm { index, reason: "strength must be >= 0" });
            }
            if t.resonance < 0.0 {
                return Err(PermittivityError::InvalidTerm { index, reason: "resonance must be >= 0" });
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[LorentzTerm] {
        &self.terms
    }

    /// Evaluates the model formula at any real frequency, including negative ones.
    pub fn eval(&self, omega: f64) -> Complex64 {
        self.eval_complex(Complex64::new(omega, 0.0))
    }

    /// Analytic continuation to complex frequency.
    pub fn eval_complex(&self, omega: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) + self.terms.iter().map(|t| t.susceptibility(omega)).sum::<Complex64>()
    }

    pub fn max_resonance(&self) -> f64 {
        self.terms.iter().map(|t| t.resonance).fold(0.0, f64::max)
    }

    fn has_drude_term(&self) -> bool {
        self.terms.iter().any(|t| t.resonance == 0.0 && t.strength > 0.0)
    }
}

/// Measured permittivity samples, linearly interpolated in both parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedModel {
    grid: Vec<f64>,
    values: Vec<Complex64>,
}

impl TabulatedModel {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self, PermittivityError> {
        if grid.len() < 2 {
            return Err(PermittivityError::InvalidTable("grid needs at least two points"));
        }
        if grid.len() != values.len() {
            return Err(PermittivityError::InvalidTable("grid and value lengths differ"));
        }
        if grid.iter().any(|w| !w.is_finite()) {
            return Err(PermittivityError::InvalidTable("non-finite grid frequency"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PermittivityError::InvalidTable("grid must be strictly increasing"));
        }
        if values.iter().any(|v| v.re.is_nan() || v.im.is_nan()) {
            return Err(PermittivityError::InvalidTable("NaN sample"));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64, PermittivityError> {
        let (min, max) = (self.grid[0], *self.grid.last().unwrap());
        if !(omega >= min && omega <= max) {
            return Err(PermittivityError::OutOfRange { omega, min, max });
        }
        let j = self.grid.partition_point(|&w| w <= omega).clamp(1, self.grid.len() - 1);
        let (w0, w1) = (self.grid[j - 1], self.grid[j]);
        let s = (omega - w0) / (w1 - w0);
        Ok(self.values[j - 1] * (1.0 - s) + self.values[j] * s)
    }
}

/// A scalar complex permittivity for one homogeneous region.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PermittivityModel {
    Lorentz(LorentzModel),
    Tabulated(TabulatedModel),
    /// Frequency-independent value. Only meaningful at a single frequency,
    /// since a constant with nonzero imaginary part is not causal.
    Constant { value: Complex64 },
}

impl PermittivityModel {
    pub fn vacuum() -> Self {
        PermittivityModel::Constant { value: Complex64::new(1.0, 0.0) }
    }

    pub fn constant(re: f64, im: f64) -> Self {
        PermittivityModel::Constant { value: Complex64::new(re, im) }
    }

    pub fn eval_eps(&self, omega: f64) -> Result<Complex64, PermittivityError> {
        if !omega.is_finite() {
            return Err(PermittivityError::NonFinite(omega));
        }
        match self {
            PermittivityModel::Lorentz(m) => {
                if omega == 0.0 && m.has_drude_term() {
                    return Err(PermittivityError::Singular { omega });
                }
                Ok(m.eval(omega))
            }
            PermittivityModel::Tabulated(t) => t.eval(omega),
            PermittivityModel::Constant { value } => Ok(*value),
        }
    }
}

/// Free-function form of [`PermittivityModel::eval_eps`].
pub fn eval_eps(model: &PermittivityModel, omega: f64) -> Result<Complex64, PermittivityError> {
    model.eval_eps(omega)
}

/// Result of a single Kramers–Kronig reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KkEstimate {
    /// Estimate of Re ε(ω) − 1.
    pub value: f64,
    /// Bound on the contribution of ε_I outside the grid, assuming ε_I is
    /// bounded by its first sample below the grid and decays at least as ω⁻³
    /// above it.
    pub tail_bound: f64,
}

/// Reconstructs Re ε(ω) − 1 from samples of Im ε via the principal-value
/// integral `(2/π) PV ∫₀^∞ ω′ ε_I(ω′) / (ω′² − ω²) dω′`.
///
/// The integral is restricted to the sample grid (ε_I taken as zero outside).
/// The pole is removed by subtracting `ω ε_I(ω)` from the numerator; the
/// subtracted piece is integrated analytically and the regular remainder by
/// the trapezoid rule on the (possibly non-uniform) grid.
pub fn kk_real_from_imag(grid: &[f64], imag: &[f64], omega: f64) -> Result<KkEstimate, PermittivityError> {
    if grid.len() < 2 || grid.len() != imag.len() {
        return Err(PermittivityError::InvalidTable("KK grid needs >= 2 points and matching samples"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] < 0.0 {
        return Err(PermittivityError::InvalidTable("KK grid must be non-negative and strictly increasing"));
    }
    let (a, b) = (grid[0], *grid.last().unwrap());
    if !(omega > a && omega < b) {
        return Err(PermittivityError::KkOutsideGrid { omega, min: a, max: b });
    }
    let n = grid.len();
    let j = grid.partition_point(|&w| w <= omega).clamp(1, n - 1);
    let s = (omega - grid[j - 1]) / (grid[j] - grid[j - 1]);
    let eps_i_at = imag[j - 1] * (1.0 - s) + imag[j] * s;
    let g_e = omega * eps_i_at;

    let g = |i: usize| grid[i] * imag[i];
    let coincide = 1e-12 * omega;
    let regular = |i: usize| -> f64 {
        let w = grid[i];
        if (w - omega).abs() > coincide {
            (g(i) - g_e) / (w * w - omega * omega)
        } else {
            // removable singularity: g'(ω) / 2ω
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let slope = (g(hi) - g(lo)) / (grid[hi] - grid[lo]);
            slope / (2.0 * omega)
        }
    };

    let mut trap = 0.0;
    let mut prev = regular(0);
    for i in 1..n {
        let cur = regular(i);
        trap += 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
        prev = cur;
    }
    let log_term = g_e / (2.0 * omega) * (((b - omega) / (omega - a)).ln() - ((b + omega) / (a + omega)).ln());
    let value = 2.0 / PI * (trap + log_term);

    let r = omega / b;
    let upper = 2.0 / PI * imag[n - 1].abs() / (3.0 * (1.0 - r * r));
    let lower = if a > 0.0 {
        2.0 / PI * imag[0].abs() * 0.5 * (omega * omega / (omega * omega - a * a)).ln()
    } else {
        0.0
    };
    Ok(KkEstimate { value, tail_bound: upper + lower })
}

/// Per-frequency comparison of a model's real part with its KK reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct CausalityReport {
    pub frequencies: Vec<f64>,
    /// Re ε − 1 as given by the model.
    pub real_model: Vec<f64>,
    /// Re ε − 1 reconstructed from Im ε; `None` at the two grid endpoints.
    pub real_kk: Vec<Option<f64>>,
    /// |real_kk − real_model| / scale; `None` at the endpoints.
    pub residuals: Vec<Option<f64>>,
    /// max |ε − 1| over the grid, the normalization of the residuals.
    pub scale: f64,
    /// Largest residual over the interior 80% of the grid indices.
    pub interior_max_deviation: f64,
    /// Largest residual over all strictly interior points.
    pub max_deviation: f64,
    /// Largest out-of-grid tail bound (already divided by `scale`).
    pub max_tail_bound: f64,
}

impl CausalityReport {
    pub fn is_consistent(&self, tolerance: f64) -> bool {
        self.interior_max_deviation <= tolerance
    }

    /// Index range counted as the interior 80% of the grid.
    pub fn interior_range(len: usize) -> std::ops::Range<usize> {
        let cut = len / 10;
        cut.max(1)..(len - cut).min(len.saturating_sub(1))
    }
}

/// Samples `model` on `grid` and compares Re ε with the KK transform of Im ε.
pub fn causality_report(model: &PermittivityModel, grid: &[f64]) -> Result<CausalityReport, PermittivityError> {
    let eps: Vec<Complex64> = grid.iter().map(|&w| model.eval_eps(w)).collect::<Result<_, _>>()?;
    causality_report_from_samples(grid, &eps)
}

/// As [`causality_report`] for raw samples.
pub fn causality_report_from_samples(grid: &[f64], eps: &[Complex64]) -> Result<CausalityReport, PermittivityError> {
    let imag: Vec<f64> = eps.iter().map(|e| e.im).collect();
    let real_model: Vec<f64> = eps.iter().map(|e| e.re - 1.0).collect();
    let scale = eps.iter().map(|e| (e - 1.0).norm()).fold(0.0, f64::max);
    let n = grid.len();
    let mut real_kk = vec![None; n];
    let mut residuals = vec![None; n];
    let mut max_tail = 0.0_f64;
    for i in 1..n.saturating_sub(1) {
        let est = kk_real_from_imag(grid, &imag, grid[i])?;
        real_kk[i] = Some(est.value);
        let (res, tail) = if scale > 0.0 {
            ((est.value - real_model[i]).abs() / scale, est.tail_bound / scale)
        } else {
            (0.0, 0.0)
        };
        residuals[i] = Some(res);
        max_tail = max_tail.max(tail);
    }
    let interior = CausalityReport::interior_range(n);
    let interior_max = residuals[interior].iter().flatten().copied().fold(0.0, f64::max);
    let max_dev = residuals.iter().flatten().copied().fold(0.0, f64::max);
    Ok(CausalityReport {
        frequencies: grid.to_vec(),
        real_model,
        real_kk,
        residuals,
        scale,
        interior_max_deviation: interior_max,
        max_deviation: max_dev,
        max_tail_bound: max_tail,
    })
}

/// Logarithmically spaced grid of `n` points over [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Imaginary part of a reciprocal permittivity tensor at one point and
/// frequency. Positive eigenvalues absorb, negative ones amplify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorPermittivity {
    eps_i: Matrix3<f64>,
}

impl TensorPermittivity {
    /// Rejects any matrix that is not exactly symmetric.
    pub fn new(eps_i: Matrix3<f64>) -> Result<Self, PermittivityError> {
        let asymmetry = (eps_i - eps_i.transpose()).abs().max();
        if asymmetry != 0.0 || eps_i.iter().any(|v| !v.is_finite()) {
            return Err(PermittivityError::NotSymmetric { asymmetry });
        }
        Ok(Self { eps_i })
    }

    /// Builds from the upper triangle `[xx, yy, zz, xy, xz, yz]`.
    pub fn from_upper(xx: f64, yy: f64, zz: f64, xy: f64, xz: f64, yz: f64) -> Self {
        Self { eps_i: Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz) }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.eps_i
    }
}

/// Noise-coupling matrices for the absorbing (`gamma_minus`) and amplifying
/// (`gamma_plus`) parts of a loss/gain tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPair {
    pub gamma_minus: Matrix3<f64>,
    pub gamma_plus: Matrix3<f64>,
}

impl GammaPair {
    /// γ⁻γ⁻ᵀ − γ⁺γ⁺ᵀ, which must reproduce the input tensor.
    pub fn reconstruct(&self) -> Matrix3<f64> {
        self.gamma_minus * self.gamma_minus.transpose() - self.gamma_plus * self.gamma_plus.transpose()
    }
}

/// Diagonalizes ε_I = O diag(λ) Oᵀ and returns
/// γ⁻ = O √|λ| Θ(λ) Oᵀ, γ⁺ = O √|λ| Θ(−λ) Oᵀ.
///
/// Eigenvalues with |λ| below [`EIGEN_ZERO_THRESHOLD`] times the spectral norm
/// contribute to neither matrix.
pub fn gamma_decompose(t: &TensorPermittivity) -> GammaPair {
    let eig = SymmetricEigen::new(t.eps_i);
    let norm = eig.eigenvalues.amax();
    let cutoff = EIGEN_ZERO_THRESHOLD * norm;
    let mut minus = Matrix3::zeros();
    let mut plus = Matrix3::zeros();
    for k in 0..3 {
        let lambda = eig.eigenvalues[k];
        if lambda.abs() <= cutoff {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let proj = v * v.transpose() * lambda.abs().sqrt();
        if lambda > 0.0 {
            minus += proj;
        } else {
            plus += proj;
        }
    }
    GammaPair { gamma_minus: minus, gamma_plus: plus }
}
