//! One-dimensional multilayer engine.
//!
//! A [`DielectricStack`] is a sequence of homogeneous layers between two
//! semi-infinite claddings. The origin is the left interface; layers extend
//! to the right. Fields obey `[∂ₓ² + (ω/c)² ε(x, ω)] E = 0`.
//!
//! Plane-wave amplitudes in each layer are referenced to that layer's left
//! edge; right-cladding amplitudes are referenced to the last interface.

use nalgebra::Matrix2;
use serde::Serialize;
use thiserror::Error;

use crate::constants::PhysicalConstants;
use crate::fourport::DeviceKind;
use crate::linalg::{c, hermitian_sqrt, CMat2, LinalgError, C64};
use crate::permittivity::{PermittivityError, PermittivityModel};
use crate::quadrature::GaussLegendre;

/// Relative size of Im ε below which a cladding counts as lossless.
pub const LOSSLESS_TOL: f64 = 1e-12;

/// Gauss–Legendre nodes per panel in the absorption integral.
pub const PANEL_ORDER: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayeredError {
    #[error(transparent)]
    Permittivity(#[from] PermittivityError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("layer thickness must be positive and finite, got {0}")]
    InvalidThickness(f64),
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("permittivity vanishes in region {region}: refractive index has a branch point")]
    BranchPoint { region: usize },
    #[error("{side} cladding must be lossless with Re eps > 0 for scattering channels (eps = {eps})")]
    NonPropagatingCladding { side: &'static str, eps: C64 },
    #[error("{side} cladding has gain; outgoing Green function is undefined")]
    GainCladding { side: &'static str },
    #[error("stack mixes loss and gain: T T^dagger - I is not positive semidefinite")]
    MixedGainLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    thickness: f64,
    model: PermittivityModel,
}

impl Layer {
    pub fn new(thickness: f64, model: PermittivityModel) -> Result<Self, LayeredError> {
        if !(thickness.is_finite() && thickness > 0.0) {
            return Err(LayeredError::InvalidThickness(thickness));
        }
        Ok(Self { thickness, model })
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn model(&self) -> &PermittivityModel {
        &self.model
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DielectricStack {
    left: PermittivityModel,
    right: PermittivityModel,
    layers: Vec<Layer>,
}

impl DielectricStack {
    pub fn new(left: PermittivityModel, right: PermittivityModel, layers: Vec<Layer>) -> Self {
        Self { left, right, layers }
    }

    /// Layers between vacuum claddings.
    pub fn in_vacuum(layers: Vec<Layer>) -> Self {
        Self::new(PermittivityModel::vacuum(), PermittivityModel::vacuum(), layers)
    }

    /// A homogeneous medium filling all space.
    pub fn uniform(model: PermittivityModel) -> Self {
        Self::new(model.clone(), model, Vec::new())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn left_cladding(&self) -> &PermittivityModel {
        &self.left
    }

    pub fn right_cladding(&self) -> &PermittivityModel {
        &self.right
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Interface positions, starting at 0.
    pub fn interfaces(&self) -> Vec<f64> {
        let mut x = 0.0;
        let mut out = vec![0.0];
        for l in &self.layers {
            x += l.thickness;
            out.push(x);
        }
        out
    }

    /// Concatenates `other` to the right of `self`; `other`'s left cladding is dropped.
    pub fn concat(&self, other: &DielectricStack) -> DielectricStack {
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        DielectricStack::new(self.left.clone(), other.right.clone(), layers)
    }

    /// Permittivities of all regions: left cladding, layers, right cladding.
    fn region_eps(&self, omega: f64) -> Result<Vec<C64>, LayeredError> {
        let mut out = Vec::with_capacity(self.layers.len() + 2);
        out.push(self.left.eval_eps(omega)?);
        for l in &self.layers {
            out.push(l.model.eval_eps(omega)?);
        }
        out.push(self.right.eval_eps(omega)?);
        Ok(out)
    }
}

/// Complex refractive index: principal root, so Im n ≥ 0 for absorbers and
/// Im n ≤ 0 for gain, continuous across Im ε = 0 for Re ε > 0.
pub fn refractive_index(eps: C64) -> Option<C64> {
    if eps.norm() == 0.0 {
        return None;
    }
    // fold -0.0 onto the absorbing side of the cut
    let eps = if eps.im == 0.0 { c(eps.re, 0.0) } else { eps };
    Some(eps.sqrt())
}

fn check_frequency(omega: f64) -> Result<(), LayeredError> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(LayeredError::InvalidFrequency(omega));
    }
    Ok(())
}

fn wavenumbers(stack: &DielectricStack, omega: f64) -> Result<(Vec<C64>, Vec<C64>), LayeredError> {
    check_frequency(omega)?;
    let k0 = PhysicalConstants::SI.wavenumber(omega);
    let eps = stack.region_eps(omega)?;
    let k = eps
        .iter()
        .enumerate()
        .map(|(region, &e)| refractive_index(e).map(|n| n * k0).ok_or(LayeredError::BranchPoint { region }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((eps, k))
}

/// Transfer matrix mapping (right-going, left-going) amplitudes in the left
/// cladding onto those in the right cladding.
///
/// Its determinant is `k_left / k_right`. Built as a direct product of
/// interface and propagation matrices, so it overflows for optically very
/// thick absorbers; [`scattering_amplitudes`] does not.
pub fn transfer_matrix(stack: &DielectricStack, omega: f64) -> Result<CMat2, LayeredError> {
    let (_, k) = wavenumbers(stack, omega)?;
    let interface = |k1: C64, k2: C64| {
        let q = k1 / k2;
        let p = (c(1.0, 0.0) + q) * 0.5;
        let m = (c(1.0, 0.0) - q) * 0.5;
        CMat2::new(p, m, m, p)
    };
    let mut m = CMat2::identity();
    let n = stack.layers.len();
    for (i, layer) in stack.layers.iter().enumerate() {
        let kl = k[i + 1];
        m = interface(k[i], kl) * m;
        let ph = (c(0.0, 1.0) * kl * layer.thickness).exp();
        m = CMat2::new(ph, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0) / ph) * m;
    }
    Ok(interface(k[n], k[n + 1]) * m)
}

/// Two-port scattering matrix of scalar amplitudes.
///
/// `t_forward` is left→right transmission, `t_backward` right→left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SMatrix2 {
    pub r_left: C64,
    pub t_forward: C64,
    pub t_backward: C64,
    pub r_right: C64,
}

impl SMatrix2 {
    pub fn identity() -> Self {
        Self { r_left: c(0.0, 0.0), t_forward: c(1.0, 0.0), t_backward: c(1.0, 0.0), r_right: c(0.0, 0.0) }
    }

    /// Interface between wavenumbers `k1` (left) and `k2` (right).
    pub fn interface(k1: C64, k2: C64) -> Self {
        let s = k1 + k2;
        Self { r_left: (k1 - k2) / s, t_forward: k1 * 2.0 / s, t_backward: k2 * 2.0 / s, r_right: (k2 - k1) / s }
    }

    pub fn propagation(k: C64, d: f64) -> Self {
        let ph = (c(0.0, 1.0) * k * d).exp();
        Self { r_left: c(0.0, 0.0), t_forward: ph, t_backward: ph, r_right: c(0.0, 0.0) }
    }

    /// Redheffer star product: `self` on the left, `other` on the right.
    pub fn star(&self, other: &SMatrix2) -> SMatrix2 {
        let denom = c(1.0, 0.0) - self.r_right * other.r_left;
        SMatrix2 {
            r_left: self.r_left + self.t_backward * other.r_left * self.t_forward / denom,
            t_forward: other.t_forward * self.t_forward / denom,
            t_backward: self.t_backward * other.t_backward / denom,
            r_right: other.r_right + other.t_forward * self.r_right * other.t_backward / denom,
        }
    }
}

/// Amplitude-basis scattering matrix of the whole stack by star products.
pub fn stack_smatrix(stack: &DielectricStack, omega: f64) -> Result<SMatrix2, LayeredError> {
    let (_, k) = wavenumbers(stack, omega)?;
    let mut s = SMatrix2::identity();
    for (i, layer) in stack.layers.iter().enumerate() {
        s = s.star(&SMatrix2::interface(k[i], k[i + 1]));
        s = s.star(&SMatrix2::propagation(k[i + 1], layer.thickness));
    }
    let n = stack.layers.len();
    Ok(s.star(&SMatrix2::interface(k[n], k[n + 1])))
}

/// Transformation and absorption (or gain) matrices of a stack at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPair {
    /// `[[r_L, t′], [t, r_R]]`: channel 1 is the left port, channel 2 the right.
    pub t: CMat2,
    pub a: CMat2,
    pub kind: DeviceKind,
    pub omega: f64,
}

impl ScatteringPair {
    /// `T T† ± A A† − I` for the absorbing (+) or amplifying (−) case.
    pub fn completeness_residual(&self) -> f64 {
        let tt = self.t * self.t.adjoint();
        let aa = self.a * self.a.adjoint();
        let r = match self.kind {
            DeviceKind::Absorbing => tt + aa - CMat2::identity(),
            DeviceKind::Amplifying => tt - aa - CMat2::identity(),
        };
        crate::linalg::max_abs(&r)
    }
}

/// Flux-normalized scattering matrix `T` of the stack and the positive
/// Hermitian gauge `A = √(I − T T†)` (absorbing) or `A = √(T T† − I)`
/// (amplifying, when any layer has Im ε < 0).
pub fn scattering_amplitudes(stack: &DielectricStack, omega: f64) -> Result<ScatteringPair, LayeredError> {
    let (eps, k) = wavenumbers(stack, omega)?;
    let last = eps.len() - 1;
    for (side, idx) in [("left", 0), ("right", last)] {
        let e = eps[idx];
        if e.re <= 0.0 || e.im.abs() > LOSSLESS_TOL * e.norm() {
            return Err(LayeredError::NonPropagatingCladding { side, eps: e });
        }
    }
    let s = stack_smatrix(stack, omega)?;
    let (kl, kr) = (k[0].re, k[last].re);
    let flux = (kr / kl).sqrt();
    let t = Matrix2::new(s.r_left, s.t_backward / flux, s.t_forward * flux, s.r_right);
    let gain = eps[1..last].iter().any(|e| e.im < 0.0);
    let tt = t * t.adjoint();
    let (a, kind) = if gain {
        let a = hermitian_sqrt(&(tt - CMat2::identity())).map_err(|_| LayeredError::MixedGainLoss)?;
        (a, DeviceKind::Amplifying)
    } else {
        (hermitian_sqrt(&(CMat2::identity() - tt))?, DeviceKind::Absorbing)
    };
    Ok(ScatteringPair { t, a, kind, omega })
}

/// Precomputed outgoing-wave solutions of one stack at one frequency.
///
/// In region `m` the left-satisfying solution is
/// `u_L = e^{−ikξ} + ρ_L e^{ikξ}` (ξ from the region's left edge) and the
/// right-satisfying one `u_R = e^{ikη} + ρ_R e^{−ikη}` (η from its right
/// edge). Global normalizations are carried as complex logarithms so that
/// thick absorbers neither overflow nor underflow.
#[derive(Debug, Clone)]
pub struct GreenFunction1d {
    k0: f64,
    eps: Vec<C64>,
    k: Vec<C64>,
    /// Left edge of each region (claddings: 0 and D).
    start: Vec<f64>,
    thickness: Vec<f64>,
    rho_l: Vec<C64>,
    rho_r: Vec<C64>,
    /// Log of the left solution's normalization; the right one cancels in G.
    log_l: Vec<C64>,
    boundaries: Vec<f64>,
}

impl GreenFunction1d {
    pub fn new(stack: &DielectricStack, omega: f64) -> Result<Self, LayeredError> {
        let (eps, k) = wavenumbers(stack, omega)?;
        let last = eps.len() - 1;
        for (side, idx) in [("left", 0), ("right", last)] {
            if eps[idx].im < -LOSSLESS_TOL * eps[idx].norm() {
                return Err(LayeredError::GainCladding { side });
            }
        }
        let boundaries = stack.interfaces();
        let total = *boundaries.last().unwrap();
        let mut start = vec![0.0];
        let mut thickness = vec![0.0];
        for (i, l) in stack.layers.iter().enumerate() {
            start.push(boundaries[i]);
            thickness.push(l.thickness);
        }
        start.push(total);
        thickness.push(0.0);

        let n = eps.len();
        let i = c(0.0, 1.0);
        let one = c(1.0, 0.0);

        let mut rho_l = vec![c(0.0, 0.0); n];
        let mut log_l = vec![c(0.0, 0.0); n];
        let mut y = -i * k[0];
        for m in 1..n {
            let ik = i * k[m];
            rho_l[m] = (ik + y) / (ik - y);
            let prev = m - 1;
            let e_prev = (i * k[prev] * (2.0 * thickness[prev])).exp();
            let log_u_prev = -i * k[prev] * thickness[prev] + (one + rho_l[prev] * e_prev).ln();
            log_l[m] = log_l[prev] + log_u_prev - (one + rho_l[m]).ln();
            let e = (ik * (2.0 * thickness[m])).exp();
            y = ik * (rho_l[m] * e - one) / (rho_l[m] * e + one);
        }

        let mut rho_r = vec![c(0.0, 0.0); n];
        let mut y = i * k[n - 1];
        for m in (0..n - 1).rev() {
            let ik = i * k[m];
            rho_r[m] = (ik - y) / (ik + y);
            let e = (ik * (2.0 * thickness[m])).exp();
            y = ik * (one - rho_r[m] * e) / (one + rho_r[m] * e);
        }

        Ok(Self {
            k0: PhysicalConstants::SI.wavenumber(omega),
            eps,
            k,
            start,
            thickness,
            rho_l,
            rho_r,
            log_l,
            boundaries,
        })
    }

    pub fn region_of(&self, x: f64) -> usize {
        // region m (1-based layers) covers [boundaries[m-1], boundaries[m]]
        self.boundaries.partition_point(|&b| b < x)
    }

    pub fn eps(&self, region: usize) -> C64 {
        self.eps[region]
    }

    pub fn wavenumber(&self, region: usize) -> C64 {
        self.k[region]
    }

    pub fn vacuum_wavenumber(&self) -> f64 {
        self.k0
    }

    pub fn region_count(&self) -> usize {
        self.eps.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    fn log_u_left(&self, m: usize, x: f64) -> C64 {
        let ik = c(0.0, 1.0) * self.k[m];
        let xi = x - self.start[m];
        -ik * xi + (c(1.0, 0.0) + self.rho_l[m] * (ik * (2.0 * xi)).exp()).ln()
    }

    fn log_u_right(&self, m: usize, x: f64) -> C64 {
        let ik = c(0.0, 1.0) * self.k[m];
        let eta = x - (self.start[m] + self.thickness[m]);
        ik * eta + (c(1.0, 0.0) + self.rho_r[m] * (-ik * (2.0 * eta)).exp()).ln()
    }

    /// Green function solving `[∂ₓ² + k₀² ε(x)] G = −δ(x − x′)` with outgoing
    /// (or decaying) behaviour in both claddings.
    pub fn eval(&self, x: f64, xp: f64) -> C64 {
        let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
        let i = self.region_of(lo);
        let j = self.region_of(hi);
        let ik = c(0.0, 1.0) * self.k[j];
        let e = (ik * (2.0 * self.thickness[j])).exp();
        let log_w_scaled = (ik * 2.0).ln() + (c(1.0, 0.0) - self.rho_l[j] * self.rho_r[j] * e).ln();
        // u_R in region j carries an extra e^{-ikd}; it cancels against W.
        let log_g = self.log_l[i] - self.log_l[j] + self.log_u_left(i, lo) + self.log_u_right(j, hi)
            + ik * self.thickness[j]
            - log_w_scaled;
        -log_g.exp()
    }
}

/// Free-function form of [`GreenFunction1d::eval`].
pub fn green_function_1d(stack: &DielectricStack, x: f64, xp: f64, omega: f64) -> Result<C64, LayeredError> {
    Ok(GreenFunction1d::new(stack, omega)?.eval(x, xp))
}

/// Settings for the absorption integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    /// Gauss–Legendre nodes per local wavelength `2π/|k|`.
    pub nodes_per_wavelength: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { nodes_per_wavelength: 64 }
    }
}

impl QuadratureSettings {
    pub fn refined(&self) -> Self {
        Self { nodes_per_wavelength: self.nodes_per_wavelength * 2 }
    }
}

/// Outcome of checking `∫ ds k₀² ε_I(s) G(x,s) G*(x′,s) = Im G(x,x′)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalRelationReport {
    pub x: f64,
    pub xp: f64,
    pub absorption_integral: C64,
    pub im_green: f64,
    /// |integral − Im G| / |Im G|.
    pub residual: f64,
    /// No region absorbs: the identity then misses the flux radiated into
    /// the claddings, so the residual is not a test of the identity.
    pub boundary_flux_regime: bool,
    pub nodes_per_wavelength: usize,
}

/// Evaluates both sides of the absorption sum rule for the 1D Green function.
///
/// The integral over absorbing claddings beyond the outermost of `x`, `x′`
/// and the stack is done analytically (pure outgoing exponentials); every
/// other homogeneous segment uses composite Gauss–Legendre panels split at
/// interfaces and at `x`, `x′`.
pub fn verify_fundamental_relation(
    stack: &DielectricStack,
    x: f64,
    xp: f64,
    omega: f64,
    settings: QuadratureSettings,
) -> Result<FundamentalRelationReport, LayeredError> {
    let g = GreenFunction1d::new(stack, omega)?;
    Ok(fundamental_relation_with(&g, x, xp, settings))
}

/// As [`verify_fundamental_relation`] reusing a precomputed Green function.
pub fn fundamental_relation_with(
    g: &GreenFunction1d,
    x: f64,
    xp: f64,
    settings: QuadratureSettings,
) -> FundamentalRelationReport {
    let k0sq = g.k0 * g.k0;
    let rule = GaussLegendre::new(PANEL_ORDER);
    let integrand = |s: f64| g.eval(x, s) * g.eval(xp, s).conj();

    let mut points: Vec<f64> = g.boundaries.clone();
    points.push(x);
    points.push(xp);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    let (s_lo, s_hi) = (points[0], *points.last().unwrap());

    let mut total = c(0.0, 0.0);
    let last = g.region_count() - 1;
    for (region, s_edge) in [(0usize, s_lo), (last, s_hi)] {
        let eps_i = g.eps[region].im;
        if eps_i > 0.0 {
            // |e^{ik|s|}|² integrates to 1/(2 Im k) over the tail
            let kappa = g.k[region].im;
            total += integrand(s_edge) * (k0sq * eps_i / (2.0 * kappa));
        }
    }
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let region = g.region_of(0.5 * (a + b));
        let eps_i = g.eps[region].im;
        if eps_i == 0.0 {
            continue;
        }
        let wavelength = 2.0 * std::f64::consts::PI / g.k[region].norm();
        let nodes = (b - a) / wavelength * settings.nodes_per_wavelength as f64;
        let panels = (nodes / PANEL_ORDER as f64).ceil().max(1.0) as usize;
        total += rule.integrate_complex(a, b, panels, &integrand) * (k0sq * eps_i);
    }

    let im_green = g.eval(x, xp).im;
    let residual = (total - im_green).norm() / im_green.abs();
    let boundary_flux_regime = g.eps.iter().all(|e| e.im == 0.0);
    FundamentalRelationReport {
        x,
        xp,
        absorption_integral: total,
        im_green,
        residual,
        boundary_flux_regime,
        nodes_per_wavelength: settings.nodes_per_wavelength,
    }
}
