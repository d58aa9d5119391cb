//! Amplifying four-ports.
//!
//! A pseudo-unitary Λ (Heisenberg map on `(a₁, a₂, g₁†, g₂†)`) factors as
//!
//! ```text
//! Λ = blkdiag(W, Y W) · Sq(r₁, r₂) · blkdiag(W† U_P, W† U_Q)
//! ```
//!
//! where `P = C U_P` and `Q = S U_Q` are the polar forms of the upper
//! blocks, `C = W cosh(r) W†`, `Y = V U_Q† C⁻¹` and `Sq` is a pair of
//! two-mode squeezers coupling `a_k` with `g_k†`. Each stage is applied to
//! state vectors exactly within the per-mode cutoff, so the only error is
//! the weight pushed above the cutoff, reported as a trace deficit.

use nalgebra::{DMatrix, SymmetricEigen};

use super::basis::Basis;
use super::passive::TwoModeColumns;
use super::states::{FockDensity, FockEnsemble, FockKet};
use super::FockError;
use crate::fourport::{DeviceError, DeviceKind, LambdaMatrix};
use crate::linalg::{c, hermitian_sqrt, max_abs, polar_unitary, CMat2, CMat4, C64};

pub const DEFAULT_AMPLIFIER_CUTOFF: usize = 25;
pub const DEFAULT_TRACE_DEFICIT_BOUND: f64 = 1e-6;
const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Factors of an amplifier Λ. All matrices act on annihilation operators
/// (field) or on `g†` (device), as Λ does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierDecomposition {
    pub field_in: CMat2,
    pub device_in: CMat2,
    pub squeeze: [f64; 2],
    pub field_out: CMat2,
    pub device_out: CMat2,
}

impl AmplifierDecomposition {
    pub fn reconstruct(&self) -> CMat4 {
        let mut first = CMat4::zeros();
        first.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.field_in);
        first.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.device_in);
        let mut sq = CMat4::zeros();
        for k in 0..2 {
            let (ch, sh) = (c(self.squeeze[k].cosh(), 0.0), c(self.squeeze[k].sinh(), 0.0));
            sq[(k, k)] = ch;
            sq[(k + 2, k + 2)] = ch;
            sq[(k, k + 2)] = sh;
            sq[(k + 2, k)] = sh;
        }
        let mut last = CMat4::zeros();
        last.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.field_out);
        last.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.device_out);
        last * sq * first
    }
}

pub fn decompose_amplifier(lambda: &LambdaMatrix) -> Result<AmplifierDecomposition, FockError> {
    if lambda.kind() != DeviceKind::Amplifying {
        return Err(DeviceError::WrongKind { expected: DeviceKind::Amplifying }.into());
    }
    let p = lambda.block(0, 0);
    let q = lambda.block(0, 1);
    let v = lambda.block(1, 1);
    let cmat = hermitian_sqrt(&(p * p.adjoint())).map_err(DeviceError::from)?;
    let eig = SymmetricEigen::new(cmat);
    let w = eig.eigenvectors;
    let squeeze = [eig.eigenvalues[0].max(1.0).acosh(), eig.eigenvalues[1].max(1.0).acosh()];
    let up = polar_unitary(&p);
    let uq = polar_unitary(&q);
    let cinv = cmat.try_inverse().ok_or(FockError::Decomposition(f64::INFINITY))?;
    let y = polar_unitary(&(v * uq.adjoint() * cinv));
    let d = AmplifierDecomposition {
        field_in: w.adjoint() * up,
        device_in: w.adjoint() * uq,
        squeeze,
        field_out: w,
        device_out: y * w,
    };
    let residual = max_abs(&(d.reconstruct() - lambda.matrix()));
    if !(residual <= RECONSTRUCTION_TOL * (1.0 + max_abs(lambda.matrix()))) {
        return Err(FockError::Decomposition(residual));
    }
    Ok(d)
}

fn dense(m: &CMat2) -> DMatrix<C64> {
    DMatrix::from_iterator(2, 2, m.iter().copied())
}

fn conj(m: &CMat2) -> DMatrix<C64> {
    DMatrix::from_iterator(2, 2, m.iter().map(|z| z.conj()))
}

/// Two-mode squeezer `U` with `U† a U = cosh r·a + sinh r·g†`, tabulated
/// for inputs and outputs with occupations up to `cutoff`.
///
/// Columns are generated from the vacuum `Σ tanhⁿr/cosh r |n n⟩` with
/// `U a† U† = cosh r·a† − sinh r·g` and `U g† U† = cosh r·g† − sinh r·a`
/// on a working space of `2·cutoff` per mode, where every retained entry is
/// exact.
fn squeezer_columns(r: f64, cutoff: usize) -> TwoModeColumns {
    let d = cutoff + 1;
    let work = 2 * cutoff + 1;
    let (ch, sh) = (r.cosh(), r.sinh());
    let th = r.tanh();
    // (c a† − s g) / √(n+1)
    let raise_a = |v: &Vec<C64>, n: usize| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); work * work];
        let norm = 1.0 / ((n + 1) as f64).sqrt();
        for i in 0..work {
            for j in 0..work {
                let mut acc = C64::new(0.0, 0.0);
                if i > 0 {
                    acc += v[(i - 1) * work + j] * (ch * (i as f64).sqrt());
                }
                if j + 1 < work {
                    acc -= v[i * work + j + 1] * (sh * ((j + 1) as f64).sqrt());
                }
                out[i * work + j] = acc * norm;
            }
        }
        out
    };
    // (c g† − s a) / √(n+1)
    let raise_g = |v: &Vec<C64>, n: usize| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); work * work];
        let norm = 1.0 / ((n + 1) as f64).sqrt();
        for i in 0..work {
            for j in 0..work {
                let mut acc = C64::new(0.0, 0.0);
                if j > 0 {
                    acc += v[i * work + j - 1] * (ch * (j as f64).sqrt());
                }
                if i + 1 < work {
                    acc -= v[(i + 1) * work + j] * (sh * ((i + 1) as f64).sqrt());
                }
                out[i * work + j] = acc * norm;
            }
        }
        out
    };

    let mut vac = vec![C64::new(0.0, 0.0); work * work];
    let mut amp = 1.0 / ch;
    for n in 0..work {
        vac[n * work + n] = c(amp, 0.0);
        amp *= th;
    }

    let mut columns: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); d * d];
    let mut g_chain = vac;
    for ng in 0..d {
        if ng > 0 {
            g_chain = raise_g(&g_chain, ng - 1);
        }
        let mut v = g_chain.clone();
        for na in 0..d {
            if na > 0 {
                v = raise_a(&v, na - 1);
            }
            let mut col = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    let z = v[i * work + j];
                    if z.norm_sqr() > 0.0 {
                        col.push((i, j, z));
                    }
                }
            }
            columns[na * d + ng] = col;
        }
    }
    TwoModeColumns { cutoff, columns }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationStatus {
    Ok,
    /// The trace deficit exceeds the configured bound; results are still returned.
    Warning,
}

#[derive(Debug, Clone)]
pub struct AmplifierOutput {
    pub state: FockEnsemble,
    /// Input trace minus output trace.
    pub trace_deficit: f64,
    pub bound: f64,
    pub status: TruncationStatus,
}

impl AmplifierOutput {
    /// Reduced density of the two field channels; its trace is one minus
    /// the trace deficit.
    pub fn field_density(&self) -> Result<FockDensity, FockError> {
        super::trace::ensemble_partial_trace(&self.state, &[0, 1])
    }
}

/// Transforms `input` through an amplifying four-port at per-mode `cutoff`.
pub fn amplifier_transform(
    input: &FockEnsemble,
    lambda: &LambdaMatrix,
    cutoff: usize,
    bound: f64,
) -> Result<AmplifierOutput, FockError> {
    let d = decompose_amplifier(lambda)?;
    if input.basis().modes() != 4 {
        return Err(FockError::Dimension { expected: 4, got: input.basis().modes() });
    }
    let input = input.embed(cutoff)?;
    let stages = [
        (TwoModeColumns::passive(&dense(&d.field_in), cutoff), 0, 1),
        (TwoModeColumns::passive(&conj(&d.device_in), cutoff), 2, 3),
        (squeezer_columns(d.squeeze[0], cutoff), 0, 2),
        (squeezer_columns(d.squeeze[1], cutoff), 1, 3),
        (TwoModeColumns::passive(&dense(&d.field_out), cutoff), 0, 1),
        (TwoModeColumns::passive(&conj(&d.device_out), cutoff), 2, 3),
    ];
    let members: Vec<(f64, FockKet)> = input
        .members()
        .iter()
        .map(|(w, ket)| {
            let mut k = ket.clone();
            for (cols, p, q) in &stages {
                k = cols.apply(&k, *p, *q);
            }
            (*w, k)
        })
        .collect();
    let state = FockEnsemble::new(Basis::new(4, cutoff)?, members)?;
    let trace_deficit = input.trace() - state.trace();
    let status = if trace_deficit > bound { TruncationStatus::Warning } else { TruncationStatus::Ok };
    Ok(AmplifierOutput { state, trace_deficit, bound, status })
}

pub fn amplifier_transform_density(
    rho: &FockDensity,
    lambda: &LambdaMatrix,
    cutoff: usize,
    bound: f64,
) -> Result<AmplifierOutput, FockError> {
    amplifier_transform(&FockEnsemble::from_density(rho), lambda, cutoff, bound)
}
