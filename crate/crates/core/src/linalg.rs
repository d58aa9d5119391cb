//! Small complex-matrix helpers: 2×2 Hermitian square roots, polar factors,
//! and norms.

use nalgebra::{Matrix2, SMatrix};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = SMatrix<C64, 4, 4>;

/// Tolerance on Hermiticity and on negative eigenvalues in [`hermitian_sqrt`].
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Eigenvalues (ascending) of a 2×2 Hermitian matrix.
pub fn hermitian_eigenvalues(h: &CMat2) -> (f64, f64) {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let half_tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let hi = half_tr + disc;
    let det = a * d - b.norm_sqr();
    // avoid cancellation in the small eigenvalue
    let lo = if hi.abs() > 0.0 && half_tr > 0.0 { det / hi } else { half_tr - disc };
    (lo, hi)
}

/// Positive semidefinite square root of a 2×2 positive semidefinite Hermitian
/// matrix, using `√H = (H + √det·I) / (√λ₁ + √λ₂)`.
///
/// Eigenvalues in `[-HERMITIAN_TOL, 0)` are clamped to zero.
pub fn hermitian_sqrt(h: &CMat2) -> Result<CMat2, LinalgError> {
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = HERMITIAN_TOL * scale;
    let dev = (h[(0, 1)] - h[(1, 0)].conj())
        .norm()
        .max(h[(0, 0)].im.abs())
        .max(h[(1, 1)].im.abs());
    if dev > tol {
        return Err(LinalgError::NotHermitian(dev));
    }
    let (lo, hi) = hermitian_eigenvalues(h);
    if lo < -tol {
        return Err(LinalgError::NegativeEigenvalue(lo));
    }
    let lo = lo.max(0.0);
    let hi = hi.max(0.0);
    let t = hi.sqrt() + lo.sqrt();
    if t == 0.0 {
        return Ok(CMat2::zeros());
    }
    let s = (hi * lo).sqrt();
    // symmetrize the input so the root is exactly Hermitian
    let herm = CMat2::new(
        c(h[(0, 0)].re, 0.0),
        0.5 * (h[(0, 1)] + h[(1, 0)].conj()),
        0.5 * (h[(1, 0)] + h[(0, 1)].conj()),
        c(h[(1, 1)].re, 0.0),
    );
    Ok((herm + CMat2::identity() * c(s, 0.0)) / c(t, 0.0))
}

/// Unitary polar factor `U` with `M = √(M M†) · U`.
///
/// Computed from the SVD `M = W Σ V†` as `W V†` on the support of Σ. On the
/// null space the phase of the completion is chosen so the map is as close
/// to the identity as possible; `M = 0` gives the identity.
pub fn polar_unitary(m: &CMat2) -> CMat2 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return CMat2::identity();
    }
    let svd = m.svd(true, true);
    let w = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let zero = 1e-15 * scale.max(1.0);
    let mut u = CMat2::zeros();
    for k in 0..2 {
        let wk = w.column(k);
        let vk_dag = vt.row(k);
        let outer = wk * vk_dag;
        if svd.singular_values[k] > zero {
            u += outer;
        } else {
            // null-space completion w_k v_k†, rotated towards the identity
            let overlap: C64 = (vk_dag * wk)[(0, 0)];
            let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { c(1.0, 0.0) };
            u += outer * phase;
        }
    }
    u
}

/// Largest singular value.
pub fn spectral_norm<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    nalgebra::DMatrix::from_iterator(N, N, m.iter().copied()).singular_values().max()
}

/// Largest entry modulus.
pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        assert_eq!(hermitian_sqrt(&CMat2::identity()).unwrap(), CMat2::identity());
        let d = CMat2::new(c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(9.0, 0.0));
        let r = hermitian_sqrt(&d).unwrap();
        let expect = CMat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0));
        assert!(max_abs(&(r - expect)) < 1e-15);
    }

    #[test]
    fn sqrt_of_rank_one() {
        let v = nalgebra::Vector2::new(c(0.6, 0.0), c(0.0, 0.8));
        let h = v * v.adjoint();
        let r = hermitian_sqrt(&h).unwrap();
        assert!(max_abs(&(r * r - h)) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_bad_input() {
        let neg = CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.1, 0.0));
        assert!(matches!(hermitian_sqrt(&neg), Err(LinalgError::NegativeEigenvalue(_))));
        let nh = CMat2::new(c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(hermitian_sqrt(&nh), Err(LinalgError::NotHermitian(_))));
        let tiny_neg = CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1e-14, 0.0));
        assert!(hermitian_sqrt(&tiny_neg).is_ok());
    }

    #[test]
    fn polar_factor_reconstructs() {
        let m = CMat2::new(c(0.3, 0.1), c(-0.2, 0.4), c(0.05, -0.3), c(0.6, 0.2));
        let u = polar_unitary(&m);
        assert!(max_abs(&(u * u.adjoint() - CMat2::identity())) < 1e-14);
        let p = hermitian_sqrt(&(m * m.adjoint())).unwrap();
        assert!(max_abs(&(p * u - m)) < 1e-14);
    }

    #[test]
    fn polar_factor_of_zero_and_rank_one() {
        assert_eq!(polar_unitary(&CMat2::zeros()), CMat2::identity());
        let m = CMat2::new(c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let u = polar_unitary(&m);
        assert!(max_abs(&(u - CMat2::identity())) < 1e-15);
    }
}
