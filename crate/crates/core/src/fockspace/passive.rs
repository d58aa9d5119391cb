//! Number-conserving (passive) transformations.
//!
//! A passive unitary `U` with `U† a_j U = Σ_k M_jk a_k` maps creation
//! operators as `U a_j† U† = Σ_k M_kj a_k†`, so a number state transforms
//! as a product of linear forms in the `a_k†`, expanded multinomially.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::basis::{Basis, Occupation, MAX_MODES};
use super::states::{FockDensity, FockEnsemble, FockKet};
use super::{sqrt_factorial, FockError};
use crate::fourport::{DeviceError, DeviceKind, LambdaMatrix};
use crate::linalg::{c, C64};

/// Output amplitudes `⟨m|U|n⟩` for the number state `occ`, as a list of
/// `(output occupation, amplitude)`.
pub(crate) fn transform_occupation(m: &DMatrix<C64>, occ: &[usize]) -> Vec<(Occupation, C64)> {
    let k = m.nrows();
    let mut poly: HashMap<Occupation, C64> = HashMap::new();
    poly.insert([0; MAX_MODES], c(1.0, 0.0));
    for (j, &n) in occ.iter().enumerate() {
        for _ in 0..n {
            let mut next: HashMap<Occupation, C64> = HashMap::with_capacity(poly.len() * k);
            for (o, coef) in &poly {
                for row in 0..k {
                    let mkj = m[(row, j)];
                    if mkj == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut o2 = *o;
                    o2[row] += 1;
                    *next.entry(o2).or_insert(C64::new(0.0, 0.0)) += coef * mkj;
                }
            }
            poly = next;
        }
    }
    let norm_in: f64 = occ.iter().map(|&n| sqrt_factorial(n)).product();
    poly.into_iter()
        .map(|(o, coef)| {
            let norm_out: f64 = o[..k].iter().map(|&n| sqrt_factorial(n)).product();
            (o, coef * (norm_out / norm_in))
        })
        .filter(|(_, a)| *a != C64::new(0.0, 0.0))
        .collect()
}

/// Precomputed action of a two-mode operator on all inputs `(n_p, n_q)`
/// with both occupations at most `cutoff`, restricted to outputs within
/// the cutoff. Column index is `n_p·(cutoff+1) + n_q`.
pub(crate) struct TwoModeColumns {
    pub cutoff: usize,
    pub columns: Vec<Vec<(usize, usize, C64)>>,
}

impl TwoModeColumns {
    pub fn passive(m: &DMatrix<C64>, cutoff: usize) -> Self {
        let d = cutoff + 1;
        let mut columns = Vec::with_capacity(d * d);
        for np in 0..d {
            for nq in 0..d {
                let col = transform_occupation(m, &[np, nq])
                    .into_iter()
                    .filter(|(o, _)| o[0] <= cutoff && o[1] <= cutoff)
                    .map(|(o, a)| (o[0], o[1], a))
                    .collect();
                columns.push(col);
            }
        }
        Self { cutoff, columns }
    }

    /// Applies the operator to modes `p` and `q` of `ket`.
    pub fn apply(&self, ket: &FockKet, p: usize, q: usize) -> FockKet {
        let basis = ket.basis();
        debug_assert_eq!(basis.cutoff(), self.cutoff);
        let d = basis.levels();
        let (sp, sq) = (basis.stride(p) as isize, basis.stride(q) as isize);
        let mut out = FockKet::zeros(basis);
        let amps_out = out.amplitudes_mut();
        for (idx, amp) in ket.amplitudes().iter().enumerate() {
            if *amp == C64::new(0.0, 0.0) {
                continue;
            }
            let occ = basis.occupation(idx);
            let (np, nq) = (occ[p], occ[q]);
            for &(mp, mq, a) in &self.columns[np * d + nq] {
                let target = idx as isize + (mp as isize - np as isize) * sp + (mq as isize - nq as isize) * sq;
                amps_out[target as usize] += amp * a;
            }
        }
        out
    }
}

fn require_absorbing(lambda: &LambdaMatrix) -> Result<(), FockError> {
    if lambda.kind() != DeviceKind::Absorbing {
        return Err(DeviceError::WrongKind { expected: DeviceKind::Absorbing }.into());
    }
    Ok(())
}

fn lambda_dense(lambda: &LambdaMatrix) -> DMatrix<C64> {
    DMatrix::from_iterator(4, 4, lambda.matrix().iter().copied())
}

fn require_four_modes(basis: Basis) -> Result<(), FockError> {
    if basis.modes() != MAX_MODES {
        return Err(FockError::Dimension { expected: MAX_MODES, got: basis.modes() });
    }
    Ok(())
}

/// Per-sector unitary blocks: for each total photon number `s ≤ cutoff`,
/// the basis indices of the sector and the matrix `⟨out|U|in⟩`.
fn sector_blocks(basis: Basis, m: &DMatrix<C64>) -> Vec<(Vec<usize>, DMatrix<C64>)> {
    let mut blocks = Vec::with_capacity(basis.cutoff() + 1);
    for s in 0..=basis.cutoff() {
        let idx = basis.sector(s);
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut u = DMatrix::zeros(idx.len(), idx.len());
        for (col, &i) in idx.iter().enumerate() {
            let occ = basis.occupation(i);
            for (o, a) in transform_occupation(m, &occ[..basis.modes()]) {
                let row = pos[&basis.index(&o[..basis.modes()]).expect("sector states are within the cutoff")];
                u[(row, col)] = a;
            }
        }
        blocks.push((idx, u));
    }
    blocks
}

/// Largest total photon number carrying weight in `rho`.
fn max_support(rho: &FockDensity) -> usize {
    let b = rho.basis();
    let m = rho.matrix();
    (0..b.dim())
        .filter(|&i| (0..b.dim()).any(|j| m[(i, j)] != C64::new(0.0, 0.0)))
        .map(|i| b.total(i))
        .max()
        .unwrap_or(0)
}

/// `ρ → U ρ U†` for an absorbing four-port.
///
/// Passive evolution conserves total photon number, so the map is exact if
/// every populated state has at most `cutoff` photons in total; otherwise
/// [`FockError::CutoffTooSmall`] is returned.
pub fn passive_transform(rho: &FockDensity, lambda: &LambdaMatrix) -> Result<FockDensity, FockError> {
    require_absorbing(lambda)?;
    let basis = rho.basis();
    require_four_modes(basis)?;
    let required = max_support(rho);
    if required > basis.cutoff() {
        return Err(FockError::CutoffTooSmall { cutoff: basis.cutoff(), required });
    }
    let blocks = sector_blocks(basis, &lambda_dense(lambda));
    let m = rho.matrix();
    let mut out = DMatrix::zeros(basis.dim(), basis.dim());
    for (ri, ui) in &blocks {
        for (rj, uj) in &blocks {
            let sub = DMatrix::from_fn(ri.len(), rj.len(), |a, b| m[(ri[a], rj[b])]);
            if sub.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            let t = ui * sub * uj.adjoint();
            for (a, &i) in ri.iter().enumerate() {
                for (b, &j) in rj.iter().enumerate() {
                    out[(i, j)] = t[(a, b)];
                }
            }
        }
    }
    // Restore exact Hermiticity lost to rounding.
    let out = (&out + out.adjoint()) * c(0.5, 0.0);
    Ok(FockDensity::from_parts(basis, out))
}

/// `|ψ⟩ → U|ψ⟩` for an absorbing four-port.
pub fn passive_transform_ket(ket: &FockKet, lambda: &LambdaMatrix) -> Result<FockKet, FockError> {
    require_absorbing(lambda)?;
    let basis = ket.basis();
    require_four_modes(basis)?;
    let m = lambda_dense(lambda);
    let mut out = FockKet::zeros(basis);
    let amps_out = out.amplitudes_mut();
    for (i, amp) in ket.amplitudes().iter().enumerate() {
        if *amp == C64::new(0.0, 0.0) {
            continue;
        }
        let occ = basis.occupation(i);
        let required: usize = occ.iter().sum();
        if required > basis.cutoff() {
            return Err(FockError::CutoffTooSmall { cutoff: basis.cutoff(), required });
        }
        for (o, a) in transform_occupation(&m, &occ) {
            amps_out[basis.index(&o).expect("photon number conserved")] += amp * a;
        }
    }
    Ok(out)
}

pub fn passive_transform_ensemble(ens: &FockEnsemble, lambda: &LambdaMatrix) -> Result<FockEnsemble, FockError> {
    let members = ens
        .members()
        .iter()
        .map(|(w, k)| Ok((*w, passive_transform_ket(k, lambda)?)))
        .collect::<Result<Vec<_>, FockError>>()?;
    FockEnsemble::new(ens.basis(), members)
}
