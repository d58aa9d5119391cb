use nalgebra::DMatrix;

use super::basis::Basis;
use super::states::{FockDensity, FockEnsemble};
use super::FockError;
use crate::linalg::{c, C64};

/// Index maps splitting a basis into kept and discarded modes: for each
/// full index, its position in the kept and in the discarded sub-basis.
fn split(basis: Basis, keep: &[usize]) -> Result<(Basis, Vec<(usize, usize)>, usize), FockError> {
    let m = basis.modes();
    let mut seen = [false; super::MAX_MODES];
    if keep.is_empty() {
        return Err(FockError::InvalidKeep);
    }
    for &k in keep {
        if k >= m || seen[k] {
            return Err(FockError::InvalidKeep);
        }
        seen[k] = true;
    }
    let drop: Vec<usize> = (0..m).filter(|k| !seen[*k]).collect();
    let kept = Basis::new(keep.len(), basis.cutoff())?;
    let d = basis.levels();
    let map = (0..basis.dim())
        .map(|i| {
            let occ = basis.occupation(i);
            let ki = keep.iter().fold(0, |acc, &k| acc * d + occ[k]);
            let di = drop.iter().fold(0, |acc, &k| acc * d + occ[k]);
            (ki, di)
        })
        .collect();
    Ok((kept, map, d.pow(drop.len() as u32)))
}

/// Reduced density over the modes in `keep`, in the given order.
pub fn partial_trace(rho: &FockDensity, keep: &[usize]) -> Result<FockDensity, FockError> {
    let (kept, map, _) = split(rho.basis(), keep)?;
    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(kept.dim(), kept.dim());
    for (i, &(ki, di)) in map.iter().enumerate() {
        for (j, &(kj, dj)) in map.iter().enumerate() {
            if di == dj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(FockDensity::from_parts(kept, out))
}

/// Reduced density of an ensemble; `Σ w Ψ Ψ†` with `Ψ` the ket reshaped
/// to (kept × discarded).
pub(crate) fn ensemble_partial_trace(ens: &FockEnsemble, keep: &[usize]) -> Result<FockDensity, FockError> {
    let (kept, map, ddim) = split(ens.basis(), keep)?;
    let mut out = DMatrix::<C64>::zeros(kept.dim(), kept.dim());
    for (w, ket) in ens.members() {
        let mut psi = DMatrix::<C64>::zeros(kept.dim(), ddim);
        for (i, &(ki, di)) in map.iter().enumerate() {
            psi[(ki, di)] = ket.amplitudes()[i];
        }
        out += (&psi * psi.adjoint()) * c(*w, 0.0);
    }
    let out = (&out + out.adjoint()) * c(0.5, 0.0);
    Ok(FockDensity::from_parts(kept, out))
}

impl FockEnsemble {
    /// Reduced density over the modes in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<FockDensity, FockError> {
        ensemble_partial_trace(self, keep)
    }
}
