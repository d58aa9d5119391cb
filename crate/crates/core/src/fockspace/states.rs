use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::basis::{Basis, MAX_MODES};
use super::FockError;
use crate::linalg::{c, C64};

/// Largest dimension for which dense densities are formed.
const DENSE_LIMIT: usize = 20_000;
/// Eigenvalues below this are dropped when a density becomes an ensemble.
const EIGEN_DROP: f64 = 1e-15;

/// State vector over a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockKet {
    basis: Basis,
    amps: Vec<C64>,
}

impl FockKet {
    pub fn zeros(basis: Basis) -> Self {
        Self { basis, amps: vec![C64::new(0.0, 0.0); basis.dim()] }
    }

    pub fn new(basis: Basis, amps: Vec<C64>) -> Result<Self, FockError> {
        if amps.len() != basis.dim() {
            return Err(FockError::Dimension { expected: basis.dim(), got: amps.len() });
        }
        Ok(Self { basis, amps })
    }

    /// Number state `|n₁ … n_m⟩`.
    pub fn number_state(occ: &[usize], cutoff: usize) -> Result<Self, FockError> {
        let basis = Basis::new(occ.len(), cutoff)?;
        let required = occ.iter().copied().max().unwrap_or(0);
        let idx = basis.index(occ).ok_or(FockError::CutoffTooSmall { cutoff, required })?;
        let mut k = Self::zeros(basis);
        k.amps[idx] = c(1.0, 0.0);
        Ok(k)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Same amplitudes in a basis with a larger cutoff.
    pub fn embed(&self, cutoff: usize) -> Result<Self, FockError> {
        if cutoff < self.basis.cutoff() {
            return Err(FockError::CutoffTooSmall { cutoff, required: self.basis.cutoff() });
        }
        let basis = Basis::new(self.basis.modes(), cutoff)?;
        let mut out = Self::zeros(basis);
        for (i, a) in self.amps.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                let occ = self.basis.occupation(i);
                let j = basis.index(&occ[..basis.modes()]).expect("embedding into a larger cutoff");
                out.amps[j] = *a;
            }
        }
        Ok(out)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &FockKet) -> Result<Self, FockError> {
        if self.basis.cutoff() != other.basis.cutoff() {
            return Err(FockError::Dimension { expected: self.basis.cutoff(), got: other.basis.cutoff() });
        }
        let basis = Basis::new(self.basis.modes() + other.basis.modes(), self.basis.cutoff())?;
        let mut amps = Vec::with_capacity(basis.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { basis, amps })
    }

    pub fn to_density(&self) -> Result<FockDensity, FockError> {
        let v = DVector::from_column_slice(&self.amps);
        FockDensity::new(self.basis, &v * v.adjoint())
    }
}

/// Dense Hermitian density matrix over a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    basis: Basis,
    data: DMatrix<C64>,
}

impl FockDensity {
    /// Checks shape, Hermiticity (within `1e-12` of the largest entry) and
    /// `Tr ρ ≤ 1 + 1e-10`. Positivity is not checked here; see
    /// [`FockDensity::min_eigenvalue`].
    pub fn new(basis: Basis, data: DMatrix<C64>) -> Result<Self, FockError> {
        let dim = basis.dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(FockError::Dimension { expected: dim, got: data.nrows().max(data.ncols()) });
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let dev = hermitian_deviation(&data);
        if dev > 1e-12 * scale {
            return Err(FockError::NotHermitian(dev));
        }
        let tr = data.trace().re;
        if tr > 1.0 + 1e-10 {
            return Err(FockError::TraceTooLarge(tr));
        }
        Ok(Self { basis, data })
    }

    pub(crate) fn from_parts(basis: Basis, data: DMatrix<C64>) -> Self {
        Self { basis, data }
    }

    pub fn vacuum(modes: usize, cutoff: usize) -> Result<Self, FockError> {
        Self::number_state(&vec![0; modes], cutoff)
    }

    pub fn number_state(occ: &[usize], cutoff: usize) -> Result<Self, FockError> {
        FockKet::number_state(occ, cutoff)?.to_density()
    }

    /// Product of single-mode densities, each of size `(cutoff+1)²`.
    pub fn product(factors: &[DMatrix<C64>], cutoff: usize) -> Result<Self, FockError> {
        let basis = Basis::new(factors.len(), cutoff)?;
        let mut data = DMatrix::from_element(1, 1, c(1.0, 0.0));
        for f in factors {
            if f.nrows() != cutoff + 1 || f.ncols() != cutoff + 1 {
                return Err(FockError::Dimension { expected: cutoff + 1, got: f.nrows() });
            }
            data = data.kronecker(f);
        }
        Self::new(basis, data)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.data.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Probability of each total photon number `0 ..= modes·cutoff`.
    pub fn total_number_distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.basis.modes() * self.basis.cutoff() + 1];
        for i in 0..self.basis.dim() {
            p[self.basis.total(i)] += self.data[(i, i)].re;
        }
        p
    }

    /// Photon-number distribution of one mode.
    pub fn mode_distribution(&self, mode: usize) -> Result<Vec<f64>, FockError> {
        if mode >= self.basis.modes() {
            return Err(FockError::InvalidChannel(mode));
        }
        let mut p = vec![0.0; self.basis.levels()];
        for i in 0..self.basis.dim() {
            p[self.basis.occupation(i)[mode]] += self.data[(i, i)].re;
        }
        Ok(p)
    }

    /// `⟨n⟩` of one mode.
    pub fn mean_photons(&self, mode: usize) -> Result<f64, FockError> {
        Ok(self.mode_distribution(mode)?.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
    }

    /// `⟨n²⟩` of one mode.
    pub fn second_moment(&self, mode: usize) -> Result<f64, FockError> {
        Ok(self.mode_distribution(mode)?.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum())
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &FockDensity) -> Result<f64, FockError> {
        if self.basis != other.basis {
            return Err(FockError::Dimension { expected: self.basis.dim(), got: other.basis.dim() });
        }
        let diff = &self.data - &other.data;
        Ok(0.5 * SymmetricEigen::new(diff).eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Same state in a basis with a larger cutoff.
    pub fn embed(&self, cutoff: usize) -> Result<Self, FockError> {
        if cutoff < self.basis.cutoff() {
            return Err(FockError::CutoffTooSmall { cutoff, required: self.basis.cutoff() });
        }
        let basis = Basis::new(self.basis.modes(), cutoff)?;
        let map: Vec<usize> = (0..self.basis.dim())
            .map(|i| basis.index(&self.basis.occupation(i)[..basis.modes()]).expect("larger cutoff"))
            .collect();
        let mut data = DMatrix::zeros(basis.dim(), basis.dim());
        for (i, &mi) in map.iter().enumerate() {
            for (j, &mj) in map.iter().enumerate() {
                data[(mi, mj)] = self.data[(i, j)];
            }
        }
        Ok(Self { basis, data })
    }
}

pub(crate) fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Mixture `Σ w_k |ψ_k⟩⟨ψ_k|` with `w_k ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockEnsemble {
    basis: Basis,
    members: Vec<(f64, FockKet)>,
}

impl FockEnsemble {
    pub fn new(basis: Basis, members: Vec<(f64, FockKet)>) -> Result<Self, FockError> {
        for (w, k) in &members {
            if k.basis() != basis {
                return Err(FockError::Dimension { expected: basis.dim(), got: k.basis().dim() });
            }
            if !(*w >= 0.0) {
                return Err(FockError::TraceTooLarge(*w));
            }
        }
        Ok(Self { basis, members })
    }

    pub fn pure(ket: FockKet) -> Self {
        Self { basis: ket.basis(), members: vec![(1.0, ket)] }
    }

    /// Spectral decomposition of a density; eigenvalues below `1e-15` are dropped.
    pub fn from_density(rho: &FockDensity) -> Self {
        let eig = SymmetricEigen::new(rho.matrix().clone());
        let mut members = Vec::new();
        for (k, &w) in eig.eigenvalues.iter().enumerate() {
            if w > EIGEN_DROP {
                let v = eig.eigenvectors.column(k);
                members.push((w, FockKet { basis: rho.basis(), amps: v.iter().copied().collect() }));
            }
        }
        Self { basis: rho.basis(), members }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn members(&self) -> &[(f64, FockKet)] {
        &self.members
    }

    pub fn trace(&self) -> f64 {
        self.members.iter().map(|(w, k)| w * k.norm_sqr()).sum()
    }

    /// Photon-number distribution of one mode (unnormalized if weight was lost).
    pub fn mode_distribution(&self, mode: usize) -> Result<Vec<f64>, FockError> {
        if mode >= self.basis.modes() {
            return Err(FockError::InvalidChannel(mode));
        }
        let mut p = vec![0.0; self.basis.levels()];
        for (w, k) in &self.members {
            for (i, a) in k.amplitudes().iter().enumerate() {
                let n2 = a.norm_sqr();
                if n2 > 0.0 {
                    p[self.basis.occupation(i)[mode]] += w * n2;
                }
            }
        }
        Ok(p)
    }

    pub fn mean_photons(&self, mode: usize) -> Result<f64, FockError> {
        Ok(self.mode_distribution(mode)?.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
    }

    pub fn embed(&self, cutoff: usize) -> Result<Self, FockError> {
        let members = self.members.iter().map(|(w, k)| Ok((*w, k.embed(cutoff)?))).collect::<Result<Vec<_>, FockError>>()?;
        Ok(Self { basis: Basis::new(self.basis.modes(), cutoff)?, members })
    }

    /// Dense density; refused above 20 000 basis states.
    pub fn to_density(&self) -> Result<FockDensity, FockError> {
        let dim = self.basis.dim();
        if dim > DENSE_LIMIT {
            return Err(FockError::TooLarge(dim));
        }
        let mut data = DMatrix::zeros(dim, dim);
        for (w, k) in &self.members {
            let v = DVector::from_column_slice(k.amplitudes());
            data += (&v * v.adjoint()) * c(*w, 0.0);
        }
        Ok(FockDensity::from_parts(self.basis, data))
    }
}

/// Preparation of a single input channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelPrep {
    Vacuum,
    Fock(usize),
    /// Single-mode density in the number basis `0 ..= dim−1`.
    Density(DMatrix<C64>),
}

impl ChannelPrep {
    pub fn max_photons(&self) -> usize {
        match self {
            ChannelPrep::Vacuum => 0,
            ChannelPrep::Fock(n) => *n,
            ChannelPrep::Density(m) => m.nrows().saturating_sub(1),
        }
    }

    fn validate(&self) -> Result<(), FockError> {
        if let ChannelPrep::Density(m) = self {
            if m.nrows() == 0 || m.nrows() != m.ncols() {
                return Err(FockError::Dimension { expected: m.nrows(), got: m.ncols() });
            }
            let dev = hermitian_deviation(m);
            if dev > 1e-12 {
                return Err(FockError::NotHermitian(dev));
            }
            let tr = m.trace().re;
            if tr > 1.0 + 1e-10 {
                return Err(FockError::TraceTooLarge(tr));
            }
        }
        Ok(())
    }

    /// Single-mode density padded to `cutoff + 1` levels.
    fn density(&self, cutoff: usize) -> DMatrix<C64> {
        let d = cutoff + 1;
        let mut m = DMatrix::zeros(d, d);
        match self {
            ChannelPrep::Vacuum => m[(0, 0)] = c(1.0, 0.0),
            ChannelPrep::Fock(n) => m[(*n, *n)] = c(1.0, 0.0),
            ChannelPrep::Density(rho) => m.view_mut((0, 0), (rho.nrows(), rho.ncols())).copy_from(rho),
        }
        m
    }

    /// Weighted pure components at the given cutoff.
    fn components(&self, cutoff: usize) -> Result<Vec<(f64, FockKet)>, FockError> {
        let basis = Basis::new(1, cutoff)?;
        let single = FockDensity::from_parts(basis, self.density(cutoff));
        Ok(FockEnsemble::from_density(&single).members)
    }
}

/// Product input state of the four channels `(a₁, a₂, g₁, g₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub channels: [ChannelPrep; MAX_MODES],
}

impl InputSpec {
    pub fn new(channels: [ChannelPrep; MAX_MODES]) -> Result<Self, FockError> {
        for ch in &channels {
            ch.validate()?;
        }
        Ok(Self { channels })
    }

    /// Field channels as given, device channels in their ground state.
    pub fn fields(a1: ChannelPrep, a2: ChannelPrep) -> Result<Self, FockError> {
        Self::new([a1, a2, ChannelPrep::Vacuum, ChannelPrep::Vacuum])
    }

    /// Largest total photon number with nonzero weight.
    pub fn max_total_photons(&self) -> usize {
        self.channels.iter().map(ChannelPrep::max_photons).sum()
    }

    pub fn to_density(&self, cutoff: usize) -> Result<FockDensity, FockError> {
        let required = self.channels.iter().map(ChannelPrep::max_photons).max().unwrap_or(0);
        if cutoff < required {
            return Err(FockError::CutoffTooSmall { cutoff, required });
        }
        let factors: Vec<_> = self.channels.iter().map(|ch| ch.density(cutoff)).collect();
        FockDensity::product(&factors, cutoff)
    }

    pub fn to_ensemble(&self, cutoff: usize) -> Result<FockEnsemble, FockError> {
        let required = self.channels.iter().map(ChannelPrep::max_photons).max().unwrap_or(0);
        if cutoff < required {
            return Err(FockError::CutoffTooSmall { cutoff, required });
        }
        let mut members: Vec<(f64, FockKet)> = Vec::new();
        for (i, ch) in self.channels.iter().enumerate() {
            let comps = ch.components(cutoff)?;
            members = if i == 0 {
                comps
            } else {
                let mut next = Vec::with_capacity(members.len() * comps.len());
                for (w, k) in &members {
                    for (v, q) in &comps {
                        next.push((w * v, k.tensor(q)?));
                    }
                }
                next
            };
        }
        FockEnsemble::new(Basis::new(MAX_MODES, cutoff)?, members)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_state_density() {
        let rho = FockDensity::number_state(&[1, 0], 2).unwrap();
        assert_eq!(rho.trace(), 1.0);
        assert_eq!(rho.mean_photons(0).unwrap(), 1.0);
        assert_eq!(rho.mean_photons(1).unwrap(), 0.0);
        assert_eq!(rho.total_number_distribution()[1], 1.0);
    }

    #[test]
    fn rejects_bad_densities() {
        let b = Basis::new(1, 1).unwrap();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(FockDensity::new(b, m), Err(FockError::NotHermitian(_))));
        let m = DMatrix::identity(2, 2);
        assert!(matches!(FockDensity::new(b, m), Err(FockError::TraceTooLarge(_))));
    }

    #[test]
    fn ensemble_matches_density() {
        let mut rho1 = DMatrix::zeros(2, 2);
        rho1[(0, 0)] = c(0.7, 0.0);
        rho1[(1, 1)] = c(0.3, 0.0);
        rho1[(0, 1)] = c(0.1, 0.2);
        rho1[(1, 0)] = c(0.1, -0.2);
        let spec = InputSpec::fields(ChannelPrep::Density(rho1), ChannelPrep::Fock(1)).unwrap();
        let dense = spec.to_density(2).unwrap();
        let ens = spec.to_ensemble(2).unwrap().to_density().unwrap();
        let diff = (dense.matrix() - ens.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-14);
        assert!((dense.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn embedding_preserves_state() {
        let rho = FockDensity::number_state(&[1, 1], 1).unwrap();
        let big = rho.embed(3).unwrap();
        assert_eq!(big.basis().dim(), 16);
        assert_eq!(big.mean_photons(1).unwrap(), 1.0);
        assert!(rho.embed(0).is_err());
    }
}
