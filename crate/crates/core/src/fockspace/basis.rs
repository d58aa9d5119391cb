use super::FockError;

/// Maximum number of bosonic modes.
pub const MAX_MODES: usize = 4;

/// Product number basis `|n₁ … n_m⟩`, `n_i ≤ cutoff`, ordered
/// lexicographically with `n₁` the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Basis {
    modes: usize,
    cutoff: usize,
}

pub type Occupation = [usize; MAX_MODES];

impl Basis {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self, FockError> {
        if modes == 0 || modes > MAX_MODES {
            return Err(FockError::ModeCount(modes));
        }
        Ok(Self { modes, cutoff })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.modes as u32)
    }

    /// Index stride of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.levels().pow((self.modes - 1 - mode) as u32)
    }

    /// Returns `None` if any occupation exceeds the cutoff.
    pub fn index(&self, occ: &[usize]) -> Option<usize> {
        debug_assert_eq!(occ.len(), self.modes);
        let d = self.levels();
        let mut idx = 0;
        for &n in occ {
            if n > self.cutoff {
                return None;
            }
            idx = idx * d + n;
        }
        Some(idx)
    }

    pub fn occupation(&self, mut idx: usize) -> Occupation {
        let d = self.levels();
        let mut occ = [0; MAX_MODES];
        for m in (0..self.modes).rev() {
            occ[m] = idx % d;
            idx /= d;
        }
        occ
    }

    pub fn total(&self, idx: usize) -> usize {
        self.occupation(idx).iter().sum()
    }

    /// Indices of all states with exactly `photons` quanta.
    pub fn sector(&self, photons: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.total(i) == photons).collect()
    }
}
