use serde::Serialize;

/// SI constants (CODATA 2018).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub epsilon0: f64,
    pub c: f64,
    pub mu0: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        epsilon0: 8.854_187_812_8e-12,
        c: 299_792_458.0,
        mu0: 1.256_637_062_12e-6,
    };

    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega / self.c
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}
