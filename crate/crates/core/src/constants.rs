//! Physical constants table.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// SI constants used across the toolkit. One table is built per run and shared by reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants<S> {
    /// Reduced Planck constant, J·s.
    pub hbar: S,
    /// Vacuum permeability, T·m/A.
    pub mu0: S,
    /// Speed of light, m/s.
    pub c: S,
    /// Newtonian gravitational constant, m³/(kg·s²).
    pub g_newton: S,
    /// Electron gyromagnetic ratio, rad/(s·T).
    pub gamma_e: S,
    /// Bohr magneton, J/T.
    pub mu_b: S,
    /// Local gravitational acceleration, m/s².
    pub g_earth: S,
    /// NV zero-field splitting, rad/s.
    pub d_zfs: S,
}

impl<S: Scalar> PhysicalConstants<S> {
    /// CODATA 2018 values, standard gravity and the 2.87 GHz NV splitting.
    pub fn codata() -> Self {
        Self {
            hbar: S::lit(1.054_571_817e-34),
            mu0: S::lit(1.256_637_062_12e-6),
            c: S::lit(299_792_458.0),
            g_newton: S::lit(6.674_30e-11),
            gamma_e: S::lit(1.760_859_630_23e11),
            mu_b: S::lit(9.274_010_078_3e-24),
            g_earth: S::lit(9.806_65),
            d_zfs: S::TAU() * S::lit(2.87e9),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("hbar", self.hbar),
            ("mu0", self.mu0),
            ("c", self.c),
            ("G", self.g_newton),
            ("gamma_e", self.gamma_e),
            ("mu_B", self.mu_b),
            ("g_earth", self.g_earth),
            ("D_zfs", self.d_zfs),
        ];
        for (name, value) in entries {
            if !(value.is_finite() && value > S::zero()) {
                return Err(invalid(name, format!("must be finite and > 0, got {}", value.as_f64())));
            }
        }
        Ok(())
    }

    /// Re-expresses the table in another scalar type.
    pub fn cast<T: Scalar>(&self) -> PhysicalConstants<T> {
        let c = |x: S| T::lit(x.as_f64());
        PhysicalConstants {
            hbar: c(self.hbar),
            mu0: c(self.mu0),
            c: c(self.c),
            g_newton: c(self.g_newton),
            gamma_e: c(self.gamma_e),
            mu_b: c(self.mu_b),
            g_earth: c(self.g_earth),
            d_zfs: c(self.d_zfs),
        }
    }
}

impl<S: Scalar> Default for PhysicalConstants<S> {
    fn default() -> Self {
        Self::codata()
    }
}
