//! Nanodiamond, field and derived trap parameters.
//!
//! Sign convention: diamond is diamagnetic, but the trap formulas are written with the
//! susceptibility magnitude `|χ|` so that ω = B'·sqrt(|χ|V/(μ0 m)) is real. Everything
//! downstream (equilibria, couplings, separations) uses the same magnitude.

use serde::Serialize;

use crate::constants::PhysicalConstants;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Bulk material properties shared by every ND of a given batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Material<S> {
    /// kg/m³
    pub density: S,
    /// Magnitude of the SI volume susceptibility.
    pub chi_magnitude: S,
    /// Relative permittivity.
    pub epsilon: S,
}

impl<S: Scalar> Material<S> {
    /// Diamond: 3550 kg/m³, |χ| = 2.2e-5, ε = 5.7.
    pub fn diamond() -> Self {
        Self {
            density: S::lit(3550.0),
            chi_magnitude: S::lit(2.2e-5),
            epsilon: S::lit(5.7),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density.is_finite() && self.density > S::zero()) {
            return Err(invalid("density", "must be finite and > 0"));
        }
        if !(self.chi_magnitude.is_finite() && self.chi_magnitude > S::zero()) {
            return Err(invalid("chi_magnitude", "must be finite and > 0"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > S::one()) {
            return Err(invalid("epsilon", "must be finite and > 1"));
        }
        Ok(())
    }
}

/// A homogeneous spherical nanodiamond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NanodiamondParams<S> {
    diameter: S,
    material: Material<S>,
}

impl<S: Scalar> NanodiamondParams<S> {
    pub fn new(diameter: S, material: Material<S>) -> Result<Self> {
        material.validate()?;
        if !(diameter.is_finite() && diameter > S::zero()) {
            return Err(invalid("diameter", "must be finite and > 0"));
        }
        Ok(Self { diameter, material })
    }

    /// Sphere of the given mass at the material density.
    pub fn from_mass(mass: S, material: Material<S>) -> Result<Self> {
        material.validate()?;
        if !(mass.is_finite() && mass > S::zero()) {
            return Err(invalid("mass", "must be finite and > 0"));
        }
        let volume = mass / material.density;
        let diameter = (S::lit(6.0) * volume / S::PI()).cbrt();
        Self::new(diameter, material)
    }

    pub fn diameter(&self) -> S {
        self.diameter
    }

    pub fn material(&self) -> &Material<S> {
        &self.material
    }

    /// m³
    pub fn volume(&self) -> S {
        S::PI() / S::lit(6.0) * self.diameter.powi(3)
    }

    /// kg
    pub fn mass(&self) -> S {
        self.material.density * self.volume()
    }

    pub fn chi_magnitude(&self) -> S {
        self.material.chi_magnitude
    }

    pub fn epsilon(&self) -> S {
        self.material.epsilon
    }
}

/// Bias field, gradient and interferometer tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldConfig<S> {
    /// Bias field B0, T. May be zero or negative.
    pub b0: S,
    /// Gradient B' = dB/dx, T/m.
    pub bprime: S,
    /// Tilt θ_g of the x axis in the x–z plane, rad.
    pub tilt: S,
}

impl<S: Scalar> FieldConfig<S> {
    pub fn new(b0: S, bprime: S, tilt: S) -> Result<Self> {
        let f = Self { b0, bprime, tilt };
        f.validate()?;
        Ok(f)
    }

    pub fn gradient(bprime: S) -> Result<Self> {
        Self::new(S::zero(), bprime, S::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.b0.is_finite() {
            return Err(invalid("B0", "must be finite"));
        }
        if !(self.bprime.is_finite() && self.bprime > S::zero()) {
            return Err(invalid("Bprime", "must be finite and > 0"));
        }
        if !(self.tilt >= S::zero() && self.tilt < S::FRAC_PI_2()) {
            return Err(invalid("tilt_theta_g", "must lie in [0, pi/2)"));
        }
        Ok(())
    }
}

/// Trap quantities derived from one ND in one field configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorParams<S> {
    /// rad/s
    pub omega: S,
    pub x_zpf: S,
    pub p_zpf: S,
    /// Spin–mechanical coupling γ_e B' x_zpf, rad/s.
    pub lambda: S,
    /// Bias coupling (B0/B')·sqrt(mω³/2ħ), rad/s; carries the sign of B0.
    pub lambda0: S,
    /// Gravitational coupling from the tilt, rad/s.
    pub lambda_g: S,
    pub lambda_plus: S,
    pub lambda_minus: S,
    /// Tilted couplings λ0 + λ_g ± λ.
    pub big_lambda_plus: S,
    pub big_lambda_minus: S,
}

impl<S: Scalar> OscillatorParams<S> {
    pub fn derive(k: &PhysicalConstants<S>, nd: &NanodiamondParams<S>, field: &FieldConfig<S>) -> Result<Self> {
        field.validate()?;
        let volume = nd.volume();
        if !(volume > S::zero()) {
            return Err(invalid("volume", "must be > 0"));
        }
        let m = nd.mass();
        let omega = field.bprime * (nd.chi_magnitude() * volume / (k.mu0 * m)).sqrt();
        let two = S::two();
        let x_zpf = (k.hbar / (two * m * omega)).sqrt();
        let p_zpf = (k.hbar * m * omega / two).sqrt();
        let lambda = k.gamma_e * field.bprime * x_zpf;
        let lambda0 = field.b0 / field.bprime * (m * omega.powi(3) / (two * k.hbar)).sqrt();
        let lambda_g = m * k.g_earth * x_zpf * field.tilt.sin() / k.hbar;
        Ok(Self {
            omega,
            x_zpf,
            p_zpf,
            lambda,
            lambda0,
            lambda_g,
            lambda_plus: lambda0 + lambda,
            lambda_minus: lambda0 - lambda,
            big_lambda_plus: lambda0 + lambda_g + lambda,
            big_lambda_minus: lambda0 + lambda_g - lambda,
        })
    }

    pub fn period(&self) -> S {
        S::TAU() / self.omega
    }
}

/// NV spin projection along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Spin {
    Minus,
    Zero,
    Plus,
}

impl Spin {
    pub fn sign(self) -> i8 {
        match self {
            Spin::Minus => -1,
            Spin::Zero => 0,
            Spin::Plus => 1,
        }
    }

    pub fn value<S: Scalar>(self) -> S {
        S::lit(f64::from(self.sign()))
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Minus => Spin::Plus,
            Spin::Zero => Spin::Zero,
            Spin::Plus => Spin::Minus,
        }
    }
}

/// One ND in one field configuration together with the shared constants table.
///
/// Most operations of the toolkit are methods on this type; they are spread across the
/// `coherent`, `dd` and `entanglement` modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapModel<S> {
    pub constants: PhysicalConstants<S>,
    pub nd: NanodiamondParams<S>,
    pub field: FieldConfig<S>,
    pub osc: OscillatorParams<S>,
}

impl<S: Scalar> TrapModel<S> {
    pub fn new(constants: PhysicalConstants<S>, nd: NanodiamondParams<S>, field: FieldConfig<S>) -> Result<Self> {
        constants.validate()?;
        let osc = OscillatorParams::derive(&constants, &nd, &field)?;
        Ok(Self {
            constants,
            nd,
            field,
            osc,
        })
    }

    pub fn period(&self) -> S {
        self.osc.period()
    }

    /// Coupling λ0 + s·λ of one spin branch.
    pub fn branch_coupling(&self, spin: Spin) -> S {
        self.osc.lambda0 + spin.value::<S>() * self.osc.lambda
    }

    /// Lab-frame equilibrium x0 = −(|χ|V B0 + s ħγ_e μ0)/(|χ|V B') of one branch.
    pub fn equilibrium(&self, spin: Spin) -> S {
        let k = &self.constants;
        let chi_v = self.nd.chi_magnitude() * self.nd.volume();
        -(chi_v * self.field.b0 + spin.value::<S>() * k.hbar * k.gamma_e * k.mu0) / (chi_v * self.field.bprime)
    }

    /// (x0_+, x0_−), m.
    pub fn equilibrium_positions(&self) -> (S, S) {
        (self.equilibrium(Spin::Plus), self.equilibrium(Spin::Minus))
    }

    /// Largest separation 4ħγ_e μ0/(|χ| V B') reached by the two branches; independent of B0.
    pub fn max_separation(&self) -> S {
        let k = &self.constants;
        S::lit(4.0) * k.hbar * k.gamma_e * k.mu0 / (self.nd.chi_magnitude() * self.nd.volume() * self.field.bprime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(d: f64, b0: f64, bp: f64) -> TrapModel<f64> {
        let nd = NanodiamondParams::new(d, Material::diamond()).unwrap();
        TrapModel::new(PhysicalConstants::codata(), nd, FieldConfig::new(b0, bp, 0.0).unwrap()).unwrap()
    }

    fn mass_model(m: f64, bp: f64) -> TrapModel<f64> {
        let nd = NanodiamondParams::from_mass(m, Material::diamond()).unwrap();
        TrapModel::new(PhysicalConstants::codata(), nd, FieldConfig::gradient(bp).unwrap()).unwrap()
    }

    #[test]
    fn mass_from_density_and_diameter() {
        let nd = NanodiamondParams::new(250e-9, Material::diamond()).unwrap();
        let expected = 3550.0 * std::f64::consts::PI / 6.0 * 250e-9f64.powi(3);
        assert!((nd.mass() - expected).abs() <= 1e-15 * expected);
        let back = NanodiamondParams::<f64>::from_mass(1e-12, Material::diamond()).unwrap();
        assert!((back.mass() - 1e-12).abs() < 1e-26);
    }

    #[test]
    fn omega_at_the_hold_only_optimum() {
        // ω = B' sqrt(|χ|/(μ0 ρ)) once V = m/ρ.
        let m = mass_model(1e-12, 0.475);
        let k = PhysicalConstants::<f64>::codata();
        let expected = 0.475 * (2.2e-5 / (k.mu0 * 3550.0)).sqrt();
        assert!((m.osc.omega - expected).abs() < 1e-14 * expected);
        assert!((m.osc.omega - 3.3357e-2).abs() < 1e-5);
        assert!((m.period() - 188.36).abs() < 0.01);
    }

    #[test]
    fn separation_at_the_hold_only_optimum() {
        let m = mass_model(1e-12, 0.475);
        assert!((m.max_separation() - 3.1709e-8).abs() < 1e-12);
        let (xp, xm) = m.equilibrium_positions();
        assert!(((xp - xm).abs() - m.max_separation() / 2.0).abs() < 1e-22);
    }

    #[test]
    fn zero_tilt_gives_no_gravity_coupling() {
        assert_eq!(model(250e-9, 0.0, 1e3).osc.lambda_g, 0.0);
    }

    #[test]
    fn equilibria_are_symmetric_without_bias() {
        let (xp, xm) = model(250e-9, 0.0, 1e3).equilibrium_positions();
        assert_eq!(xp + xm, 0.0);
    }

    #[test]
    fn bias_shifts_both_equilibria_equally() {
        let (p0, m0) = model(250e-9, 0.0, 1e3).equilibrium_positions();
        let (p1, m1) = model(250e-9, 5e-4, 1e3).equilibrium_positions();
        let shift = -5e-4 / 1e3;
        assert!((p1 - p0 - shift).abs() < 1e-20);
        assert!((m1 - m0 - shift).abs() < 1e-20);
    }

    #[test]
    fn doubling_gradient_halves_separation() {
        let a = model(250e-9, 0.0, 1e3).max_separation();
        let b = model(250e-9, 0.0, 2e3).max_separation();
        assert!((a / b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_field() {
        assert!(FieldConfig::new(0.0, 0.0, 0.0).is_err());
        assert!(FieldConfig::new(0.0, -1.0, 0.0).is_err());
        assert!(FieldConfig::new(0.0, 1.0, std::f64::consts::FRAC_PI_2).is_err());
        assert!(NanodiamondParams::new(0.0, Material::<f64>::diamond()).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let nd = NanodiamondParams::<f32>::new(250e-9, Material::diamond()).unwrap();
        let m = TrapModel::new(PhysicalConstants::codata(), nd, FieldConfig::gradient(1e3).unwrap()).unwrap();
        let reference = model(250e-9, 0.0, 1e3);
        assert!((f64::from(m.osc.omega) / reference.osc.omega - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn derived_quantities_obey_identities(
            d in 50e-9f64..2e-6,
            b0 in -3e-3f64..3e-3,
            bp in 0.05f64..2e3,
            tilt in 0.0f64..1.5,
        ) {
            let nd = NanodiamondParams::new(d, Material::diamond()).unwrap();
            let k = PhysicalConstants::codata();
            let m = TrapModel::new(k, nd, FieldConfig::new(b0, bp, tilt).unwrap()).unwrap();
            let o = &m.osc;
            prop_assert!(o.omega > 0.0 && o.x_zpf > 0.0 && o.p_zpf > 0.0);
            prop_assert!((o.x_zpf * o.p_zpf / (k.hbar / 2.0) - 1.0).abs() < 1e-14);
            let scale = o.lambda_plus.abs() + o.lambda_minus.abs() + o.lambda_g.abs();
            prop_assert!((o.lambda_plus - o.lambda_minus - 2.0 * o.lambda).abs() <= 4e-16 * scale);
            prop_assert!((o.big_lambda_plus - o.lambda_plus - o.lambda_g).abs() <= 4e-16 * scale);
            prop_assert!((o.big_lambda_minus - o.lambda_minus - o.lambda_g).abs() <= 4e-16 * scale);

            let unbiased = TrapModel::new(k, nd, FieldConfig::new(0.0, bp, tilt).unwrap()).unwrap();
            prop_assert_eq!(m.max_separation(), unbiased.max_separation());
        }
    }
}
