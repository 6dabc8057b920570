//! Closed-form branch evolution without decoupling.
//!
//! Amplitudes use the `e^{+iωt}` phasor of the paper's coherent-state solution. That amplitude is
//! the complex conjugate of the Schrödinger-picture one, so momentum is read off as
//! `⟨p⟩ = −2 p_zpf Im α`.

use num_complex::Complex;
use serde::Serialize;

use crate::dd::{self, DdConfig};
use crate::error::{invalid, Result};
use crate::model::{Spin, TrapModel};
use crate::scalar::Scalar;

/// Coherent amplitude and accumulated phase of one spin branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchState<S> {
    pub t: S,
    pub spin: Spin,
    pub alpha: Complex<S>,
    /// Unwrapped phase, rad.
    pub theta: S,
}

impl<S: Scalar> BranchState<S> {
    /// Expected (x, p) in lab coordinates.
    pub fn expectation(&self, model: &TrapModel<S>) -> (S, S) {
        expectation(model, self.alpha)
    }
}

/// Maps a coherent amplitude to lab-frame position and momentum.
pub fn expectation<S: Scalar>(model: &TrapModel<S>, alpha: Complex<S>) -> (S, S) {
    let two = S::two();
    (two * model.osc.x_zpf * alpha.re, -two * model.osc.p_zpf * alpha.im)
}

/// Zeeman plus zero-field-splitting rate D s² + γ_e B0 s of a branch, rad/s.
pub(crate) fn spin_rate<S: Scalar>(model: &TrapModel<S>, spin: Spin, b0: S) -> S {
    let s = spin.value::<S>();
    model.constants.d_zfs * s * s + model.constants.gamma_e * b0 * s
}

/// x(t) = x0_s (1 − cos ωt) for a particle released at rest from the origin.
pub fn classical_position<S: Scalar>(model: &TrapModel<S>, t: S, spin: Spin) -> S {
    model.equilibrium(spin) * (S::one() - (model.osc.omega * t).cos())
}

pub fn branch_state<S: Scalar>(model: &TrapModel<S>, t: S, spin: Spin) -> BranchState<S> {
    let coupling = model.branch_coupling(spin);
    let c = spin_rate(model, spin, model.field.b0);
    shifted_oscillator(model.osc.omega, coupling, c, t, spin)
}

/// Branch state of a shifted oscillator with coupling `lambda` and constant rate `c`, started
/// from the ground state.
pub(crate) fn shifted_oscillator<S: Scalar>(omega: S, lambda: S, c: S, t: S, spin: Spin) -> BranchState<S> {
    let ratio = lambda / omega;
    let (sin, cos) = (omega * t).sin_cos();
    BranchState {
        t,
        spin,
        alpha: Complex::new(ratio * (cos - S::one()), ratio * sin),
        theta: (c - lambda * lambda / omega) * t + ratio * ratio * sin,
    }
}

/// Phase-space samples (⟨x⟩, ⟨p⟩) over one trap period, optionally under decoupling.
///
/// `n_samples = 1` returns the start point only.
pub fn phase_space_curve<S: Scalar>(
    model: &TrapModel<S>,
    n_samples: usize,
    spin: Spin,
    dd: Option<&DdConfig>,
) -> Result<Vec<(S, S)>> {
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let times = sample_times(model.period(), n_samples);
    match dd {
        None => Ok(times
            .iter()
            .map(|&t| branch_state(model, t, spin).expectation(model))
            .collect()),
        Some(cfg) => Ok(dd::dd_trace(model, spin, cfg, &times)?
            .iter()
            .map(|s| s.expectation(model))
            .collect()),
    }
}

/// `n` evenly spaced times covering [0, span], both ends included.
pub fn sample_times<S: Scalar>(span: S, n: usize) -> Vec<S> {
    if n <= 1 {
        return vec![S::zero(); n];
    }
    let last = S::count(n - 1);
    (0..n).map(|k| span * S::count(k) / last).collect()
}

/// Tilted-frame branch phase ϑ_s(t), with Λ_s = λ0 + λ_g + s λ replacing λ_s.
pub fn tilted_branch_phase<S: Scalar>(model: &TrapModel<S>, t: S, spin: Spin) -> S {
    let big_lambda = model.branch_coupling(spin) + model.osc.lambda_g;
    let c = spin_rate(model, spin, model.field.b0);
    shifted_oscillator(model.osc.omega, big_lambda, c, t, spin).theta
}

/// Ramsey phase ϑ_+ − ϑ_− after one period at the configured tilt, from the closed form
/// −4π (μ0 m/(|χ|V))^{3/2} γ_e g sin θ_g / B'².
pub fn ramsey_phase<S: Scalar>(model: &TrapModel<S>) -> S {
    let k = &model.constants;
    let ratio = k.mu0 * model.nd.mass() / (model.nd.chi_magnitude() * model.nd.volume());
    -S::lit(4.0) * S::PI() * ratio.powf(S::lit(1.5)) * k.gamma_e * k.g_earth * model.field.tilt.sin()
        / (model.field.bprime * model.field.bprime)
}

/// The same Ramsey phase through the couplings, −8π λ_g λ / ω².
pub fn ramsey_phase_from_couplings<S: Scalar>(model: &TrapModel<S>) -> S {
    let o = &model.osc;
    -S::lit(8.0) * S::PI() * o.lambda_g * o.lambda / (o.omega * o.omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::model::{FieldConfig, Material, NanodiamondParams};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn model(d: f64, b0: f64, bp: f64, tilt: f64) -> TrapModel<f64> {
        let nd = NanodiamondParams::new(d, Material::diamond()).unwrap();
        TrapModel::new(PhysicalConstants::codata(), nd, FieldConfig::new(b0, bp, tilt).unwrap()).unwrap()
    }

    #[test]
    fn starts_and_returns_to_rest() {
        let m = model(250e-9, 5e-4, 1e3, 0.0);
        for spin in [Spin::Plus, Spin::Minus] {
            assert_eq!(classical_position(&m, 0.0, spin), 0.0);
            let x = classical_position(&m, m.period(), spin);
            assert!(x.abs() < 1e-14 * m.max_separation());
            let s = branch_state(&m, 0.0, spin);
            assert_eq!(s.alpha, Complex::new(0.0, 0.0));
            assert_eq!(s.theta, 0.0);
        }
    }

    #[test]
    fn no_phase_difference_after_one_period() {
        let m = model(250e-9, 3e-3, 1e3, 0.0);
        let t = m.period();
        let p = branch_state(&m, t, Spin::Plus).theta;
        let q = branch_state(&m, t, Spin::Minus).theta;
        assert!((p - q).abs() < 1e-9 * p.abs());
    }

    #[test]
    fn antisymmetric_at_half_period_without_bias() {
        let m = model(250e-9, 0.0, 1e3, 0.0);
        let t = PI / m.osc.omega;
        let a = branch_state(&m, t, Spin::Plus).alpha;
        let b = branch_state(&m, t, Spin::Minus).alpha;
        assert_eq!(a, -b);
    }

    #[test]
    fn quantum_mean_follows_classical_path() {
        let m = model(250e-9, 2e-3, 1e3, 0.0);
        for spin in [Spin::Plus, Spin::Minus] {
            for t in sample_times(m.period(), 101) {
                let (x, _) = branch_state(&m, t, spin).expectation(&m);
                let xc = classical_position(&m, t, spin);
                assert!((x - xc).abs() < 1e-12 * m.max_separation());
            }
        }
    }

    #[test]
    fn momentum_matches_classical_velocity() {
        let m = model(250e-9, 0.0, 1e3, 0.0);
        let t = 0.3 * m.period();
        let (_, p) = branch_state(&m, t, Spin::Plus).expectation(&m);
        let v = m.equilibrium(Spin::Plus) * m.osc.omega * (m.osc.omega * t).sin();
        assert!((p / (m.nd.mass() * v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_space_curves_are_point_symmetric_without_bias() {
        let m = model(250e-9, 0.0, 1e3, 0.0);
        let a = phase_space_curve(&m, 257, Spin::Plus, None).unwrap();
        let b = phase_space_curve(&m, 257, Spin::Minus, None).unwrap();
        for ((x1, p1), (x2, p2)) in a.iter().zip(&b) {
            assert!((x1 + x2).abs() <= 1e-12 * x1.abs().max(1e-30));
            assert!((p1 + p2).abs() <= 1e-12 * p1.abs().max(1e-40));
        }
    }

    #[test]
    fn bias_shifts_both_ellipse_centres_equally() {
        let plain = model(250e-9, 0.0, 1e3, 0.0);
        let biased = model(250e-9, 5e-4, 1e3, 0.0);
        let centre = |m: &TrapModel<f64>, spin| {
            let c = phase_space_curve(m, 4001, spin, None).unwrap();
            let (lo, hi) = c
                .iter()
                .fold((f64::MAX, f64::MIN), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
            (lo + hi) / 2.0
        };
        let shift_plus = centre(&biased, Spin::Plus) - centre(&plain, Spin::Plus);
        let shift_minus = centre(&biased, Spin::Minus) - centre(&plain, Spin::Minus);
        assert!(shift_plus.abs() > 1e-3 * plain.max_separation());
        assert!((shift_plus - shift_minus).abs() < 1e-6 * shift_plus.abs());
    }

    #[test]
    fn single_sample_is_the_origin() {
        let m = model(250e-9, 5e-4, 1e3, 0.0);
        assert_eq!(phase_space_curve(&m, 1, Spin::Plus, None).unwrap(), vec![(0.0, 0.0)]);
        assert!(phase_space_curve(&m, 0, Spin::Plus, None).is_err());
    }

    #[test]
    fn ramsey_phase_vanishes_without_tilt() {
        let m = model(250e-9, 0.0, 1e3, 0.0);
        assert_eq!(ramsey_phase(&m), 0.0);
        assert_eq!(ramsey_phase_from_couplings(&m), 0.0);
    }

    #[test]
    fn ramsey_phase_is_tilted_branch_difference() {
        let m = model(250e-9, 1e-3, 1e3, PI / 6.0);
        let t = m.period();
        let diff = tilted_branch_phase(&m, t, Spin::Plus) - tilted_branch_phase(&m, t, Spin::Minus);
        let closed = ramsey_phase(&m);
        assert!(closed < 0.0);
        assert!((diff / closed - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn ramsey_routes_agree(
            d in 50e-9f64..2e-6,
            bp in 0.1f64..2e3,
            tilt in 1e-4f64..1.5,
        ) {
            let m = model(d, 0.0, bp, tilt);
            let a = ramsey_phase(&m);
            let b = ramsey_phase_from_couplings(&m);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }

        #[test]
        fn ramsey_scales_with_sine_of_tilt(t1 in 1e-3f64..1.5, t2 in 1e-3f64..1.5) {
            let a = ramsey_phase(&model(250e-9, 0.0, 1e3, t1));
            let b = ramsey_phase(&model(250e-9, 0.0, 1e3, t2));
            prop_assert!((a / b - t1.sin() / t2.sin()).abs() < 1e-12 * (t1.sin() / t2.sin()));
        }

        #[test]
        fn amplitude_stays_on_its_circle(
            d in 50e-9f64..2e-6,
            b0 in -3e-3f64..3e-3,
            bp in 0.1f64..2e3,
            frac in 0.0f64..5.0,
        ) {
            let m = model(d, b0, bp, 0.0);
            let t = frac * m.period();
            let bound = 2.0 * m.osc.lambda_plus.abs().max(m.osc.lambda_minus.abs()) / m.osc.omega;
            for spin in [Spin::Plus, Spin::Minus] {
                let s = branch_state(&m, t, spin);
                prop_assert!(s.alpha.norm() <= bound * (1.0 + 1e-12));
                let later = branch_state(&m, t + m.period(), spin);
                prop_assert!((later.alpha - s.alpha).norm() < 1e-12f64.max(1e-12 * bound));
            }
        }
    }
}
