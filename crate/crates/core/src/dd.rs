//! Branch evolution under dynamical decoupling.
//!
//! With `ω_DD = Nω` the spin and the bias flip every `τ = 2π/ω_DD`. Segment `j` covers
//! `[jτ, (j+1)τ)` and evolves under a shifted oscillator with coupling `λ^(j) = (−1)^j λ0 + sλ`.
//! The recursion keeps the amplitude and accumulated phase at the start of the current segment,
//! so advancing by one segment is O(1).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::coherent::{self, spin_rate, BranchState};
use crate::error::{invalid, Error, Result};
use crate::model::{Spin, TrapModel};
use crate::ode::{self, OdeOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DdScheme {
    /// B0 and B' flip together with the spin; the branch dynamics are those without DD.
    FullFlip,
    /// Only the gradient flips with the spin, which acts as a flipping bias.
    GradientOnlyFlip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdConfig {
    /// ω_DD / ω.
    pub n: usize,
    pub scheme: DdScheme,
}

impl DdConfig {
    pub fn new(n: usize, scheme: DdScheme) -> Result<Self> {
        if n == 0 {
            return Err(invalid("N", "must be at least 1"));
        }
        Ok(Self { n, scheme })
    }

    pub fn gradient_only(n: usize) -> Result<Self> {
        Self::new(n, DdScheme::GradientOnlyFlip)
    }

    /// Segment length 2π/(Nω).
    pub fn segment<S: Scalar>(&self, omega: S) -> S {
        S::TAU() / (S::count(self.n) * omega)
    }
}

/// Running state of the segment recursion for one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DdEvolution<S> {
    omega: S,
    tau: S,
    spin: Spin,
    lambda0: S,
    lambda: S,
    /// c^(j) for even and odd j.
    rates: [S; 2],
    /// Index of the current segment.
    j: usize,
    /// α at the start of segment j.
    start_alpha: Complex<S>,
    /// Phase accumulated over segments 0..j.
    start_theta: S,
}

/// Branch state inside one segment, with the segment bookkeeping exposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdSample<S> {
    pub segment: usize,
    /// λ^(j).
    pub coupling: S,
    pub state: BranchState<S>,
    /// Unit-modulus phase coefficient C^(j)(t) = e^{−iθ}.
    pub phase_factor: Complex<S>,
}

impl<S: Scalar> DdEvolution<S> {
    pub fn new(model: &TrapModel<S>, spin: Spin, cfg: &DdConfig) -> Self {
        let b0 = model.field.b0;
        Self {
            omega: model.osc.omega,
            tau: cfg.segment(model.osc.omega),
            spin,
            lambda0: model.osc.lambda0,
            lambda: spin.value::<S>() * model.osc.lambda,
            rates: [spin_rate(model, spin, b0), spin_rate(model, spin, -b0)],
            j: 0,
            start_alpha: Complex::new(S::zero(), S::zero()),
            start_theta: S::zero(),
        }
    }

    pub fn segment_index(&self) -> usize {
        self.j
    }

    pub fn segment_length(&self) -> S {
        self.tau
    }

    /// λ^(j) = (−1)^j λ0 + sλ.
    pub fn coupling(&self, j: usize) -> S {
        if j % 2 == 0 {
            self.lambda0 + self.lambda
        } else {
            -self.lambda0 + self.lambda
        }
    }

    fn rate(&self, j: usize) -> S {
        self.rates[j % 2]
    }

    /// Amplitude at local time `u` of the current segment.
    fn alpha_at(&self, u: S) -> Complex<S> {
        let shift = self.coupling(self.j) / self.omega;
        let rot = Complex::from_polar(S::one(), self.omega * u);
        (self.start_alpha + shift) * rot - shift
    }

    /// Phase gained inside the current segment after local time `u`:
    /// (c − λ²/ω)u + (λ/ω)² sin ωu − (λ/ω) Im[a(1 − e^{iωu})], with `a` the start amplitude.
    fn segment_phase(&self, u: S) -> S {
        let l = self.coupling(self.j);
        let ratio = l / self.omega;
        let rot = Complex::from_polar(S::one(), self.omega * u);
        let one = Complex::new(S::one(), S::zero());
        (self.rate(self.j) - l * l / self.omega) * u + ratio * ratio * (self.omega * u).sin()
            - ratio * (self.start_alpha * (one - rot)).im
    }

    /// Moves to the start of the next segment.
    pub fn advance(&mut self) {
        let next_alpha = self.alpha_at(self.tau);
        self.start_theta = self.start_theta + self.segment_phase(self.tau);
        self.start_alpha = next_alpha;
        self.j += 1;
    }

    /// State at absolute time `t`, advancing the recursion as needed. Successive calls must not
    /// go back to an earlier segment.
    pub fn sample(&mut self, t: S) -> Result<DdSample<S>> {
        if t < S::zero() {
            return Err(Error::NegativeTime(t.as_f64()));
        }
        let mut target = (t / self.tau).floor().to_usize().unwrap_or(usize::MAX);
        let start = S::count(self.j) * self.tau;
        if target < self.j {
            // A boundary time can round into the previous segment.
            if start - t > S::lit(8.0) * S::eps() * start {
                return Err(invalid("t", "sample times must be non-decreasing"));
            }
            target = self.j;
        }
        while self.j < target {
            self.advance();
        }
        let u = (t - S::count(self.j) * self.tau).max(S::zero());
        let alpha = self.alpha_at(u);
        let theta = self.start_theta + self.segment_phase(u);
        Ok(DdSample {
            segment: self.j,
            coupling: self.coupling(self.j),
            state: BranchState {
                t,
                spin: self.spin,
                alpha,
                theta,
            },
            phase_factor: Complex::from_polar(S::one(), -theta),
        })
    }

    /// Amplitude at the start of the current segment.
    pub fn start_alpha(&self) -> Complex<S> {
        self.start_alpha
    }

    /// Amplitude at the end of the current segment under the current segment's Hamiltonian.
    pub fn end_alpha(&self) -> Complex<S> {
        self.alpha_at(self.tau)
    }
}

pub fn dd_branch_state<S: Scalar>(model: &TrapModel<S>, t: S, spin: Spin, cfg: &DdConfig) -> Result<BranchState<S>> {
    Ok(dd_trace(model, spin, cfg, &[t])?.remove(0))
}

/// Branch states at each of `times` (non-decreasing), in O(N + times.len()).
pub fn dd_trace<S: Scalar>(
    model: &TrapModel<S>,
    spin: Spin,
    cfg: &DdConfig,
    times: &[S],
) -> Result<Vec<BranchState<S>>> {
    if let Some(&t) = times.iter().find(|t| **t < S::zero()) {
        return Err(Error::NegativeTime(t.as_f64()));
    }
    match cfg.scheme {
        DdScheme::FullFlip => Ok(times.iter().map(|&t| coherent::branch_state(model, t, spin)).collect()),
        DdScheme::GradientOnlyFlip => {
            let mut evo = DdEvolution::new(model, spin, cfg);
            times.iter().map(|&t| evo.sample(t).map(|s| s.state)).collect()
        }
    }
}

/// Brute-force classical reference: integrates m ẍ = −mω²(x − x_eq^(j)) with the equilibrium
/// jumping at every segment boundary, and returns lab-frame (x, p) at each of `times`.
pub fn dd_piecewise_ode_reference<S: Scalar>(
    model: &TrapModel<S>,
    spin: Spin,
    cfg: &DdConfig,
    times: &[S],
    rel_tol: S,
) -> Result<Vec<(S, S)>> {
    if let Some(&t) = times.iter().find(|t| **t < S::zero()) {
        return Err(Error::NegativeTime(t.as_f64()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("times", "must be non-decreasing"));
    }
    let Some(&t_end) = times.last() else {
        return Ok(Vec::new());
    };
    let omega = model.osc.omega;
    let scale = model.max_separation();
    let two = S::two();
    // Equilibrium x_eq = −2 x_zpf λ^(j)/ω, in units of Δx_max.
    let equilibrium = |coupling: S| -two * model.osc.x_zpf * coupling / omega / scale;
    let couplings = {
        let s = spin.value::<S>() * model.osc.lambda;
        match cfg.scheme {
            DdScheme::FullFlip => [model.osc.lambda0 + s, model.osc.lambda0 + s],
            DdScheme::GradientOnlyFlip => [model.osc.lambda0 + s, -model.osc.lambda0 + s],
        }
    };

    // Dimensionless phase φ = ωt; state (x/Δx_max, v/(ωΔx_max)).
    let phases: Vec<S> = times.iter().map(|&t| omega * t).collect();
    let seg = S::TAU() / S::count(cfg.n);
    let phi_end = omega * t_end;
    let opts = OdeOptions::uniform(rel_tol, rel_tol * S::lit(1e-2));
    let mut y = [S::zero(), S::zero()];
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0usize;
    let mut j = 0usize;
    loop {
        let a = S::count(j) * seg;
        let b = (S::count(j + 1) * seg).min(phi_end);
        let eq = equilibrium(couplings[j % 2]);
        let mut end = next;
        while end < phases.len() && (phases[end] < b || (b >= phi_end && phases[end] <= phi_end)) {
            end += 1;
        }
        let r = ode::integrate(|_, s: &[S; 2]| [s[1], -(s[0] - eq)], a, y, b, &phases[next..end], &opts)?;
        out.extend(
            r.samples
                .iter()
                .map(|s| (s[0] * scale, model.nd.mass() * omega * scale * s[1])),
        );
        next = end;
        y = r.end;
        if b >= phi_end {
            break;
        }
        j += 1;
    }
    Ok(out)
}

/// | max|x_+| − max|x_−| | / Δx_max over paired position samples of the two branches.
pub fn excursion_asymmetry<S: Scalar>(x_plus: &[S], x_minus: &[S], max_separation: S) -> S {
    let peak = |xs: &[S]| xs.iter().fold(S::zero(), |m, x| m.max(x.abs()));
    (peak(x_plus) - peak(x_minus)).abs() / max_separation
}

/// Excursion asymmetry of the recursion over the separation half period [0, π/ω].
///
/// Over a whole period the even-N recursion is time-reversal symmetric about its midpoint, so
/// the peak excursions of the two branches coincide for any bias; the half period in which
/// the branches separate is where a residual bias shows up.
pub fn dd_asymmetry<S: Scalar>(model: &TrapModel<S>, cfg: Option<&DdConfig>, n_samples: usize) -> Result<S> {
    let times = coherent::sample_times(S::PI() / model.osc.omega, n_samples);
    let xs = |spin| -> Result<Vec<S>> {
        let states = match cfg {
            Some(c) => dd_trace(model, spin, c, &times)?,
            None => times.iter().map(|&t| coherent::branch_state(model, t, spin)).collect(),
        };
        Ok(states.iter().map(|s| s.expectation(model).0).collect())
    };
    Ok(excursion_asymmetry(
        &xs(Spin::Plus)?,
        &xs(Spin::Minus)?,
        model.max_separation(),
    ))
}

/// Same metric evaluated on the piecewise ODE reference.
pub fn dd_asymmetry_ode<S: Scalar>(model: &TrapModel<S>, cfg: &DdConfig, n_samples: usize, rel_tol: S) -> Result<S> {
    let times = coherent::sample_times(S::PI() / model.osc.omega, n_samples);
    let xs = |spin| -> Result<Vec<S>> {
        Ok(dd_piecewise_ode_reference(model, spin, cfg, &times, rel_tol)?
            .into_iter()
            .map(|(x, _)| x)
            .collect())
    };
    Ok(excursion_asymmetry(
        &xs(Spin::Plus)?,
        &xs(Spin::Minus)?,
        model.max_separation(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::model::{FieldConfig, Material, NanodiamondParams};
    use proptest::prelude::*;

    fn model(b0: f64) -> TrapModel<f64> {
        let nd = NanodiamondParams::new(250e-9, Material::diamond()).unwrap();
        TrapModel::new(PhysicalConstants::codata(), nd, FieldConfig::new(b0, 1e3, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn rejects_zero_n_and_negative_time() {
        assert!(DdConfig::gradient_only(0).is_err());
        let m = model(5e-4);
        let cfg = DdConfig::gradient_only(4).unwrap();
        assert!(matches!(
            dd_branch_state(&m, -1.0, Spin::Plus, &cfg),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn single_segment_is_the_shifted_oscillator() {
        let m = model(5e-4);
        let cfg = DdConfig::gradient_only(1).unwrap();
        for t in coherent::sample_times(0.999 * m.period(), 50) {
            for spin in [Spin::Plus, Spin::Minus] {
                let a = dd_branch_state(&m, t, spin, &cfg).unwrap();
                let b = coherent::branch_state(&m, t, spin);
                assert!((a.alpha - b.alpha).norm() <= 1e-12 * b.alpha.norm().max(1.0));
                assert!((a.theta - b.theta).abs() <= 1e-12 * b.theta.abs().max(1.0));
            }
        }
    }

    #[test]
    fn unbiased_dd_equals_plain_evolution() {
        let m = model(0.0);
        let cfg = DdConfig::gradient_only(20).unwrap();
        let times = coherent::sample_times(m.period(), 333);
        let states = dd_trace(&m, Spin::Plus, &cfg, &times).unwrap();
        let radius = m.osc.lambda / m.osc.omega;
        for (s, &t) in states.iter().zip(&times) {
            let b = coherent::branch_state(&m, t, Spin::Plus);
            assert!((s.alpha - b.alpha).norm() <= 1e-12 * radius);
        }
    }

    #[test]
    fn full_flip_is_exactly_plain_evolution() {
        let m = model(5e-4);
        let cfg = DdConfig::new(20, DdScheme::FullFlip).unwrap();
        let t = 0.37 * m.period();
        assert_eq!(
            dd_branch_state(&m, t, Spin::Minus, &cfg).unwrap(),
            coherent::branch_state(&m, t, Spin::Minus)
        );
    }

    #[test]
    fn amplitude_is_continuous_across_segments() {
        let m = model(5e-4);
        let cfg = DdConfig::gradient_only(200).unwrap();
        let mut evo = DdEvolution::new(&m, Spin::Plus, &cfg);
        for _ in 0..200 {
            let before = evo.end_alpha();
            evo.advance();
            assert!((evo.start_alpha() - before).norm() < 1e-10);
        }
    }

    #[test]
    fn phase_factor_has_unit_modulus() {
        let m = model(5e-4);
        let cfg = DdConfig::gradient_only(20).unwrap();
        let mut evo = DdEvolution::new(&m, Spin::Minus, &cfg);
        for t in coherent::sample_times(m.period(), 97) {
            let s = evo.sample(t).unwrap();
            assert!((s.phase_factor.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_matches_integrated_rate() {
        // θ' = c^(j) + λ^(j) Re α, integrated by composite Simpson on each segment.
        let m = model(5e-4);
        let cfg = DdConfig::gradient_only(4).unwrap();
        let mut evo = DdEvolution::new(&m, Spin::Plus, &cfg);
        let tau = cfg.segment(m.osc.omega);
        let d = m.constants.d_zfs;
        let g = m.constants.gamma_e * m.field.b0;
        let mut theta = 0.0;
        let panels = 2000;
        for j in 0..4 {
            let c = d + if j % 2 == 0 { g } else { -g };
            let lj = evo.coupling(j);
            let h = tau / panels as f64;
            let mut acc = 0.0;
            let mut inner = evo.clone();
            for k in 0..=panels {
                let t = j as f64 * tau + k as f64 * h;
                let t = if k == panels { t * (1.0 - 1e-15) } else { t };
                let a = inner.sample(t).unwrap().state.alpha;
                let w = if k == 0 || k == panels {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * (c + lj * a.re);
            }
            theta += acc * h / 3.0;
            evo.advance();
        }
        let exact = DdEvolution::new(&m, Spin::Plus, &cfg)
            .sample(m.period() * (1.0 - 1e-15))
            .unwrap();
        assert!((exact.state.theta - theta).abs() < 1e-9 * theta.abs());
    }

    #[test]
    fn recursion_agrees_with_piecewise_ode() {
        let m = model(5e-4);
        let cfg = DdConfig::gradient_only(4).unwrap();
        let times = coherent::sample_times(m.period(), 41);
        let ode = dd_piecewise_ode_reference(&m, Spin::Minus, &cfg, &times, 1e-12).unwrap();
        let rec = dd_trace(&m, Spin::Minus, &cfg, &times).unwrap();
        for ((x, p), s) in ode.iter().zip(&rec) {
            let (xr, pr) = s.expectation(&m);
            assert!((x - xr).abs() < 1e-8 * m.max_separation());
            assert!((p - pr).abs() < 1e-8 * m.max_separation() * m.nd.mass() * m.osc.omega);
        }
    }

    #[test]
    fn unbiased_asymmetry_is_zero() {
        let m = model(0.0);
        let cfg = DdConfig::gradient_only(20).unwrap();
        assert!(dd_asymmetry(&m, Some(&cfg), 2001).unwrap() < 1e-12);
        assert!(dd_asymmetry(&m, None, 2001).unwrap() < 1e-12);
    }

    #[test]
    fn excursion_asymmetry_of_known_peaks() {
        let a = excursion_asymmetry(&[0.0, 1.0, -3.0], &[2.0, 0.5], 4.0);
        assert_eq!(a, 0.25);
    }

    proptest! {
        #[test]
        fn trace_is_independent_of_sampling(n in 1usize..60, frac in 0.0f64..1.0) {
            let m = model(5e-4);
            let cfg = DdConfig::gradient_only(n).unwrap();
            let t = frac * m.period();
            let single = dd_branch_state(&m, t, Spin::Plus, &cfg).unwrap();
            let times = [0.25 * t, 0.5 * t, t];
            let traced = dd_trace(&m, Spin::Plus, &cfg, &times).unwrap();
            prop_assert_eq!(single, traced[2]);
        }
    }
}
