//! Translational ND dynamics in a static field, m dv/dt = (μ·∇)B, with optional DD flipping.
//!
//! The moment is μ = (χV/μ0) B + μ_s s x̂ with χ = −|χ| (diamagnetic). The induced part pulls
//! the particle to the field minimum; the spin part is the Stern–Gerlach kick. Under decoupling
//! the spin flips at kτ (τ = 2π/ω_DD) and the coil current at kτ + δ/ω_DD.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{invalid, Result};
use crate::magnetostatics::CoilAssembly;
use crate::model::{NanodiamondParams, Spin};
use crate::ode::{self, OdeOptions};
use crate::scalar::Scalar;
use crate::vec::{Mat3, Vec3};

/// Anything that can report a static field and its Jacobian.
pub trait FieldSource<S>: Sync {
    fn field(&self, p: Vec3<S>) -> Result<Vec3<S>>;
    /// `J[i][j] = ∂B_i/∂x_j`.
    fn jacobian(&self, p: Vec3<S>) -> Result<Mat3<S>>;
}

impl<S: Scalar> FieldSource<S> for CoilAssembly<S> {
    fn field(&self, p: Vec3<S>) -> Result<Vec3<S>> {
        CoilAssembly::field(self, p)
    }

    fn jacobian(&self, p: Vec3<S>) -> Result<Mat3<S>> {
        CoilAssembly::jacobian(self, p)
    }
}

/// Idealized quadrupole B = (B0 + B'x, −B'y/2, −B'z/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGradient<S> {
    pub b0: S,
    pub bprime: S,
}

impl<S: Scalar> FieldSource<S> for UniformGradient<S> {
    fn field(&self, p: Vec3<S>) -> Result<Vec3<S>> {
        let h = -self.bprime * S::half();
        Ok(Vec3::new(self.b0 + self.bprime * p.x(), h * p.y(), h * p.z()))
    }

    fn jacobian(&self, _p: Vec3<S>) -> Result<Mat3<S>> {
        let z = S::zero();
        let h = -self.bprime * S::half();
        Ok(Mat3([[self.bprime, z, z], [z, h, z], [z, z, h]]))
    }
}

/// Magnitude convention for the spin moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinMoment {
    /// μ_s = −ħγ_e, so the spin energy is +ħγ_e s B_x as in the trap Hamiltonian.
    HbarGamma,
    /// μ_s = +μ_B.
    BohrMagneton,
}

impl SpinMoment {
    pub fn value<S: Scalar>(self, k: &PhysicalConstants<S>) -> S {
        match self {
            SpinMoment::HbarGamma => -k.hbar * k.gamma_e,
            SpinMoment::BohrMagneton => k.mu_b,
        }
    }
}

/// Everything the equations of motion need besides the state.
#[derive(Debug, Clone, Copy)]
pub struct Dynamics<'a, S, F> {
    pub field: &'a F,
    pub nd: NanodiamondParams<S>,
    pub constants: PhysicalConstants<S>,
    pub moment: SpinMoment,
}

impl<S: Scalar, F: FieldSource<S>> Dynamics<'_, S, F> {
    fn induced_coefficient(&self) -> S {
        -self.nd.chi_magnitude() * self.nd.volume() / self.constants.mu0
    }

    /// μ for field `b`, spin `spin` and coil sign `coil` (±1).
    pub fn magnetic_moment(&self, b: Vec3<S>, spin: Spin) -> Vec3<S> {
        let mut mu = b.scale(self.induced_coefficient());
        mu.0[0] = mu.0[0] + self.moment.value(&self.constants) * spin.value::<S>();
        mu
    }

    /// Force at `q`; `coil` is the sign of the coil current (the field scales with it).
    pub fn force(&self, q: Vec3<S>, spin: Spin, coil: S) -> Result<Vec3<S>> {
        let b = self.field.field(q)?.scale(coil);
        let j = self.field.jacobian(q)?.scale(coil);
        Ok(j * self.magnetic_moment(b, spin))
    }

    /// Kinetic + induced-dipole + spin energy; conserved between flips.
    pub fn energy(&self, q: Vec3<S>, v: Vec3<S>, spin: Spin, coil: S) -> Result<S> {
        let b = self.field.field(q)?.scale(coil);
        let kinetic = S::half() * self.nd.mass() * v.dot(&v);
        let induced = -S::half() * self.induced_coefficient() * b.dot(&b);
        let zeeman = -self.moment.value(&self.constants) * spin.value::<S>() * b.x();
        Ok(kinetic + induced + zeeman)
    }

    /// Trap frequency from the central gradient, sqrt(|χ|V/(μ0 m))·∂B_x/∂x at the origin.
    pub fn omega(&self) -> Result<S> {
        let g = self.field.jacobian(Vec3::zero())?.0[0][0].abs();
        Ok(g * (self.nd.chi_magnitude() * self.nd.volume() / (self.constants.mu0 * self.nd.mass())).sqrt())
    }

    /// 4|μ_s|μ0/(|χ|V B') for the central gradient.
    pub fn max_separation(&self) -> Result<S> {
        let g = self.field.jacobian(Vec3::zero())?.0[0][0].abs();
        Ok(
            S::lit(4.0) * self.moment.value(&self.constants).abs() * self.constants.mu0
                / (self.nd.chi_magnitude() * self.nd.volume() * g),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryState<S> {
    pub t: S,
    pub q: Vec3<S>,
    pub v: Vec3<S>,
}

impl<S: Scalar> TrajectoryState<S> {
    pub fn at_rest(q: Vec3<S>) -> Self {
        Self {
            t: S::zero(),
            q,
            v: Vec3::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<S> {
    pub rel_tol: S,
    /// m
    pub abs_tol_position: S,
    /// m/s
    pub abs_tol_velocity: S,
    /// s; infinity for none.
    pub max_step: S,
    pub max_steps: usize,
}

impl<S: Scalar> Default for IntegratorConfig<S> {
    fn default() -> Self {
        Self {
            rel_tol: S::lit(1e-9),
            abs_tol_position: S::lit(1e-12),
            abs_tol_velocity: S::lit(1e-12),
            max_step: S::infinity(),
            max_steps: 5_000_000,
        }
    }
}

impl<S: Scalar> IntegratorConfig<S> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol_position", self.abs_tol_position),
            ("abs_tol_velocity", self.abs_tol_velocity),
        ] {
            if !(v > S::zero() && v.is_finite()) {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        if !(self.max_step > S::zero()) {
            return Err(invalid("max_step", "must be > 0"));
        }
        Ok(())
    }

    fn ode_options(&self) -> OdeOptions<S, 6> {
        let (p, v) = (self.abs_tol_position, self.abs_tol_velocity);
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: [p, p, p, v, v, v],
            max_step: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipSchedule<S> {
    /// rad/s
    pub omega_dd: S,
    /// Lag of the coil flip behind the spin flip, rad of the DD phase, in [0, π).
    pub delta: S,
}

impl<S: Scalar> FlipSchedule<S> {
    pub fn new(omega_dd: S, delta: S) -> Result<Self> {
        if !(omega_dd > S::zero() && omega_dd.is_finite()) {
            return Err(invalid("omega_DD", "must be finite and > 0"));
        }
        if !(delta >= S::zero() && delta < S::PI()) {
            return Err(invalid("delta", "must lie in [0, pi)"));
        }
        Ok(Self { omega_dd, delta })
    }

    /// Flip events in (0, t_end): (time, flips spin, flips coil), ordered, coincident flips merged.
    pub fn events(&self, t_end: S) -> Vec<(S, bool, bool)> {
        let tau = S::TAU() / self.omega_dd;
        let lag = self.delta / self.omega_dd;
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let base = S::count(k) * tau;
            if base >= t_end {
                break;
            }
            if k > 0 {
                let coil_t = base + lag;
                if lag == S::zero() {
                    out.push((base, true, true));
                } else {
                    out.push((base, true, false));
                    if coil_t < t_end {
                        out.push((coil_t, false, true));
                    }
                }
            }
            k += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample<S> {
    pub t: S,
    pub q: Vec3<S>,
    pub v: Vec3<S>,
    pub spin: Spin,
    /// Sign of the coil current.
    pub coil: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub samples: Vec<TrajectorySample<S>>,
    /// Flip times, each of which was a step boundary.
    pub events: Vec<S>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub max_error_ratio: S,
}

/// Integrates from `initial` to `t_end`, sampling at `sample_times` (non-decreasing, within
/// [initial.t, t_end]). The integrator restarts at every flip.
pub fn integrate<S: Scalar, F: FieldSource<S>>(
    dynamics: &Dynamics<'_, S, F>,
    initial: TrajectoryState<S>,
    spin: Spin,
    schedule: Option<&FlipSchedule<S>>,
    t_end: S,
    sample_times: &[S],
    cfg: &IntegratorConfig<S>,
) -> Result<Trajectory<S>> {
    cfg.validate()?;
    if !(t_end > initial.t) {
        return Err(invalid("t_end", "must exceed the initial time"));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.iter().any(|&t| t < initial.t || t > t_end) {
        return Err(invalid("sample_times", "must be non-decreasing and inside [t0, t_end]"));
    }
    let events: Vec<(S, bool, bool)> = schedule
        .map(|s| s.events(t_end))
        .unwrap_or_default()
        .into_iter()
        .filter(|e| e.0 > initial.t)
        .collect();
    let opts = cfg.ode_options();
    let inv_mass = S::one() / dynamics.nd.mass();

    let mut y = [
        initial.q.x(),
        initial.q.y(),
        initial.q.z(),
        initial.v.x(),
        initial.v.y(),
        initial.v.z(),
    ];
    let mut spin_now = spin;
    let mut coil = S::one();
    let mut t0 = initial.t;
    let mut next_sample = 0usize;
    let mut out = Trajectory {
        samples: Vec::with_capacity(sample_times.len()),
        events: Vec::with_capacity(events.len()),
        accepted_steps: 0,
        rejected_steps: 0,
        max_error_ratio: S::zero(),
    };
    let bounds = events.iter().map(|e| Some(*e)).chain(std::iter::once(None));
    for event in bounds {
        let t1 = event.map(|e| e.0).unwrap_or(t_end);
        let last = event.is_none();
        let mut end = next_sample;
        while end < sample_times.len() && (sample_times[end] < t1 || (last && sample_times[end] <= t1)) {
            end += 1;
        }
        let failure = std::cell::Cell::new(None);
        let rhs = |_t: S, s: &[S; 6]| {
            let q = Vec3::new(s[0], s[1], s[2]);
            match dynamics.force(q, spin_now, coil) {
                Ok(f) => [s[3], s[4], s[5], f.x() * inv_mass, f.y() * inv_mass, f.z() * inv_mass],
                Err(e) => {
                    failure.set(Some(e));
                    [S::nan(); 6]
                }
            }
        };
        let seg = ode::integrate(rhs, t0, y, t1, &sample_times[next_sample..end], &opts);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let seg = seg?;
        for (st, &t) in seg.samples.iter().zip(&sample_times[next_sample..end]) {
            out.samples.push(TrajectorySample {
                t,
                q: Vec3::new(st[0], st[1], st[2]),
                v: Vec3::new(st[3], st[4], st[5]),
                spin: spin_now,
                coil,
            });
        }
        out.accepted_steps += seg.accepted_steps;
        out.rejected_steps += seg.rejected_steps;
        out.max_error_ratio = out.max_error_ratio.max(seg.max_error_ratio);
        next_sample = end;
        y = seg.end;
        t0 = t1;
        if let Some((t, flips_spin, flips_coil)) = event {
            out.events.push(t);
            if flips_spin {
                spin_now = spin_now.flipped();
            }
            if flips_coil {
                coil = -coil;
            }
        }
    }
    Ok(out)
}

/// Per-start result of a sensitivity scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry<S> {
    pub theta: S,
    pub phi: S,
    pub start: Vec3<S>,
    pub plus: Trajectory<S>,
    pub minus: Trajectory<S>,
    /// max_t |c_+ − c_−| over c ∈ {y, z}, relative to the largest |y|, |z| reached.
    pub yz_overlap: S,
    /// max_t |x_+ − x_−|.
    pub x_separation: S,
}

/// Start point at radius `r`, polar angle `theta` from the x axis and azimuth `phi` in the y–z
/// plane.
pub fn shell_point<S: Scalar>(r: S, theta: S, phi: S) -> Vec3<S> {
    Vec3::new(
        r * theta.cos(),
        r * theta.sin() * phi.cos(),
        r * theta.sin() * phi.sin(),
    )
}

fn yz_overlap<S: Scalar>(a: &Trajectory<S>, b: &Trajectory<S>) -> S {
    let mut diff = S::zero();
    let mut scale = S::zero();
    for (p, m) in a.samples.iter().zip(&b.samples) {
        for c in 1..3 {
            diff = diff.max((p.q[c] - m.q[c]).abs());
            scale = scale.max(p.q[c].abs()).max(m.q[c].abs());
        }
    }
    if scale == S::zero() {
        S::zero()
    } else {
        diff / scale
    }
}

fn x_separation<S: Scalar>(a: &Trajectory<S>, b: &Trajectory<S>) -> S {
    a.samples
        .iter()
        .zip(&b.samples)
        .fold(S::zero(), |m, (p, q)| m.max((p.q.x() - q.q.x()).abs()))
}

/// Both spin trajectories from every start on the (θ, φ) grid at radius `r`, in parallel.
/// Entries are ordered θ-major. With `r = 0` a single start at the origin is used.
#[allow(clippy::too_many_arguments)]
pub fn sensitivity_scan<S: Scalar, F: FieldSource<S>>(
    dynamics: &Dynamics<'_, S, F>,
    r: S,
    thetas: &[S],
    phis: &[S],
    schedule: Option<&FlipSchedule<S>>,
    t_end: S,
    sample_times: &[S],
    cfg: &IntegratorConfig<S>,
) -> Result<Vec<ScanEntry<S>>> {
    let quarter = S::FRAC_PI_2();
    if thetas.iter().chain(phis).any(|a| !(*a >= S::zero() && *a <= quarter)) {
        return Err(invalid("angles", "must lie in [0, pi/2]"));
    }
    if !(r >= S::zero()) {
        return Err(invalid("r", "must be >= 0"));
    }
    let starts: Vec<(S, S)> = if r == S::zero() {
        vec![(S::zero(), S::zero())]
    } else {
        thetas.iter().flat_map(|&t| phis.iter().map(move |&p| (t, p))).collect()
    };
    starts
        .par_iter()
        .map(|&(theta, phi)| {
            let start = shell_point(r, theta, phi);
            let initial = TrajectoryState::at_rest(start);
            let plus = integrate(dynamics, initial, Spin::Plus, schedule, t_end, sample_times, cfg)?;
            let minus = integrate(dynamics, initial, Spin::Minus, schedule, t_end, sample_times, cfg)?;
            Ok(ScanEntry {
                theta,
                phi,
                start,
                yz_overlap: yz_overlap(&plus, &minus),
                x_separation: x_separation(&plus, &minus),
                plus,
                minus,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaDeviation<S> {
    pub delta: S,
    /// max_t |x_δ(t) − x_0(t)| / Δx_max over one trap period.
    pub deviation: S,
}

/// Deviation of the phase-lagged trajectory from the synchronized one, per δ. The particle
/// starts at rest at the origin in spin +1.
pub fn delta_scan<S: Scalar, F: FieldSource<S>>(
    dynamics: &Dynamics<'_, S, F>,
    deltas: &[S],
    n: usize,
    n_samples: usize,
    cfg: &IntegratorConfig<S>,
) -> Result<Vec<DeltaDeviation<S>>> {
    if n == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    if n_samples < 2 {
        return Err(invalid("n_samples", "must be at least 2"));
    }
    let omega = dynamics.omega()?;
    let dx = dynamics.max_separation()?;
    let period = S::TAU() / omega;
    let times = crate::coherent::sample_times(period, n_samples);
    let run = |delta: S| -> Result<Vec<S>> {
        let schedule = FlipSchedule::new(S::count(n) * omega, delta)?;
        let tr = integrate(
            dynamics,
            TrajectoryState::at_rest(Vec3::zero()),
            Spin::Plus,
            Some(&schedule),
            period,
            &times,
            cfg,
        )?;
        Ok(tr.samples.iter().map(|s| s.q.x()).collect())
    };
    let reference = run(S::zero())?;
    deltas
        .par_iter()
        .map(|&delta| {
            let xs = run(delta)?;
            let dev = xs
                .iter()
                .zip(&reference)
                .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()));
            Ok(DeltaDeviation {
                delta,
                deviation: dev / dx,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Material;

    fn nd(mass: f64) -> NanodiamondParams<f64> {
        NanodiamondParams::from_mass(mass, Material::diamond()).unwrap()
    }

    fn ideal(bprime: f64) -> UniformGradient<f64> {
        UniformGradient { b0: 0.0, bprime }
    }

    fn dynamics<F: FieldSource<f64>>(field: &F, mass: f64) -> Dynamics<'_, f64, F> {
        Dynamics {
            field,
            nd: nd(mass),
            constants: PhysicalConstants::codata(),
            moment: SpinMoment::HbarGamma,
        }
    }

    #[test]
    fn spin_moment_is_axial_at_zero_field() {
        let f = ideal(1.0);
        let d = dynamics(&f, 1e-14);
        let mu = d.magnetic_moment(Vec3::zero(), Spin::Plus);
        assert!(mu.x() != 0.0);
        assert_eq!((mu.y(), mu.z()), (0.0, 0.0));
        let flipped = d.magnetic_moment(Vec3::new(1e-3, 2e-3, 3e-3), Spin::Minus);
        let same = d.magnetic_moment(Vec3::new(1e-3, 2e-3, 3e-3), Spin::Plus);
        assert_eq!((flipped.y(), flipped.z()), (same.y(), same.z()));
        assert!((flipped.x() + same.x() - 2.0 * d.induced_coefficient() * 1e-3).abs() < 1e-30);
    }

    #[test]
    fn force_at_the_centre_is_the_spin_kick() {
        let coil = CoilAssembly::anti_helmholtz(0.03, 0.03, 564.0, PhysicalConstants::codata().mu0).unwrap();
        let d = dynamics(&coil, 5.6e-14);
        let g = coil.jacobian(Vec3::zero()).unwrap().0[0][0];
        let f = d.force(Vec3::zero(), Spin::Plus, 1.0).unwrap();
        let expected = SpinMoment::HbarGamma.value(&d.constants) * g;
        assert!((f.x() / expected - 1.0).abs() < 1e-9);
        assert!(f.y().abs() < 1e-12 * f.x().abs() && f.z().abs() < 1e-12 * f.x().abs());

        let no_spin = d.force(Vec3::zero(), Spin::Zero, 1.0).unwrap();
        assert!(no_spin.norm() < 1e-40);

        let on_axis = Vec3::new(3e-7, 0.0, 0.0);
        let a = d.force(on_axis, Spin::Plus, 1.0).unwrap();
        let b = d.force(on_axis, Spin::Minus, 1.0).unwrap();
        assert_eq!((a.y(), a.z()), (b.y(), b.z()));
        assert!(a.x() != b.x());
    }

    #[test]
    fn reproduces_the_closed_form_in_the_ideal_trap() {
        let f = ideal(0.663);
        let d = dynamics(&f, 5.6e-14);
        let omega = d.omega().unwrap();
        let period = std::f64::consts::TAU / omega;
        let times = crate::coherent::sample_times(period, 201);
        let tr = integrate(
            &d,
            TrajectoryState::at_rest(Vec3::zero()),
            Spin::Plus,
            None,
            period,
            &times,
            &IntegratorConfig::default(),
        )
        .unwrap();
        let x0 = d.max_separation().unwrap() / 4.0 * d.moment.value(&d.constants).signum();
        for s in &tr.samples {
            let exact = x0 * (1.0 - (omega * s.t).cos());
            assert!((s.q.x() - exact).abs() < 1e-6 * x0.abs());
        }
    }

    #[test]
    fn no_transverse_motion_without_transverse_offset() {
        let coil = CoilAssembly::anti_helmholtz(0.03, 0.03, 564.0, PhysicalConstants::codata().mu0).unwrap();
        let d = dynamics(&coil, 5.6e-14);
        let period = std::f64::consts::TAU / d.omega().unwrap();
        let times = crate::coherent::sample_times(period, 50);
        let tr = integrate(
            &d,
            TrajectoryState::at_rest(Vec3::new(2e-7, 0.0, 0.0)),
            Spin::Minus,
            None,
            period,
            &times,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(tr.samples.iter().all(|s| s.q.y() == 0.0 && s.q.z() == 0.0));
    }

    #[test]
    fn flip_events() {
        let s = FlipSchedule::new(1.0, 0.0).unwrap();
        let ev = s.events(3.0 * std::f64::consts::TAU);
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.1 && e.2));
        let s = FlipSchedule::new(1.0, 0.5).unwrap();
        let ev = s.events(2.0 * std::f64::consts::TAU + 0.25);
        assert_eq!(ev.len(), 3);
        assert_eq!(ev[0], (std::f64::consts::TAU, true, false));
        assert_eq!(ev[1], (std::f64::consts::TAU + 0.5, false, true));
        assert!(ev[2].1 && !ev[2].2);
        assert!(FlipSchedule::new(1.0, std::f64::consts::PI).is_err());
        assert!(FlipSchedule::new(0.0, 0.0).is_err());
    }

    #[test]
    fn events_are_step_boundaries() {
        let f = ideal(0.663);
        let d = dynamics(&f, 5.6e-14);
        let omega = d.omega().unwrap();
        let period = std::f64::consts::TAU / omega;
        let schedule = FlipSchedule::new(20.0 * omega, 0.1).unwrap();
        let tr = integrate(
            &d,
            TrajectoryState::at_rest(Vec3::zero()),
            Spin::Plus,
            Some(&schedule),
            period,
            &[],
            &IntegratorConfig::default(),
        )
        .unwrap();
        let expected = schedule.events(period);
        assert_eq!(tr.events.len(), expected.len());
        assert!(tr.events.windows(2).all(|w| w[0] < w[1]));
        for (a, b) in tr.events.iter().zip(&expected) {
            assert_eq!(*a, b.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = ideal(0.663);
        let d = dynamics(&f, 5.6e-14);
        let start = TrajectoryState::at_rest(Vec3::zero());
        let cfg = IntegratorConfig::default();
        assert!(integrate(&d, start, Spin::Plus, None, 0.0, &[], &cfg).is_err());
        assert!(integrate(&d, start, Spin::Plus, None, 1.0, &[2.0], &cfg).is_err());
        let mut bad = cfg;
        bad.rel_tol = 0.0;
        assert!(integrate(&d, start, Spin::Plus, None, 1.0, &[], &bad).is_err());
    }

    #[test]
    fn conductor_hit_is_reported() {
        let coil = CoilAssembly::anti_helmholtz(0.03, 0.03, 564.0, PhysicalConstants::codata().mu0).unwrap();
        let d = dynamics(&coil, 5.6e-14);
        let start = TrajectoryState::at_rest(Vec3::new(0.015, 0.03, 0.0));
        let r = integrate(&d, start, Spin::Plus, None, 1.0, &[], &IntegratorConfig::default());
        assert!(matches!(r, Err(crate::Error::OnConductor { .. })));
    }

    #[test]
    fn zero_radius_scan_is_a_single_integration() {
        let f = ideal(0.663);
        let d = dynamics(&f, 5.6e-14);
        let period = std::f64::consts::TAU / d.omega().unwrap();
        let times = crate::coherent::sample_times(period, 20);
        let cfg = IntegratorConfig::default();
        let scan = sensitivity_scan(&d, 0.0, &[0.3, 0.6], &[0.1], None, period, &times, &cfg).unwrap();
        assert_eq!(scan.len(), 1);
        let direct = integrate(
            &d,
            TrajectoryState::at_rest(Vec3::zero()),
            Spin::Plus,
            None,
            period,
            &times,
            &cfg,
        )
        .unwrap();
        assert_eq!(scan[0].plus, direct);
        assert!(sensitivity_scan(&d, 1e-7, &[2.0], &[0.1], None, period, &times, &cfg).is_err());
    }

    #[test]
    fn synchronized_delta_has_zero_deviation() {
        let f = ideal(0.663);
        let d = dynamics(&f, 5.6e-14);
        let r = delta_scan(&d, &[0.0], 20, 200, &IntegratorConfig::default()).unwrap();
        assert_eq!(r[0].deviation, 0.0);
    }
}
