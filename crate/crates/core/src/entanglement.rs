//! Two-ND gravitational phase bookkeeping and the resulting two-qubit state.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{invalid, Error, Result};
use crate::model::TrapModel;
use crate::quadrature::adaptive_simpson;
use crate::scalar::Scalar;

/// Prefactor of the distance at which the Casimir-Polder potential of two dielectric spheres
/// falls to a tenth of their gravitational attraction.
pub const CP_DISTANCE_FACTOR: f64 = 2.01413;

/// Δ_CP = (2.01413/2) (c ħ V² (ε−1)² / (G m² (2+ε)²))^{1/6}.
///
/// At fixed density V/m is constant, so this does not depend on the ND mass.
pub fn casimir_polder_separation<S: Scalar>(model: &TrapModel<S>) -> S {
    let k = &model.constants;
    let v = model.nd.volume();
    let m = model.nd.mass();
    let eps = model.nd.epsilon();
    let ratio = (eps - S::one()) / (eps + S::two());
    let inner = k.c * k.hbar * (v / m) * (v / m) * ratio * ratio / k.g_newton;
    S::lit(CP_DISTANCE_FACTOR / 2.0) * inner.powf(S::lit(1.0 / 6.0))
}

/// d_min = Δx_max + Δ_CP.
pub fn min_distance<S: Scalar>(model: &TrapModel<S>) -> S {
    model.max_separation() + casimir_polder_separation(model)
}

/// dΔφ/dt = (G m²/ħ)(1/(d−s) + 1/(d+s) − 2/d) at branch separation `s`, rad/s.
pub fn delta_phi_rate<S: Scalar>(k: &PhysicalConstants<S>, d: S, s: S, mass: S) -> Result<S> {
    if !(d > S::zero() && d.is_finite()) {
        return Err(invalid("d", "must be finite and > 0"));
    }
    if !(s >= S::zero()) {
        return Err(invalid("s", "must be >= 0"));
    }
    if s >= d {
        return Err(Error::BranchOverlap {
            separation: s.as_f64(),
            distance: d.as_f64(),
        });
    }
    Ok(rate_unchecked(k, d, s, mass))
}

// Same as above written as 2s²/(d(d−s)(d+s)), which avoids the cancellation when s ≪ d.
fn rate_unchecked<S: Scalar>(k: &PhysicalConstants<S>, d: S, s: S, mass: S) -> S {
    k.g_newton * mass * mass / k.hbar * S::two() * s * s / (d * (d - s) * (d + s))
}

/// Literal per-branch phases φ_± = ±(G m²/ħ)(1/d − 1/(d ± Δx)) t.
///
/// Only φ_− − φ_+ is convention independent.
pub fn individual_phases<S: Scalar>(k: &PhysicalConstants<S>, mass: S, d: S, dx: S, t: S) -> Result<(S, S)> {
    delta_phi_rate(k, d, dx, mass)?;
    let g = k.g_newton * mass * mass / k.hbar * t;
    let plus = g * (S::one() / d - S::one() / (d + dx));
    let minus = -g * (S::one() / d - S::one() / (d - dx));
    Ok((plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Phase counted only while the branches are held at full separation.
    HoldOnly,
    /// Phase also accumulated while the branches separate and recombine.
    FullCycle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance<S> {
    /// d = d_min.
    Auto,
    /// Explicit centre distance. Below d_min it is rejected unless `allow_below_min` is set.
    Manual { d: S, allow_below_min: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig<S> {
    pub target_delta_phi: S,
    pub scenario: Scenario,
    pub distance: Distance<S>,
}

impl<S: Scalar> ProtocolConfig<S> {
    /// Target 0.01π at d = d_min.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            target_delta_phi: S::lit(0.01) * S::PI(),
            scenario,
            distance: Distance::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolResult<S> {
    pub t_total: S,
    pub t_hold: S,
    pub period: S,
    pub delta_phi_bd: S,
    pub delta_phi_hold: S,
    pub d_used: S,
    pub max_separation: S,
    pub casimir_polder: S,
    pub d_min: S,
    /// Set when a manual distance below d_min was explicitly allowed.
    pub below_min_distance: bool,
}

impl<S: Scalar> ProtocolResult<S> {
    pub fn delta_phi(&self) -> S {
        self.delta_phi_bd + self.delta_phi_hold
    }
}

/// Phase gained over one full separation and recombination cycle,
/// s(t) = Δx_max (1 − cos ωt)/2, by adaptive Simpson to `tol` rad.
pub fn separation_cycle_phase<S: Scalar>(model: &TrapModel<S>, d: S, tol: S) -> Result<S> {
    let dx = model.max_separation();
    let omega = model.osc.omega;
    let mass = model.nd.mass();
    delta_phi_rate(&model.constants, d, dx, mass)?;
    let k = &model.constants;
    // Integrate over φ = ωt; the integrand is symmetric about φ = π.
    let integrand = |phi: S| {
        let s = dx * (S::one() - phi.cos()) * S::half();
        rate_unchecked(k, d, s, mass)
    };
    let q = adaptive_simpson(integrand, S::zero(), S::PI(), tol * omega / S::two(), 50)?;
    Ok(S::two() * q.value / omega)
}

pub fn protocol_duration<S: Scalar>(model: &TrapModel<S>, cfg: &ProtocolConfig<S>) -> Result<ProtocolResult<S>> {
    if !(cfg.target_delta_phi > S::zero() && cfg.target_delta_phi.is_finite()) {
        return Err(invalid("target_delta_phi", "must be finite and > 0"));
    }
    let dx = model.max_separation();
    let cp = casimir_polder_separation(model);
    let d_min = dx + cp;
    let (d, below) = match cfg.distance {
        Distance::Auto => (d_min, false),
        Distance::Manual { d, allow_below_min } => {
            if d < d_min && !allow_below_min {
                return Err(Error::BelowMinimumDistance {
                    distance: d.as_f64(),
                    d_min: d_min.as_f64(),
                });
            }
            (d, d < d_min)
        }
    };
    let rate = delta_phi_rate(&model.constants, d, dx, model.nd.mass())?;
    let delta_phi_bd = match cfg.scenario {
        Scenario::HoldOnly => S::zero(),
        Scenario::FullCycle => separation_cycle_phase(model, d, S::lit(1e-12))?,
    };
    let remaining = cfg.target_delta_phi - delta_phi_bd;
    let t_hold = if remaining > S::zero() {
        remaining / rate
    } else {
        S::zero()
    };
    if !t_hold.is_finite() {
        return Err(invalid("Bprime", "branch separation too small to accumulate phase"));
    }
    let period = model.period();
    Ok(ProtocolResult {
        t_total: period + t_hold,
        t_hold,
        period,
        delta_phi_bd,
        delta_phi_hold: rate * t_hold,
        d_used: d,
        max_separation: dx,
        casimir_polder: cp,
        d_min,
        below_min_distance: below,
    })
}

/// Amplitudes on the ordered basis |−1,−1⟩, |−1,+1⟩, |+1,−1⟩, |+1,+1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitState<S> {
    pub amplitudes: [Complex<S>; 4],
}

impl<S: Scalar> TwoQubitState<S> {
    pub fn norm_sqr(&self) -> S {
        self.amplitudes.iter().fold(S::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// (|−1,−1⟩ + |+1,+1⟩)/√2.
    pub fn bell() -> Self {
        let z = Complex::new(S::zero(), S::zero());
        let h = Complex::new(S::FRAC_1_SQRT_2(), S::zero());
        Self {
            amplitudes: [h, z, z, h],
        }
    }

    /// ρ = |ψ⟩⟨ψ| with the second qubit transposed.
    pub fn partial_transpose(&self) -> [[Complex<S>; 4]; 4] {
        let a = &self.amplitudes;
        let mut out = [[Complex::new(S::zero(), S::zero()); 4]; 4];
        for (row, out_row) in out.iter_mut().enumerate() {
            let (i1, i2) = (row / 2, row % 2);
            for (col, entry) in out_row.iter_mut().enumerate() {
                let (j1, j2) = (col / 2, col % 2);
                *entry = a[2 * i1 + j2] * a[2 * j1 + i2].conj();
            }
        }
        out
    }
}

/// Final state (1, e^{−iφ_+}, e^{iφ_−}, 1)/2.
pub fn final_state<S: Scalar>(phi_plus: S, phi_minus: S) -> TwoQubitState<S> {
    let h = S::half();
    let one = Complex::new(h, S::zero());
    TwoQubitState {
        amplitudes: [
            one,
            Complex::from_polar(h, -phi_plus),
            Complex::from_polar(h, phi_minus),
            one,
        ],
    }
}

/// Sum of |negative eigenvalues| of the partial transpose.
pub fn negativity<S: Scalar>(state: &TwoQubitState<S>) -> Result<S> {
    let n2 = state.norm_sqr();
    if (n2 - S::one()).abs() > S::lit(1e-10) {
        return Err(Error::NotNormalized(n2.as_f64()));
    }
    let eig = hermitian_eigenvalues(&state.partial_transpose());
    Ok(eig
        .iter()
        .filter(|&&e| e < S::zero())
        .fold(S::zero(), |acc, &e| acc - e))
}

/// Eigenvalues of a 4×4 Hermitian matrix, ascending.
///
/// H = A + iB is embedded as the real symmetric [[A, −B], [B, A]], whose spectrum is that of H
/// with every eigenvalue doubled; cyclic Jacobi then diagonalizes it.
pub fn hermitian_eigenvalues<S: Scalar>(h: &[[Complex<S>; 4]; 4]) -> [S; 4] {
    let mut m = [[S::zero(); 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let (re, im) = (h[i][j].re, h[i][j].im);
            m[i][j] = re;
            m[i + 4][j + 4] = re;
            m[i][j + 4] = -im;
            m[i + 4][j] = im;
        }
    }
    let mut all = jacobi_eigenvalues(m);
    all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    [all[0], all[2], all[4], all[6]]
}

fn jacobi_eigenvalues<S: Scalar, const N: usize>(mut a: [[S; N]; N]) -> [S; N] {
    let frob = a.iter().flatten().fold(S::zero(), |acc, &x| acc + x * x).sqrt();
    let threshold = S::eps() * frob;
    for _sweep in 0..100 {
        let mut off = S::zero();
        for i in 0..N {
            for j in (i + 1)..N {
                off = off + a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() <= threshold / S::lit(64.0) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (S::two() * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut out = [S::zero(); N];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][i];
    }
    out
}
