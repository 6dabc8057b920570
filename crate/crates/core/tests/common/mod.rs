//! Brute-force reference computations shared by the oracle and acceptance targets.
//! None of these call into the library's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use ndspin::constants::PhysicalConstants;
use ndspin::model::{FieldConfig, Material, NanodiamondParams, TrapModel};
use ndspin::Spin;

pub fn model(diameter: f64, b0: f64, bprime: f64, tilt: f64) -> TrapModel<f64> {
    let nd = NanodiamondParams::new(diameter, Material::diamond()).unwrap();
    TrapModel::new(
        PhysicalConstants::codata(),
        nd,
        FieldConfig::new(b0, bprime, tilt).unwrap(),
    )
    .unwrap()
}

pub fn model_of_mass(mass: f64, bprime: f64) -> TrapModel<f64> {
    let nd = NanodiamondParams::from_mass(mass, Material::diamond()).unwrap();
    TrapModel::new(PhysicalConstants::codata(), nd, FieldConfig::gradient(bprime).unwrap()).unwrap()
}

/// Midpoint rule on [0, π/2]; the integrands are smooth and even about both ends, so this
/// converges geometrically.
fn midpoint_quarter<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = PI / 2.0 / n as f64;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..n {
        // Kahan summation keeps 10⁷ terms at full precision.
        let y = f((i as f64 + 0.5) * h) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum * h
}

pub fn elliptic_k_quadrature(m: f64, n: usize) -> f64 {
    midpoint_quarter(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), n)
}

pub fn elliptic_e_quadrature(m: f64, n: usize) -> f64 {
    midpoint_quarter(|t| (1.0 - m * t.sin().powi(2)).sqrt(), n)
}

/// Field of a circular loop (axis x, centre x = `center_x`) by summing `n` straight chords.
pub fn biot_savart_loop(p: [f64; 3], radius: f64, center_x: f64, mmf: f64, mu0: f64, n: usize) -> [f64; 3] {
    let mut b = [0.0; 3];
    let dphi = 2.0 * PI / n as f64;
    let point = |phi: f64| [center_x, radius * phi.cos(), radius * phi.sin()];
    for i in 0..n {
        let a = point(i as f64 * dphi);
        let c = point((i + 1) as f64 * dphi);
        let dl = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let mid = [(a[0] + c[0]) / 2.0, (a[1] + c[1]) / 2.0, (a[2] + c[2]) / 2.0];
        let r = [p[0] - mid[0], p[1] - mid[1], p[2] - mid[2]];
        let r3 = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).powf(1.5);
        b[0] += (dl[1] * r[2] - dl[2] * r[1]) / r3;
        b[1] += (dl[2] * r[0] - dl[0] * r[2]) / r3;
        b[2] += (dl[0] * r[1] - dl[1] * r[0]) / r3;
    }
    let k = mu0 * mmf / (4.0 * PI);
    [k * b[0], k * b[1], k * b[2]]
}

/// Centre distance at which the retarded Casimir-Polder potential of two spheres equals a
/// tenth of their Newtonian potential, by bisection on the potentials themselves.
pub fn casimir_polder_by_bisection(model: &TrapModel<f64>) -> f64 {
    let k = &model.constants;
    let r = model.nd.diameter() / 2.0;
    let eps = model.nd.epsilon();
    let f = (eps - 1.0) / (eps + 2.0);
    let m = model.nd.mass();
    let excess = |x: f64| {
        let v_cp = 23.0 * k.hbar * k.c / (4.0 * PI) * r.powi(6) / x.powi(7) * f * f;
        let v_g = k.g_newton * m * m / x;
        v_cp - 0.1 * v_g
    };
    let (mut lo, mut hi) = (1e-12f64, 1.0f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Composite trapezoid of the gravitational phase rate over one separation cycle.
pub fn cycle_phase_trapezoid(model: &TrapModel<f64>, d: f64, n: usize) -> f64 {
    let k = &model.constants;
    let m = model.nd.mass();
    let dx = model.max_separation();
    let omega = model.osc.omega;
    let period = 2.0 * PI / omega;
    let rate = |t: f64| {
        let s = dx * (1.0 - (omega * t).cos()) / 2.0;
        k.g_newton * m * m / k.hbar * (1.0 / (d - s) + 1.0 / (d + s) - 2.0 / d)
    };
    let h = period / n as f64;
    let mut sum = 0.5 * (rate(0.0) + rate(period));
    for i in 1..n {
        sum += rate(i as f64 * h);
    }
    sum * h
}

/// Negativity from a dense Hermitian eigendecomposition of the explicit partial transpose.
pub fn negativity_dense(amplitudes: [Complex64; 4]) -> f64 {
    let rho = DMatrix::from_fn(4, 4, |r, c| amplitudes[r] * amplitudes[c].conj());
    // Transpose the second qubit: (a b),(c d) -> (a d),(c b).
    let pt = DMatrix::from_fn(4, 4, |r, c| rho[(2 * (r / 2) + c % 2, 2 * (c / 2) + r % 2)]);
    let eig = SymmetricEigen::new(pt);
    eig.eigenvalues.iter().filter(|e| **e < 0.0).map(|e| -e).sum()
}

/// Tilted-frame branch phase by fourth-order Runge-Kutta on (Re α, Im α, ϑ) with
/// dα/dt = i(ωα + Λ) and dϑ/dt = γB0 s + Λ Re α. The zero-field splitting is left out since
/// it is common to both spins.
pub fn tilted_phase_rk4(model: &TrapModel<f64>, spin: Spin, steps: usize) -> f64 {
    let o = &model.osc;
    let lambda = o.lambda0 + o.lambda_g + spin.value::<f64>() * o.lambda;
    let omega = o.omega;
    let bias = model.constants.gamma_e * model.field.b0 * spin.value::<f64>();
    let f = |y: [f64; 3]| {
        let (re, im) = (y[0], y[1]);
        [-omega * im, omega * re + lambda, bias + lambda * re]
    };
    let t_end = 2.0 * PI / omega;
    let h = t_end / steps as f64;
    let mut y = [0.0; 3];
    let add = |y: [f64; 3], k: [f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(add(y, k1, h / 2.0));
        let k3 = f(add(y, k2, h / 2.0));
        let k4 = f(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y[2]
}

/// Time of the n-th sign change of `v` from the sampled series, linearly interpolated.
pub fn nth_zero_crossing(t: &[f64], v: &[f64], n: usize) -> Option<f64> {
    let mut seen = 0;
    for i in 1..t.len() {
        if v[i - 1] != 0.0 && v[i - 1].signum() != v[i].signum() {
            seen += 1;
            if seen == n {
                return Some(t[i - 1] + (t[i] - t[i - 1]) * v[i - 1] / (v[i - 1] - v[i]));
            }
        }
    }
    None
}
