//! Dormand–Prince 5(4) integrator with step-size control.
//!
//! Steps never cross a requested sample time: the step is shortened to land on it, so sampled
//! values are true integrator states rather than interpolants. Discontinuities are handled by the
//! caller, which integrates one smooth interval per call and restarts at the event.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<S, const N: usize> {
    pub rel_tol: S,
    pub abs_tol: [S; N],
    /// Upper bound on any step; infinity for none.
    pub max_step: S,
    pub max_steps: usize,
}

impl<S: Scalar, const N: usize> OdeOptions<S, N> {
    pub fn uniform(rel_tol: S, abs_tol: S) -> Self {
        Self {
            rel_tol,
            abs_tol: [abs_tol; N],
            max_step: S::infinity(),
            max_steps: 5_000_000,
        }
    }
}

/// Result of integrating one smooth interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S, const N: usize> {
    /// States at the requested sample times, in order.
    pub samples: Vec<[S; N]>,
    pub end: [S; N],
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest local error estimate of an accepted step, in units of the tolerance.
    pub max_error_ratio: S,
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Tableau<S> {
    c: [S; 4],
    a: [[S; 5]; 5],
    b: [S; 5],
    e: [S; 6],
}

impl<S: Scalar> Tableau<S> {
    fn new() -> Self {
        let l = S::lit;
        let z = S::zero();
        Self {
            c: [l(C2), l(C3), l(C4), l(C5)],
            a: [
                [l(A21), z, z, z, z],
                [l(A31), l(A32), z, z, z],
                [l(A41), l(A42), l(A43), z, z],
                [l(A51), l(A52), l(A53), l(A54), z],
                [l(A61), l(A62), l(A63), l(A64), l(A65)],
            ],
            b: [l(B1), l(B3), l(B4), l(B5), l(B6)],
            e: [l(E1), l(E3), l(E4), l(E5), l(E6), l(E7)],
        }
    }
}

fn axpy<S: Scalar, const N: usize>(y: &[S; N], h: S, terms: &[(S, &[S; N])]) -> [S; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = S::zero();
        for (w, k) in terms {
            acc = acc + *w * k[i];
        }
        *o = *o + h * acc;
    }
    out
}

fn finite<S: Scalar, const N: usize>(y: &[S; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn to_f64<S: Scalar, const N: usize>(y: &[S; N]) -> Vec<f64> {
    y.iter().map(|v| v.as_f64()).collect()
}

fn error_norm<S: Scalar, const N: usize>(err: &[S; N], y0: &[S; N], y1: &[S; N], opts: &OdeOptions<S, N>) -> S {
    let mut sum = S::zero();
    for i in 0..N {
        let scale = opts.abs_tol[i] + opts.rel_tol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / scale;
        sum = sum + r * r;
    }
    (sum / S::count(N)).sqrt()
}

/// Hairer–Nørsett–Wanner starting step.
fn initial_step<S: Scalar, const N: usize, F>(
    f: &mut F,
    t0: S,
    y0: &[S; N],
    f0: &[S; N],
    span: S,
    opts: &OdeOptions<S, N>,
) -> S
where
    F: FnMut(S, &[S; N]) -> [S; N],
{
    let scale = |i: usize| opts.abs_tol[i] + opts.rel_tol * y0[i].abs();
    let rms = |v: &[S; N]| {
        let mut s = S::zero();
        for (i, x) in v.iter().enumerate() {
            let r = *x / scale(i);
            s = s + r * r;
        }
        (s / S::count(N)).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let tiny = S::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny {
        S::lit(1e-6) * span
    } else {
        S::lit(0.01) * d0 / d1
    };
    h0 = h0.min(span).min(opts.max_step);
    let y1 = axpy(y0, h0, &[(S::one(), f0)]);
    let f1 = f(t0 + h0, &y1);
    let mut diff = [S::zero(); N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms(&diff) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= S::lit(1e-15) {
        (h0 * S::lit(1e-3)).max(S::lit(1e-6) * span)
    } else {
        (S::lit(0.01) / dmax).powf(S::lit(0.2))
    };
    (S::lit(100.0) * h0).min(h1).min(span).min(opts.max_step)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` and records the state at each of `samples`.
///
/// `samples` must be non-decreasing and lie in `[t0, t_end]`.
pub fn integrate<S, const N: usize, F>(
    mut f: F,
    t0: S,
    y0: [S; N],
    t_end: S,
    samples: &[S],
    opts: &OdeOptions<S, N>,
) -> Result<Interval<S, N>>
where
    S: Scalar,
    F: FnMut(S, &[S; N]) -> [S; N],
{
    let mut out = Interval {
        samples: Vec::with_capacity(samples.len()),
        end: y0,
        accepted_steps: 0,
        rejected_steps: 0,
        max_error_ratio: S::zero(),
    };
    if !finite(&y0) {
        return Err(Error::NonFinite { t: t0.as_f64() });
    }
    let mut pending = samples.iter().copied().peekable();
    while let Some(&ts) = pending.peek() {
        if ts > t0 {
            break;
        }
        out.samples.push(y0);
        pending.next();
    }
    let span = t_end - t0;
    if span <= S::zero() {
        return Ok(out);
    }

    let tab = Tableau::<S>::new();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&mut f, t0, &y0, &k1, span, opts);
    let safety = S::lit(0.9);
    let fac_min = S::lit(0.2);
    let fac_max = S::lit(10.0);
    let eps = S::eps();

    while t < t_end {
        if out.accepted_steps + out.rejected_steps >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let floor = S::lit(16.0) * eps * t.abs().max(span);
        // Samples within rounding distance of the current time take the current state.
        while let Some(&ts) = pending.peek() {
            if ts - t > floor {
                break;
            }
            out.samples.push(y);
            pending.next();
        }
        if t_end - t <= floor {
            break;
        }
        let target = pending.peek().copied().unwrap_or(t_end).min(t_end);
        let mut step = h.min(opts.max_step);
        let mut lands = false;
        // Absorb slivers so the next step does not become vanishingly small.
        if t + step >= target || target - (t + step) < S::lit(1e-3) * step {
            step = target - t;
            lands = true;
        }
        if step < floor {
            return Err(Error::StepSizeUnderflow {
                t: t.as_f64(),
                last_state: to_f64(&y),
            });
        }

        let a = &tab.a;
        let y2 = axpy(&y, step, &[(a[0][0], &k1)]);
        let k2 = f(t + tab.c[0] * step, &y2);
        let y3 = axpy(&y, step, &[(a[1][0], &k1), (a[1][1], &k2)]);
        let k3 = f(t + tab.c[1] * step, &y3);
        let y4 = axpy(&y, step, &[(a[2][0], &k1), (a[2][1], &k2), (a[2][2], &k3)]);
        let k4 = f(t + tab.c[2] * step, &y4);
        let y5 = axpy(
            &y,
            step,
            &[(a[3][0], &k1), (a[3][1], &k2), (a[3][2], &k3), (a[3][3], &k4)],
        );
        let k5 = f(t + tab.c[3] * step, &y5);
        let y6 = axpy(
            &y,
            step,
            &[
                (a[4][0], &k1),
                (a[4][1], &k2),
                (a[4][2], &k3),
                (a[4][3], &k4),
                (a[4][4], &k5),
            ],
        );
        let t_new = if lands { target } else { t + step };
        let k6 = f(t + step, &y6);
        let b = &tab.b;
        let y_new = axpy(
            &y,
            step,
            &[(b[0], &k1), (b[1], &k3), (b[2], &k4), (b[3], &k5), (b[4], &k6)],
        );
        let k7 = f(t_new, &y_new);
        let e = &tab.e;
        let mut err = [S::zero(); N];
        for i in 0..N {
            err[i] = step * (e[0] * k1[i] + e[1] * k3[i] + e[2] * k4[i] + e[3] * k5[i] + e[4] * k6[i] + e[5] * k7[i]);
        }
        if !finite(&y_new) || !finite(&k7) {
            return Err(Error::NonFinite { t: t_new.as_f64() });
        }
        let ratio = error_norm(&err, &y, &y_new, opts);
        let factor = if ratio <= S::zero() {
            fac_max
        } else {
            (safety * ratio.powf(S::lit(-0.2))).max(fac_min).min(fac_max)
        };

        if ratio <= S::one() {
            out.accepted_steps += 1;
            out.max_error_ratio = out.max_error_ratio.max(ratio);
            t = t_new;
            y = y_new;
            k1 = k7;
            if lands {
                while let Some(&ts) = pending.peek() {
                    if ts > t {
                        break;
                    }
                    out.samples.push(y);
                    pending.next();
                }
                // A shortened landing step says nothing about the natural step size.
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
        } else {
            out.rejected_steps += 1;
            h = step * factor.min(S::one());
        }
    }
    for _ in pending {
        out.samples.push(y);
    }
    out.end = y;
    Ok(out)
}
