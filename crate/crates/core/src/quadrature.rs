//! Adaptive Simpson quadrature.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<S> {
    pub value: S,
    pub evaluations: usize,
}

/// ∫_a^b f with absolute tolerance `tol`, Richardson-corrected Simpson panels.
pub fn adaptive_simpson<S, F>(mut f: F, a: S, b: S, tol: S, max_depth: u32) -> Result<Quadrature<S>>
where
    S: Scalar,
    F: FnMut(S) -> S,
{
    if !(tol > S::zero()) {
        return Err(invalid("tol", "must be > 0"));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("interval", "bounds must be finite"));
    }
    let half = S::half();
    let m = (a + b) * half;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let mut evaluations = 3;
    let value = recurse(&mut f, a, b, fa, fm, fb, whole, tol, max_depth, &mut evaluations);
    Ok(Quadrature { value, evaluations })
}

fn simpson<S: Scalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::lit(6.0) * (fa + S::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<S, F>(f: &mut F, a: S, b: S, fa: S, fm: S, fb: S, whole: S, tol: S, depth: u32, evaluations: &mut usize) -> S
where
    S: Scalar,
    F: FnMut(S) -> S,
{
    let half = S::half();
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let (flm, frm) = (f(lm), f(rm));
    *evaluations += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= S::lit(15.0) * tol {
        return left + right + delta / S::lit(15.0);
    }
    recurse(f, a, m, fa, flm, fm, left, tol * half, depth - 1, evaluations)
        + recurse(f, m, b, fm, frm, fb, right, tol * half, depth - 1, evaluations)
}

/// Composite trapezoid rule on `n` equal panels.
pub fn trapezoid<S, F>(mut f: F, a: S, b: S, n: usize) -> S
where
    S: Scalar,
    F: FnMut(S) -> S,
{
    let h = (b - a) / S::count(n);
    let mut acc = (f(a) + f(b)) * S::half();
    for k in 1..n {
        acc = acc + f(a + h * S::count(k));
    }
    acc * h
}
