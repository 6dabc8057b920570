//! Complete elliptic integrals by the arithmetic-geometric mean.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// K(m), E(m) and the combination D(m) = (2−m)E − 2(1−m)K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticKe<S> {
    pub k: S,
    pub e: S,
    /// Small-m safe: behaves like (3π/16) m² without the cancellation of the direct formula.
    pub d: S,
}

/// (K(m), E(m)) for parameter m = k² in [0, 1).
pub fn complete_elliptic_ke<S: Scalar>(m: S) -> Result<(S, S)> {
    if !(m >= S::zero() && m < S::one()) {
        return Err(Error::EllipticDomain(m.as_f64()));
    }
    let r = elliptic_with_complement(m, S::one() - m);
    Ok((r.k, r.e))
}

/// Same with the complementary parameter `mc = 1 − m` supplied separately, so that callers
/// who know it more accurately than `1 − m` keep that accuracy.
pub fn elliptic_with_complement<S: Scalar>(m: S, mc: S) -> EllipticKe<S> {
    let half = S::half();
    let b0 = mc.sqrt();
    let mut a = S::one();
    let mut b = b0;
    // c_{n+1} = (a_n − b_n)/2, carried as c_n²/(4a_{n+1}) to avoid the cancellation.
    let mut c = S::zero();
    let mut weight = S::one();
    let mut tail = S::zero();
    let tol = S::eps();
    for n in 0..64 {
        let a_next = (a + b) * half;
        let b_next = (a * b).sqrt();
        c = if n == 0 {
            m / (S::two() * (S::one() + b0))
        } else {
            c * c / (S::lit(4.0) * a_next)
        };
        a = a_next;
        b = b_next;
        tail = tail + weight * c * c;
        weight = weight * S::two();
        if c <= tol * a {
            break;
        }
    }
    let k = S::FRAC_PI_2() / a;
    let e = k * (S::one() - m * half - tail);
    let d = k * (m * m * half - (S::two() - m) * tail);
    EllipticKe { k, e, d }
}
