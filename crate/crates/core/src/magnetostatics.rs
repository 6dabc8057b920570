//! Static field of coaxial circular loops on the x axis.
//!
//! With z_ax = x − x_c, ρ² = y² + z², r² = z_ax² + ρ², α² = r_c² + r² − 2r_cρ,
//! β² = r_c² + r² + 2r_cρ and m = k² = 1 − α²/β², a loop carrying magnetomotive force 𝔉 gives
//!
//! ```text
//! B_x = μ0𝔉 / (2πα²β) [(r_c² − r²)E + α²K]
//! B_ρ = μ0𝔉 z_ax / (2πα²βρ) [(r_c² + r²)E − α²K]
//! ```
//!
//! The bracket of B_ρ vanishes like ρ² near the axis. It equals β²D/2 with
//! D = (2−m)E − 2(1−m)K, which the AGM delivers without cancellation.

use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::elliptic_with_complement;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::vec::{Mat3, Vec3};

/// Radius below which a point counts as on the axis, relative to the loop radius.
pub const ON_AXIS_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopSource<S> {
    /// m
    pub radius: S,
    /// Axial position of the loop plane, m.
    pub center_x: S,
    /// Signed magnetomotive force, A·turns.
    pub mmf: S,
}

impl<S: Scalar> LoopSource<S> {
    pub fn new(radius: S, center_x: S, mmf: S) -> Result<Self> {
        if !(radius > S::zero() && radius.is_finite()) {
            return Err(invalid("r_c", "must be finite and > 0"));
        }
        if !(center_x.is_finite() && mmf.is_finite()) {
            return Err(invalid("loop", "centre and magnetomotive force must be finite"));
        }
        Ok(Self { radius, center_x, mmf })
    }
}

pub fn loop_field<S: Scalar>(p: Vec3<S>, src: &LoopSource<S>, mu0: S) -> Result<Vec3<S>> {
    let a = src.radius;
    let zx = p.x() - src.center_x;
    let rho2 = p.y() * p.y() + p.z() * p.z();
    let rho = rho2.sqrt();
    if rho < S::lit(ON_AXIS_RADIUS) * a {
        let s = a * a + zx * zx;
        let bx = mu0 * src.mmf * a * a / (S::two() * s * s.sqrt());
        return Ok(Vec3::new(bx, S::zero(), S::zero()));
    }
    let r2 = zx * zx + rho2;
    let two_a_rho = S::two() * a * rho;
    // α² written as (a − ρ)² + z_ax², which stays accurate near the wire.
    let alpha2 = (a - rho) * (a - rho) + zx * zx;
    let beta2 = a * a + r2 + two_a_rho;
    if alpha2 <= S::lit(1e-24) * a * a {
        return Err(Error::OnConductor {
            x: p.x().as_f64(),
            y: p.y().as_f64(),
            z: p.z().as_f64(),
        });
    }
    let beta = beta2.sqrt();
    let m = S::two() * two_a_rho / beta2;
    let mc = alpha2 / beta2;
    let ke = elliptic_with_complement(m, mc);
    let pre = mu0 * src.mmf / (S::PI() * S::two() * alpha2 * beta);
    let bx = pre * ((a * a - r2) * ke.e + alpha2 * ke.k);
    let b_rho = pre * zx / rho * (beta2 * ke.d * S::half());
    Ok(Vec3::new(bx, b_rho * p.y() / rho, b_rho * p.z() / rho))
}

/// Two coaxial loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoilAssembly<S> {
    pub loops: [LoopSource<S>; 2],
    pub mu0: S,
}

impl<S: Scalar> CoilAssembly<S> {
    pub fn new(loops: [LoopSource<S>; 2], mu0: S) -> Self {
        Self { loops, mu0 }
    }

    /// +𝔉 at x = +d_c/2 and −𝔉 at x = −d_c/2; a positive 𝔉 gives a positive ∂B_x/∂x at
    /// the centre.
    pub fn anti_helmholtz(radius: S, separation: S, mmf: S, mu0: S) -> Result<Self> {
        if !(separation > S::zero() && separation.is_finite()) {
            return Err(invalid("d_c", "must be finite and > 0"));
        }
        let h = separation * S::half();
        Ok(Self {
            loops: [LoopSource::new(radius, h, mmf)?, LoopSource::new(radius, -h, -mmf)?],
            mu0,
        })
    }

    /// Axial distance between the loop planes.
    pub fn separation(&self) -> S {
        (self.loops[0].center_x - self.loops[1].center_x).abs()
    }

    /// Smallest loop radius; sets the finite-difference step.
    pub fn min_radius(&self) -> S {
        self.loops[0].radius.min(self.loops[1].radius)
    }

    pub fn field(&self, p: Vec3<S>) -> Result<Vec3<S>> {
        Ok(loop_field(p, &self.loops[0], self.mu0)? + loop_field(p, &self.loops[1], self.mu0)?)
    }

    /// Finite-difference step max(1e-7 m, 1e-6·r_c).
    pub fn jacobian_step(&self) -> S {
        S::lit(1e-7).max(S::lit(1e-6) * self.min_radius())
    }

    /// Central-difference Jacobian, `J[i][j] = ∂B_i/∂x_j`.
    pub fn jacobian(&self, p: Vec3<S>) -> Result<Mat3<S>> {
        self.jacobian_with_step(p, self.jacobian_step())
    }

    pub fn jacobian_with_step(&self, p: Vec3<S>, h: S) -> Result<Mat3<S>> {
        let mut j = [[S::zero(); 3]; 3];
        for axis in 0..3 {
            let mut d = [S::zero(); 3];
            d[axis] = h;
            let d = Vec3(d);
            let diff = self.field(p + d)? - self.field(p - d)?;
            for (i, row) in j.iter_mut().enumerate() {
                row[axis] = diff[i] / (S::two() * h);
            }
        }
        Ok(Mat3(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample<S> {
    pub position: Vec3<S>,
    pub b: Vec3<S>,
}

/// Inclusive 1-D grid axis. `n = 1` samples `min` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAxis<S> {
    pub min: S,
    pub max: S,
    pub n: usize,
}

impl<S: Scalar> GridAxis<S> {
    pub fn point(&self, i: usize) -> S {
        if self.n <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * S::count(i) / S::count(self.n - 1)
        }
    }
}

/// Rectangular x–y grid in the plane z = `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneGrid<S> {
    pub x: GridAxis<S>,
    pub y: GridAxis<S>,
    pub z: S,
}

impl<S: Scalar> PlaneGrid<S> {
    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("grid.x", &self.x), ("grid.y", &self.y)] {
            if axis.n == 0 {
                return Err(invalid(name, "needs at least one point"));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) || axis.max < axis.min {
                return Err(invalid(name, "bounds must be finite with min <= max"));
            }
        }
        if !self.z.is_finite() {
            return Err(invalid("grid.z", "must be finite"));
        }
        Ok(())
    }
}

/// Field samples in row-major order (y outer, x inner). Rows are evaluated in parallel.
pub fn field_map<S: Scalar>(grid: &PlaneGrid<S>, coil: &CoilAssembly<S>) -> Result<Vec<FieldSample<S>>> {
    grid.validate()?;
    let rows: Vec<Vec<FieldSample<S>>> = (0..grid.y.n)
        .into_par_iter()
        .map(|iy| {
            let y = grid.y.point(iy);
            (0..grid.x.n)
                .map(|ix| {
                    let position = Vec3::new(grid.x.point(ix), y, grid.z);
                    coil.field(position).map(|b| FieldSample { position, b })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}
