//! Minimal fixed-size 3-vectors and 3×3 matrices.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vec3<S>(pub [S; 3]);

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self([x, y, z])
    }

    pub fn zero() -> Self {
        Self([S::zero(); 3])
    }

    pub fn x(&self) -> S {
        self.0[0]
    }

    pub fn y(&self) -> S {
        self.0[1]
    }

    pub fn z(&self) -> S {
        self.0[2]
    }

    pub fn dot(&self, o: &Self) -> S {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a, b, c] = self.0;
        let [d, e, f] = o.0;
        Self([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    pub fn scale(&self, s: S) -> Self {
        Self(self.0.map(|v| v * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|v| -v))
    }
}

impl<S> Index<usize> for Vec3<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

/// Row-major 3×3 matrix; for a Jacobian, `m[i][j] = ∂B_i/∂x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat3<S>(pub [[S; 3]; 3]);

impl<S: Scalar> Mat3<S> {
    pub fn trace(&self) -> S {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn max_abs(&self) -> S {
        self.0.iter().flatten().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: S) -> Self {
        Self(self.0.map(|row| row.map(|v| v * s)))
    }
}

impl<S: Scalar> Mul<Vec3<S>> for Mat3<S> {
    type Output = Vec3<S>;
    fn mul(self, v: Vec3<S>) -> Vec3<S> {
        let r = |i: usize| self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2];
        Vec3([r(0), r(1), r(2)])
    }
}
