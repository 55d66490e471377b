//! Planar points, bearings and local coordinate frames.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Distance below which two points are treated as the same location.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// A point (or free vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n < T::lit(COINCIDENCE_TOL) {
            None
        } else {
            Some(self.scale(T::one() / n))
        }
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Unit vector pointing from `p_j` towards `p_i`, i.e. `(p_i - p_j) / |p_i - p_j|`.
pub fn bearing<T: Scalar>(p_i: Point2<T>, p_j: Point2<T>) -> Result<Point2<T>> {
    (p_i - p_j).normalized().ok_or(Error::CoincidentPoints)
}

/// Cosine of the angle at `p_i` between the edges towards `p_j` and `p_k`.
pub fn angle_cosine<T: Scalar>(p_i: Point2<T>, p_j: Point2<T>, p_k: Point2<T>) -> Result<T> {
    let g_ij = bearing(p_i, p_j)?;
    let g_ik = bearing(p_i, p_k)?;
    Ok(clamp_unit(g_ij.dot(g_ik)))
}

pub(crate) fn clamp_unit<T: Scalar>(v: T) -> T {
    v.max(-T::one()).min(T::one())
}

/// Twice the signed area of triangle `(a, b, c)`.
pub fn signed_area2<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b - a).cross(c - a)
}

/// An orthogonal change of coordinates `x' = R x + offset`, reflections included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame<T = f64> {
    /// Row-major 2x2 orthogonal matrix.
    pub rotation: [[T; 2]; 2],
    pub offset: Point2<T>,
}

impl<T: Scalar> Frame<T> {
    pub fn identity() -> Self {
        Self {
            rotation: [[T::one(), T::zero()], [T::zero(), T::one()]],
            offset: Point2::zero(),
        }
    }

    /// Rotation by `theta`, optionally followed by the reflection `y -> -y`.
    pub fn from_angle(theta: T, reflect: bool) -> Self {
        let (s, c) = theta.sin_cos();
        let sign = if reflect { -T::one() } else { T::one() };
        Self {
            rotation: [[c, -s], [sign * s, sign * c]],
            offset: Point2::zero(),
        }
    }

    pub fn from_row_major(m: [T; 4]) -> Self {
        Self {
            rotation: [[m[0], m[1]], [m[2], m[3]]],
            offset: Point2::zero(),
        }
    }

    pub fn row_major(&self) -> [T; 4] {
        let r = self.rotation;
        [r[0][0], r[0][1], r[1][0], r[1][1]]
    }

    /// Applies only the linear part (directions are offset free).
    pub fn rotate(&self, v: Point2<T>) -> Point2<T> {
        let r = self.rotation;
        Point2::new(r[0][0] * v.x + r[0][1] * v.y, r[1][0] * v.x + r[1][1] * v.y)
    }

    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        self.rotate(p) + self.offset
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_defect(&self) -> T {
        let r = self.rotation;
        let a = r[0][0] * r[0][0] + r[1][0] * r[1][0] - T::one();
        let b = r[0][1] * r[0][1] + r[1][1] * r[1][1] - T::one();
        let c = r[0][0] * r[0][1] + r[1][0] * r[1][1];
        a.abs().max(b.abs()).max(c.abs())
    }
}
