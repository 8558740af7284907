//! Plane vectors, the quarter-turn `perp`, rotations, and the change of
//! variables between lab coordinates `(x, v)` and gyro coordinates
//! `(x̃, ṽ) = (x + ⊥v/ω_c, R(ω_c t/ε) v)`.

use std::f64::consts::TAU;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::ensemble::PhysicalParams;

/// A point or displacement in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// `(y, -x)`: rotation by -π/2.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// Free-function form of [`Vec2::perp`].
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    v.perp()
}

/// Angles beyond this magnitude are reduced modulo 2π before evaluating
/// sine and cosine; `ω_c t/ε` becomes very large in long stiff runs.
const ANGLE_REDUCTION_THRESHOLD: f64 = 1e8;

/// Counter-clockwise rotation `R(θ)v`.
#[inline]
pub fn rotate(theta: f64, v: Vec2) -> Vec2 {
    let theta = if theta.abs() > ANGLE_REDUCTION_THRESHOLD {
        theta.rem_euclid(TAU)
    } else {
        theta
    };
    let (s, c) = theta.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Phase `ω_c t/ε` of the fast gyration at time `t`.
#[inline]
pub fn gyro_phase(params: &PhysicalParams, t: f64) -> f64 {
    params.omega_c * t / params.epsilon
}

/// Lab coordinates to gyro coordinates: the guiding center
/// `x + ⊥v/ω_c` and the velocity rotated back by the gyration phase.
pub fn to_gyro(x: Vec2, v: Vec2, params: &PhysicalParams, t: f64) -> (Vec2, Vec2) {
    let xt = x + v.perp() / params.omega_c;
    let vt = rotate(gyro_phase(params, t), v);
    (xt, vt)
}

/// Inverse of [`to_gyro`] at the same time `t`.
pub fn from_gyro(xt: Vec2, vt: Vec2, params: &PhysicalParams, t: f64) -> (Vec2, Vec2) {
    let v = rotate(-gyro_phase(params, t), vt);
    let x = xt - v.perp() / params.omega_c;
    (x, v)
}
