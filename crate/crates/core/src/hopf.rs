//! Coordinates on the unit three-sphere and the Hopf fibration.
//!
//! A point of S³ ⊂ ℂ² is stored as a pair `(z1, z2)` with `|z1|² + |z2|² = 1`.
//! The Hopf chart `(α, φ, θ)` parametrises it as
//!
//! ```text
//! z1 = sin α · e^{i(θ + φ)},    z2 = cos α · e^{i(θ − φ)}
//! ```
//!
//! so that the circle action `e^{iϑ}·(z1, z2)` is the shift `θ ↦ θ + ϑ`, and the
//! Hopf projection `(2 z1 z̄2, |z1|² − |z2|²)` depends on `(α, φ)` only.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance (radians) from `α ∈ {0, π/2}` inside which the `(α, φ)` chart is singular.
pub const CHART_POLE_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl CartesianPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    pub fn from_r4(x: [f64; 4]) -> Self {
        Self::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]))
    }

    pub fn to_r4(self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn norm_sqr(self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    /// Radial projection back onto S³.
    pub fn normalized(self) -> Self {
        let r = self.norm_sqr().sqrt();
        Self::new(self.z1 / r, self.z2 / r)
    }

    /// Euclidean dot product in ℝ⁴.
    pub fn dot(self, other: Self) -> f64 {
        (self.z1 * other.z1.conj() + self.z2 * other.z2.conj()).re
    }

    /// Hermitian product `z1 w̄1 + z2 w̄2`.
    pub fn hermitian(self, other: Self) -> Complex64 {
        self.z1 * other.z1.conj() + self.z2 * other.z2.conj()
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub alpha: f64,
    pub phi: f64,
    pub theta: f64,
}

impl HopfPoint {
    pub fn new(alpha: f64, phi: f64, theta: f64) -> Self {
        Self { alpha, phi, theta }
    }
}

/// A unit vector in ℝ³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(pub [f64; 3]);

impl SpherePoint {
    pub fn new(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Self([v[0] / r, v[1] / r, v[2] / r])
    }

    pub fn norm(self) -> f64 {
        let v = self.0;
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    /// Chart coordinates `(α, φ)` with `α ∈ [0, π/2]`, `φ ∈ [0, π)`, inverting
    /// `(sin2α cos2φ, sin2α sin2φ, −cos2α)`.
    pub fn to_chart(self) -> (f64, f64) {
        let [x, y, z] = self.0;
        let alpha = 0.5 * (-z).clamp(-1.0, 1.0).acos();
        let mut phi = 0.5 * y.atan2(x);
        if phi < 0.0 {
            phi += PI;
        }
        if phi >= PI {
            phi -= PI;
        }
        (alpha, phi)
    }

    /// Chart coordinates, refusing points within [`CHART_POLE_EPS`] of a pole.
    pub fn to_chart_checked(self) -> Result<(f64, f64)> {
        let (alpha, phi) = self.to_chart();
        if !(CHART_POLE_EPS..=FRAC_PI_2 - CHART_POLE_EPS).contains(&alpha) {
            return Err(Error::ChartPole {
                alpha,
                eps: CHART_POLE_EPS,
            });
        }
        Ok((alpha, phi))
    }

    pub fn dot(self, other: Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }
}

pub fn hopf_to_cartesian(p: HopfPoint) -> CartesianPoint {
    let (s, c) = p.alpha.sin_cos();
    CartesianPoint::new(
        Complex64::from_polar(s, p.theta + p.phi),
        Complex64::from_polar(c, p.theta - p.phi),
    )
}

/// The lift of the base point `(α, φ)` in the gauge `θ = 0`.
pub fn chart_point(alpha: f64, phi: f64) -> CartesianPoint {
    hopf_to_cartesian(HopfPoint::new(alpha, phi, 0.0))
}

/// Inverse of [`hopf_to_cartesian`] on the fundamental domain
/// `φ ∈ [0, π)`, `θ ∈ [−π, π)`.
///
/// The second value flags the degenerate loci `α ∈ {0, π/2}`, where `φ` is set to 0.
pub fn cartesian_to_hopf(p: CartesianPoint) -> (HopfPoint, bool) {
    let r1 = p.z1.norm();
    let r2 = p.z2.norm();
    let alpha = r1.atan2(r2);
    const DEGENERATE: f64 = 1e-12;
    if r1 < DEGENERATE {
        return (HopfPoint::new(alpha, 0.0, wrap_angle(p.z2.arg())), true);
    }
    if r2 < DEGENERATE {
        return (HopfPoint::new(alpha, 0.0, wrap_angle(p.z1.arg())), true);
    }
    let a1 = p.z1.arg();
    let a2 = p.z2.arg();
    let mut phi = 0.5 * (a1 - a2);
    let mut theta = 0.5 * (a1 + a2);
    // (θ, φ) and (θ + π, φ + π) name the same point.
    while phi < 0.0 {
        phi += PI;
        theta += PI;
    }
    while phi >= PI {
        phi -= PI;
        theta -= PI;
    }
    (HopfPoint::new(alpha, phi, wrap_angle(theta)), false)
}

/// Wraps into `[−π, π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(TAU) - PI;
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

pub fn circle_action(p: CartesianPoint, vartheta: f64) -> CartesianPoint {
    let e = Complex64::from_polar(1.0, vartheta);
    CartesianPoint::new(e * p.z1, e * p.z2)
}

pub fn hopf_projection(p: CartesianPoint) -> SpherePoint {
    let w = 2.0 * p.z1 * p.z2.conj();
    SpherePoint([w.re, w.im, p.z1.norm_sqr() - p.z2.norm_sqr()])
}

/// Hamilton quaternion `w + x i + y j + z k`; S³ is identified with the unit
/// quaternions via `z1 + z2 j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn normalized(self) -> Self {
        let r = (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        Self::new(self.w / r, self.x / r, self.y / r, self.z / r)
    }

    pub fn from_point(p: CartesianPoint) -> Self {
        let [w, x, y, z] = p.to_r4();
        Self::new(w, x, y, z)
    }

    pub fn to_point(self) -> CartesianPoint {
        CartesianPoint::from_r4([self.w, self.x, self.y, self.z])
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

/// The SO(4) isometry `x ↦ p̄ x q`.
pub fn isometry(p: Quaternion, q: Quaternion, x: CartesianPoint) -> CartesianPoint {
    (p.conj() * Quaternion::from_point(x) * q).to_point()
}

/// Right multiplication `x ↦ x q`; commutes with the circle action.
pub fn right_action(q: Quaternion, x: CartesianPoint) -> CartesianPoint {
    (Quaternion::from_point(x) * q).to_point()
}
