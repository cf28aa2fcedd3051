//! Planar rigid-body motions: the Lie group SE(2) and its algebra se(2).
//!
//! Group elements ([`Pose`]) are planar positions plus headings; algebra
//! elements ([`Twist`]) are body-frame velocities or, equivalently,
//! exponential coordinates of a displacement.  The exponential and
//! logarithm maps use the closed forms
//!
//! ```text
//! exp(x, y, θ) = ( sinθ/θ · x − (1−cosθ)/θ · y,
//!                  (1−cosθ)/θ · x + sinθ/θ · y,   θ )
//! ```
//!
//! with series fallbacks below [`SMALL_ANGLE`] so the maps stay smooth
//! through θ = 0.  Headings are normalized to the half-open interval
//! (−π, π]; θ = π is on the principal branch and `log` is exact there.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Below this |θ| the trigonometric prefactors sin θ/θ and (1−cos θ)/θ
/// switch to their Taylor series; the truncation error is O(θ⁴) ≪ 1 ulp.
pub const SMALL_ANGLE: f64 = 1e-6;

/// Element of se(2): body-frame velocity (x, y) with rotation rate θ,
/// or the exponential coordinates of a finite displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Twist {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Element of SE(2): planar position (x, y) and heading θ ∈ (−π, π].
///
/// The heading is re-normalized after every composition, so two poses
/// describing the same transform compare componentwise equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Wrap an angle to the half-open interval (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -std::f64::consts::PI && theta <= std::f64::consts::PI {
        return theta;
    }
    // π − (π − θ) mod 2π maps the real line onto (−π, π], sending π to π.
    let two_pi = 2.0 * std::f64::consts::PI;
    std::f64::consts::PI - (std::f64::consts::PI - theta).rem_euclid(two_pi)
}

/// sin θ / θ, series-guarded near zero.
fn sinc(theta: f64) -> f64 {
    if theta.abs() < SMALL_ANGLE {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    }
}

/// (1 − cos θ) / θ, series-guarded near zero.
fn versc(theta: f64) -> f64 {
    if theta.abs() < SMALL_ANGLE {
        theta / 2.0 - theta * theta * theta / 24.0
    } else {
        (1.0 - theta.cos()) / theta
    }
}

/// (θ/2) · cot(θ/2), series-guarded near zero.  Finite on (−2π, 2π),
/// in particular at the branch edge θ = ±π where it vanishes.
fn half_cot_half(theta: f64) -> f64 {
    if theta.abs() < SMALL_ANGLE {
        1.0 - theta * theta / 12.0
    } else {
        let h = 0.5 * theta;
        h * h.cos() / h.sin()
    }
}

impl Twist {
    pub const ZERO: Twist = Twist { x: 0.0, y: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Twist { x, y, theta }
    }

    /// Exponential map se(2) → SE(2).
    ///
    /// Equals the matrix exponential of the homogeneous form
    /// `[[0, −θ, x], [θ, 0, y], [0, 0, 0]]`; the resulting heading is
    /// normalized to (−π, π].
    pub fn exp(self) -> Pose {
        let a = sinc(self.theta);
        let b = versc(self.theta);
        Pose::new(a * self.x - b * self.y, b * self.x + a * self.y, self.theta)
    }

    /// Homogeneous 3×3 matrix form of the twist.
    pub fn matrix(self) -> [[f64; 3]; 3] {
        [
            [0.0, -self.theta, self.x],
            [self.theta, 0.0, self.y],
            [0.0, 0.0, 0.0],
        ]
    }

    /// Euclidean norm of the coordinate triple (x, y, θ).
    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.theta * self.theta).sqrt()
    }

    /// Norm of the translational part only.
    pub fn translation_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Componentwise absolute value (used by triangle-inequality bounds).
    pub fn abs(self) -> Twist {
        Twist::new(self.x.abs(), self.y.abs(), self.theta.abs())
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.theta.abs())
    }
}

/// Lie bracket on se(2):
/// `[X, Y] = (X_y Y_θ − Y_y X_θ,  Y_x X_θ − X_x Y_θ,  0)`.
///
/// The θ component of any bracket vanishes — the algebra is solvable —
/// which is what confines commutation effects to the translation plane.
pub fn bracket(x: Twist, y: Twist) -> Twist {
    Twist::new(
        x.y * y.theta - y.y * x.theta,
        y.x * x.theta - x.x * y.theta,
        0.0,
    )
}

/// Truncated Baker–Campbell–Hausdorff series for log(exp X · exp Y).
///
/// * order 1: `X + Y`
/// * order 2: `+ ½[X, Y]`
/// * order 3: `+ 1/12 [X − Y, [X, Y]]`
///
/// Truncating at order k leaves an error of order k+1 in the magnitude
/// of the inputs.  Orders outside 1..=3 panic: higher terms are not
/// implemented and order 0 is meaningless.
pub fn bch_truncate(x: Twist, y: Twist, order: u32) -> Twist {
    assert!((1..=3).contains(&order), "BCH truncation order must be 1, 2, or 3");
    let mut z = x + y;
    if order >= 2 {
        z = z + bracket(x, y) * 0.5;
    }
    if order >= 3 {
        z = z + bracket(x - y, bracket(x, y)) * (1.0 / 12.0);
    }
    z
}

impl Pose {
    pub const IDENTITY: Pose = Pose { x: 0.0, y: 0.0, theta: 0.0 };

    /// Build a pose, normalizing the heading to (−π, π].
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: wrap_angle(theta) }
    }

    /// Logarithm map SE(2) → se(2) on the principal branch.
    ///
    /// Inverts [`Twist::exp`] for |θ| ≤ π; at θ = π the closed form
    /// remains finite ((θ/2)·cot(θ/2) → 0) and round-trips exactly.
    pub fn log(self) -> Twist {
        let a = half_cot_half(self.theta);
        let h = 0.5 * self.theta;
        Twist::new(
            a * self.x + h * self.y,
            -h * self.x + a * self.y,
            self.theta,
        )
    }

    /// Group composition: `self` followed by `rhs` in the frame of `self`.
    pub fn compose(self, rhs: Pose) -> Pose {
        let (s, c) = self.theta.sin_cos();
        Pose::new(
            self.x + c * rhs.x - s * rhs.y,
            self.y + s * rhs.x + c * rhs.y,
            self.theta + rhs.theta,
        )
    }

    /// Group inverse: `self.compose(self.inverse()) = identity`.
    pub fn inverse(self) -> Pose {
        let (s, c) = self.theta.sin_cos();
        Pose::new(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)
    }

    /// Homogeneous 3×3 matrix form of the pose.
    pub fn matrix(self) -> [[f64; 3]; 3] {
        let (s, c) = self.theta.sin_cos();
        [[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]]
    }

    /// Adjoint action on a twist: re-expresses a body velocity seen in a
    /// frame displaced by `self` (`Ad_g ξ`).
    pub fn adjoint(self, xi: Twist) -> Twist {
        let (s, c) = self.theta.sin_cos();
        Twist::new(
            c * xi.x - s * xi.y + self.y * xi.theta,
            s * xi.x + c * xi.y - self.x * xi.theta,
            xi.theta,
        )
    }

    /// Euclidean distance to another pose in (x, y, θ) coordinates with
    /// the heading difference weighted by `theta_weight`.
    pub fn distance(self, other: Pose, theta_weight: f64) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dt = theta_weight * wrap_angle(self.theta - other.theta);
        (dx * dx + dy * dy + dt * dt).sqrt()
    }
}

impl Add for Twist {
    type Output = Twist;
    fn add(self, rhs: Twist) -> Twist {
        Twist::new(self.x + rhs.x, self.y + rhs.y, self.theta + rhs.theta)
    }
}

impl Sub for Twist {
    type Output = Twist;
    fn sub(self, rhs: Twist) -> Twist {
        Twist::new(self.x - rhs.x, self.y - rhs.y, self.theta - rhs.theta)
    }
}

impl Mul<f64> for Twist {
    type Output = Twist;
    fn mul(self, s: f64) -> Twist {
        Twist::new(self.x * s, self.y * s, self.theta * s)
    }
}

impl Neg for Twist {
    type Output = Twist;
    fn neg(self) -> Twist {
        self * -1.0
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(rhs)
    }
}
