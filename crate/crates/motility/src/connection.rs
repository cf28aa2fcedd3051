//! Local connections over a two-dimensional shape space.
//!
//! A kinematic locomoting system is captured by a 3×2 matrix field
//! `A(r)` — the **local connection** (or *motility map*) — relating
//! shape velocity to body velocity through `ξ = A(r)·ṙ` (positive
//! body-motion convention).  [`LocalConnection`] wraps an arbitrary
//! evaluator closure together with optional extras:
//!
//! * an analytic Jacobian (otherwise central finite differences),
//! * a validity box (shape regions where the model breaks down, e.g.
//!   link collisions, are fenced off and reported as [`Error::OutOfDomain`]),
//! * a reporting-frame offset `B(r)` re-expressing body velocity in a
//!   frame rigidly attached at a shape-dependent pose.
//!
//! The derived quantities feeding every displacement estimate are the
//! columnwise Lie bracket `[A₁, A₂]`, the exterior derivative
//! `dA = ∂A₂/∂r₁ − ∂A₁/∂r₂`, and their sum — the **total Lie bracket**
//! [`LocalConnection::total_lie_bracket`] `DA = dA + [A₁, A₂]` — whose
//! surface integral over the region enclosed by a gait is the corrected
//! body-velocity estimate of the gait's displacement.

use crate::error::{Error, Result};
use crate::quad::Accumulate;
use crate::se2::{bracket, Pose, Twist};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A point of the two-dimensional shape space (also used for tangent
/// vectors / shape velocities, which live in the same coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePoint {
    pub r1: f64,
    pub r2: f64,
}

impl ShapePoint {
    pub const ORIGIN: ShapePoint = ShapePoint { r1: 0.0, r2: 0.0 };

    pub fn new(r1: f64, r2: f64) -> Self {
        ShapePoint { r1, r2 }
    }

    pub fn add(self, other: ShapePoint) -> ShapePoint {
        ShapePoint::new(self.r1 + other.r1, self.r2 + other.r2)
    }

    pub fn sub(self, other: ShapePoint) -> ShapePoint {
        ShapePoint::new(self.r1 - other.r1, self.r2 - other.r2)
    }

    pub fn scale(self, s: f64) -> ShapePoint {
        ShapePoint::new(self.r1 * s, self.r2 * s)
    }

    pub fn norm(self) -> f64 {
        self.r1.hypot(self.r2)
    }
}

/// Value of a local connection at one shape point: a 3×2 matrix stored
/// as its two columns (each a twist).  Sign convention: body velocity
/// is `ξ = +A·ṙ` (driving a shape variable forward produces the motion
/// its column describes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionMatrix {
    /// Columns A₁, A₂: response to unit velocity of each shape variable.
    pub cols: [Twist; 2],
}

impl ConnectionMatrix {
    pub const ZERO: ConnectionMatrix = ConnectionMatrix { cols: [Twist::ZERO, Twist::ZERO] };

    pub fn new(col1: Twist, col2: Twist) -> Self {
        ConnectionMatrix { cols: [col1, col2] }
    }

    /// Matrix–vector product `A·v`.
    pub fn apply(&self, v: ShapePoint) -> Twist {
        self.cols[0] * v.r1 + self.cols[1] * v.r2
    }

    /// Body velocity produced by shape velocity `rdot`: `ξ = A·ṙ`.
    pub fn body_velocity(&self, rdot: ShapePoint) -> Twist {
        self.apply(rdot)
    }

    /// Columnwise Lie bracket `[A₁, A₂]` — the infinitesimal
    /// non-commutativity of the two shape directions.
    pub fn column_bracket(&self) -> Twist {
        bracket(self.cols[0], self.cols[1])
    }

    /// Entrywise absolute row sums `(Σⱼ|A₁ⱼ|, Σⱼ|A₂ⱼ|, Σⱼ|Aθⱼ|)`:
    /// the per-row operator norm against a unit-∞ shape velocity.
    pub fn abs_row_sums(&self) -> Twist {
        Twist::new(
            self.cols[0].x.abs() + self.cols[1].x.abs(),
            self.cols[0].y.abs() + self.cols[1].y.abs(),
            self.cols[0].theta.abs() + self.cols[1].theta.abs(),
        )
    }

    /// Largest absolute entry of the matrix.
    pub fn max_abs(&self) -> f64 {
        self.cols[0].max_abs().max(self.cols[1].max_abs())
    }
}

impl Accumulate for ConnectionMatrix {
    fn zero() -> Self {
        ConnectionMatrix::ZERO
    }
    fn add(self, other: Self) -> Self {
        ConnectionMatrix::new(self.cols[0] + other.cols[0], self.cols[1] + other.cols[1])
    }
    fn scale(self, s: f64) -> Self {
        ConnectionMatrix::new(self.cols[0] * s, self.cols[1] * s)
    }
    fn max_abs_diff(self, other: Self) -> f64 {
        (self.cols[0] - other.cols[0])
            .max_abs()
            .max((self.cols[1] - other.cols[1]).max_abs())
    }
}

/// Axis-aligned box of shape points where a system model is valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityBox {
    pub r1_min: f64,
    pub r1_max: f64,
    pub r2_min: f64,
    pub r2_max: f64,
}

impl ValidityBox {
    pub fn new(r1_min: f64, r1_max: f64, r2_min: f64, r2_max: f64) -> Self {
        ValidityBox { r1_min, r1_max, r2_min, r2_max }
    }

    /// Symmetric box |r₁| ≤ half, |r₂| ≤ half.
    pub fn symmetric(half: f64) -> Self {
        ValidityBox::new(-half, half, -half, half)
    }

    pub fn contains(&self, p: ShapePoint) -> bool {
        p.r1 >= self.r1_min && p.r1 <= self.r1_max && p.r2 >= self.r2_min && p.r2 <= self.r2_max
    }

    /// Distance from `p` to the nearest box face along either axis
    /// (how much room is left for growing a gait around `p`).
    pub fn margin(&self, p: ShapePoint) -> f64 {
        (p.r1 - self.r1_min)
            .min(self.r1_max - p.r1)
            .min(p.r2 - self.r2_min)
            .min(self.r2_max - p.r2)
    }
}

type Evaluator = dyn Fn(ShapePoint) -> Result<ConnectionMatrix> + Send + Sync;
type JacobianFn = dyn Fn(ShapePoint) -> Result<[ConnectionMatrix; 2]> + Send + Sync;
type FrameOffset = dyn Fn(ShapePoint) -> Pose + Send + Sync;

/// A local connection field `A(r)` over 2-D shape space.
///
/// Cheap to clone (closures are shared); safe to evaluate from multiple
/// threads.
#[derive(Clone)]
pub struct LocalConnection {
    name: String,
    evaluator: Arc<Evaluator>,
    analytic_jacobian: Option<Arc<JacobianFn>>,
    validity: Option<ValidityBox>,
    frame_offset: Option<Arc<FrameOffset>>,
}

impl std::fmt::Debug for LocalConnection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalConnection")
            .field("name", &self.name)
            .field("analytic_jacobian", &self.analytic_jacobian.is_some())
            .field("validity", &self.validity)
            .field("frame_offset", &self.frame_offset.is_some())
            .finish()
    }
}

impl LocalConnection {
    /// Wrap an evaluator closure as a connection field.
    pub fn new<F>(name: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(ShapePoint) -> Result<ConnectionMatrix> + Send + Sync + 'static,
    {
        LocalConnection {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            analytic_jacobian: None,
            validity: None,
            frame_offset: None,
        }
    }

    /// Attach an analytic Jacobian `r ↦ [∂A/∂r₁, ∂A/∂r₂]`, used instead
    /// of finite differences whenever no frame offset is in effect.
    pub fn with_jacobian<F>(mut self, jacobian: F) -> Self
    where
        F: Fn(ShapePoint) -> Result<[ConnectionMatrix; 2]> + Send + Sync + 'static,
    {
        self.analytic_jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Restrict the field to a validity box; evaluations outside return
    /// [`Error::OutOfDomain`].
    pub fn with_validity(mut self, validity: ValidityBox) -> Self {
        self.validity = Some(validity);
        self
    }

    /// Re-express body velocity in a frame posed at `B(r)` relative to
    /// the model's native frame.  The transformed columns are
    /// `A'ᵢ = Ad_{B⁻¹} Aᵢ + (B⁻¹ ∂B/∂rᵢ)ᵛ`; the derivative term is
    /// evaluated by central differences on `B`.
    pub fn with_frame_offset<F>(mut self, offset: F) -> Self
    where
        F: Fn(ShapePoint) -> Pose + Send + Sync + 'static,
    {
        self.frame_offset = Some(Arc::new(offset));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn validity(&self) -> Option<ValidityBox> {
        self.validity
    }

    /// Check that `p` lies in the validity box (if any).
    pub fn check_domain(&self, p: ShapePoint) -> Result<()> {
        match self.validity {
            Some(v) if !v.contains(p) => Err(Error::OutOfDomain { point: p }),
            _ => Ok(()),
        }
    }

    /// Evaluate `A(r)`, applying the reporting-frame offset if present.
    pub fn evaluate(&self, p: ShapePoint) -> Result<ConnectionMatrix> {
        self.check_domain(p)?;
        let a = (self.evaluator)(p)?;
        match &self.frame_offset {
            None => Ok(a),
            Some(offset) => {
                let b_inv = offset(p).inverse();
                // d/dt of the offset along each shape axis, as a body twist
                // of the offset frame: (B⁻¹ ∂B/∂rᵢ)ᵛ by central differences.
                let h = 1e-6;
                let mut cols = [Twist::ZERO, Twist::ZERO];
                for (i, col) in cols.iter_mut().enumerate() {
                    let step = if i == 0 {
                        ShapePoint::new(h, 0.0)
                    } else {
                        ShapePoint::new(0.0, h)
                    };
                    let fwd = offset(p.add(step));
                    let bwd = offset(p.sub(step));
                    let d = (b_inv.compose(fwd).log() - b_inv.compose(bwd).log()) * (1.0 / (2.0 * h));
                    // ξ' = Ad_{B⁻¹} ξ + B⁻¹Ḃ with ξ = A·ṙ ⇒ A'ᵢ = Ad_{B⁻¹}Aᵢ + (B⁻¹∂ᵢB)ᵛ.
                    *col = b_inv.adjoint(a.cols[i]) + d;
                }
                Ok(ConnectionMatrix { cols })
            }
        }
    }

    /// Jacobian `[∂A/∂r₁, ∂A/∂r₂]`: analytic when provided (and no frame
    /// offset distorts it), otherwise second-order central differences
    /// with step `fd_step`.
    pub fn jacobian(&self, p: ShapePoint, fd_step: f64) -> Result<[ConnectionMatrix; 2]> {
        if self.frame_offset.is_none() {
            if let Some(jac) = &self.analytic_jacobian {
                self.check_domain(p)?;
                return jac(p);
            }
        }
        let h = fd_step;
        let d1 = self
            .evaluate(ShapePoint::new(p.r1 + h, p.r2))?
            .add(self.evaluate(ShapePoint::new(p.r1 - h, p.r2))?.scale(-1.0))
            .scale(1.0 / (2.0 * h));
        let d2 = self
            .evaluate(ShapePoint::new(p.r1, p.r2 + h))?
            .add(self.evaluate(ShapePoint::new(p.r1, p.r2 - h))?.scale(-1.0))
            .scale(1.0 / (2.0 * h));
        Ok([d1, d2])
    }

    /// Exterior derivative `dA = ∂A₂/∂r₁ − ∂A₁/∂r₂` at `p`.
    pub fn exterior_derivative(&self, p: ShapePoint, fd_step: f64) -> Result<Twist> {
        let [d1, d2] = self.jacobian(p, fd_step)?;
        Ok(d1.cols[1] - d2.cols[0])
    }

    /// Total Lie bracket `DA(r) = dA + [A₁, A₂]`.
    ///
    /// This is the field whose integral over the region enclosed by a
    /// gait gives the corrected body-velocity estimate: the first term
    /// is the Stokes conversion of the line integral of `A` around the
    /// loop, the second accounts (to lowest order) for rigid
    /// displacements failing to commute.
    pub fn total_lie_bracket(&self, p: ShapePoint, fd_step: f64) -> Result<Twist> {
        let da = self.exterior_derivative(p, fd_step)?;
        let a = self.evaluate(p)?;
        Ok(da + a.column_bracket())
    }

    /// Richardson-extrapolated total Lie bracket: combines steps `h`
    /// and `h/2` to cancel the leading O(h²) stencil error, for
    /// oracle-grade evaluations.
    pub fn total_lie_bracket_extrapolated(&self, p: ShapePoint, fd_step: f64) -> Result<Twist> {
        let coarse = self.total_lie_bracket(p, fd_step)?;
        let fine = self.total_lie_bracket(p, fd_step / 2.0)?;
        Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
    }

    /// Average of `A` over the disc of given center and radius.
    pub fn mean_over_disc(
        &self,
        center: ShapePoint,
        radius: f64,
        quad_tol: f64,
    ) -> Result<ConnectionMatrix> {
        let area = std::f64::consts::PI * radius * radius;
        let total = crate::quad::adaptive_disc(
            |x, y| self.evaluate(ShapePoint::new(x, y)),
            center.r1,
            center.r2,
            radius,
            quad_tol * area,
        )?;
        Ok(total.scale(1.0 / area))
    }

    /// Average of `A` over an axis-aligned square of side `side`.
    pub fn mean_over_square(
        &self,
        center: ShapePoint,
        side: f64,
        quad_tol: f64,
    ) -> Result<ConnectionMatrix> {
        let area = side * side;
        let h = side / 2.0;
        let total = crate::quad::adaptive_rect(
            |x, y| self.evaluate(ShapePoint::new(x, y)),
            center.r1 - h,
            center.r1 + h,
            center.r2 - h,
            center.r2 + h,
            quad_tol * area,
        )?;
        Ok(total.scale(1.0 / area))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Linear synthetic field with known derivatives:
    /// A₁ = (r₂, 1, r₁), A₂ = (0, r₁−r₂, 1 + r₂).
    fn linear_field() -> LocalConnection {
        LocalConnection::new("linear-test", |p: ShapePoint| {
            Ok(ConnectionMatrix::new(
                Twist::new(p.r2, 1.0, p.r1),
                Twist::new(0.0, p.r1 - p.r2, 1.0 + p.r2),
            ))
        })
    }

    #[test]
    fn finite_difference_jacobian_matches_hand_derivative() {
        let field = linear_field();
        let p = ShapePoint::new(0.3, -0.4);
        let [d1, d2] = field.jacobian(p, 1e-5).unwrap();
        // ∂A/∂r₁: col1 = (0,0,1), col2 = (0,1,0).
        assert!((d1.cols[0] - Twist::new(0.0, 0.0, 1.0)).max_abs() < 1e-9);
        assert!((d1.cols[1] - Twist::new(0.0, 1.0, 0.0)).max_abs() < 1e-9);
        // ∂A/∂r₂: col1 = (1,0,0), col2 = (0,−1,1).
        assert!((d2.cols[0] - Twist::new(1.0, 0.0, 0.0)).max_abs() < 1e-9);
        assert!((d2.cols[1] - Twist::new(0.0, -1.0, 1.0)).max_abs() < 1e-9);
    }

    #[test]
    fn total_lie_bracket_combines_curl_and_bracket() {
        let field = linear_field();
        let p = ShapePoint::new(0.1, 0.2);
        // dA = ∂₁A₂ − ∂₂A₁ = (0,1,0) − (1,0,0) = (−1,1,0).
        let da = field.exterior_derivative(p, 1e-5).unwrap();
        assert!((da - Twist::new(-1.0, 1.0, 0.0)).max_abs() < 1e-9);
        let a = field.evaluate(p).unwrap();
        let expect = da + crate::se2::bracket(a.cols[0], a.cols[1]);
        let got = field.total_lie_bracket(p, 1e-5).unwrap();
        assert!((got - expect).max_abs() < 1e-9);
        // Extrapolated variant agrees on this exactly-quadratic field.
        let extra = field.total_lie_bracket_extrapolated(p, 1e-4).unwrap();
        assert!((extra - expect).max_abs() < 1e-9);
    }

    #[test]
    fn validity_box_rejects_outside_points() {
        let field = linear_field().with_validity(ValidityBox::symmetric(1.0));
        assert!(field.evaluate(ShapePoint::new(0.9, -0.9)).is_ok());
        let err = field.evaluate(ShapePoint::new(1.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { .. }));
        assert!((field.validity().unwrap().margin(ShapePoint::new(0.25, 0.0)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mean_over_disc_of_linear_field_is_center_value() {
        // A is affine in r, so its average over any centered disc equals
        // its value at the center.
        let field = linear_field();
        let c = ShapePoint::new(0.2, -0.1);
        let mean = field.mean_over_disc(c, 0.5, 1e-12).unwrap();
        let center = field.evaluate(c).unwrap();
        assert!(mean.max_abs_diff(center) < 1e-11);
        let mean_sq = field.mean_over_square(c, 0.4, 1e-12).unwrap();
        assert!(mean_sq.max_abs_diff(center) < 1e-11);
    }

    #[test]
    fn constant_frame_offset_conjugates_columns() {
        // With B constant the derivative term vanishes and every column
        // is simply Ad_{B⁻¹} of the original.
        let b = Pose::new(0.3, -0.2, 0.7);
        let field = linear_field().with_frame_offset(move |_| b);
        let plain = linear_field();
        let p = ShapePoint::new(0.15, 0.45);
        let shifted = field.evaluate(p).unwrap();
        let base = plain.evaluate(p).unwrap();
        for i in 0..2 {
            let expect = b.inverse().adjoint(base.cols[i]);
            assert!((shifted.cols[i] - expect).max_abs() < 1e-12);
        }
    }

    #[test]
    fn pure_offset_field_reproduces_frame_motion() {
        // A ≡ 0 but the reporting frame slides with the shape:
        // B(r) = translation by (r₁, 0).  The offset frame moves at
        // +x̂·ṙ₁, so with ξ = A'ṙ the first column must be +x̂.
        let field = LocalConnection::new("zero", |_| Ok(ConnectionMatrix::ZERO))
            .with_frame_offset(|p: ShapePoint| Pose::new(p.r1, 0.0, 0.0));
        let a = field.evaluate(ShapePoint::new(0.4, 0.1)).unwrap();
        assert!((a.cols[0] - Twist::new(1.0, 0.0, 0.0)).max_abs() < 1e-8);
        assert!(a.cols[1].max_abs() < 1e-8);
    }
}
