//! Worst-case third-order error machinery: a quadratic Taylor model of
//! the total Lie bracket at a prospective gait center, the closed-form
//! diameter-parameterized cBVI it induces, a phase-free upper bound on
//! the third-order correction, the largest diameter keeping that bound
//! below a chosen proportion of the cBVI, and the error-angle / arc
//! picture for zero-net-rotation gaits.
//!
//! The bound construction: over all start phases, the segment-pair sum
//! α+β is the mean connection applied to a chord of length ℓ in some
//! direction, so its components never exceed the envelope
//! s = (π/4)·ℓ·|Ā|·[1, 1]ᵀ entrywise — provided each row of |Ā| is not
//! overly dominated by a single column (at reflection-symmetric shapes
//! the rows are balanced and the envelope holds with margin).  Feeding
//! s and the polynomial cBVI through the componentwise bracket bound
//! ½[s, cBVI]ᵤᵦ dominates ‖½[(α+β), cBVI]‖ for every phase.
//!
//! Feasibility comparisons (is the bound ≤ P·cBVI?) default to the
//! translation-norm sense.  The strict componentwise sense is also
//! available, but it is infeasible for systems whose bound vector is
//! perpendicular to the cBVI — which includes both bundled example
//! systems, where the cBVI has a single nonzero translation component
//! and the bracket rotates it onto the other axis — so it is not the
//! default.

use crate::connection::{ConnectionMatrix, LocalConnection, ShapePoint};
use crate::error::{Error, Result};
use crate::se2::Twist;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Quadratic Taylor model of a twist-valued field about a center:
/// value, gradient, and raw second partials (H11, H12, H22).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticField {
    pub center: ShapePoint,
    /// Field value at the center.
    pub value: Twist,
    /// First partials [∂₁, ∂₂].
    pub grad: [Twist; 2],
    /// Second partials [∂₁₁, ∂₁₂, ∂₂₂].
    pub hess: [Twist; 3],
}

impl QuadraticField {
    /// Evaluate the model at an absolute shape point.
    pub fn evaluate(&self, p: ShapePoint) -> Twist {
        let d1 = p.r1 - self.center.r1;
        let d2 = p.r2 - self.center.r2;
        self.value
            + self.grad[0] * d1
            + self.grad[1] * d2
            + self.hess[0] * (0.5 * d1 * d1)
            + self.hess[1] * (d1 * d2)
            + self.hess[2] * (0.5 * d2 * d2)
    }
}

/// Quadratic Taylor model of the total Lie bracket at `center`, from
/// 9-point central difference stencils with step `hessian_step`
/// (`fd_step` feeds the inner connection-derivative stencils).
pub fn taylor_da(
    conn: &LocalConnection,
    center: ShapePoint,
    hessian_step: f64,
    fd_step: f64,
) -> Result<QuadraticField> {
    if !(hessian_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Hessian stencil step {hessian_step} must be positive"
        )));
    }
    let h = hessian_step;
    let f = |d1: f64, d2: f64| -> Result<Twist> {
        conn.total_lie_bracket(ShapePoint::new(center.r1 + d1, center.r2 + d2), fd_step)
    };
    let f00 = f(0.0, 0.0)?;
    let fp0 = f(h, 0.0)?;
    let fm0 = f(-h, 0.0)?;
    let f0p = f(0.0, h)?;
    let f0m = f(0.0, -h)?;
    let fpp = f(h, h)?;
    let fpm = f(h, -h)?;
    let fmp = f(-h, h)?;
    let fmm = f(-h, -h)?;
    Ok(QuadraticField {
        center,
        value: f00,
        grad: [(fp0 - fm0) * (0.5 / h), (f0p - f0m) * (0.5 / h)],
        hess: [
            (fp0 - f00 * 2.0 + fm0) * (1.0 / (h * h)),
            (fpp - fpm - fmp + fmm) * (0.25 / (h * h)),
            (f0p - f00 * 2.0 + f0m) * (1.0 / (h * h)),
        ],
    })
}

/// Closed-form integral of a quadratic model over the disc of diameter
/// `ell` about its center: odd terms vanish, leaving
/// area·value + (π/8)·(ℓ/2)⁴·(H11 + H22).
pub fn cbvi_polynomial(model: &QuadraticField, ell: f64) -> Twist {
    let radius = ell / 2.0;
    let area = PI * radius * radius;
    model.value * area + (model.hess[0] + model.hess[2]) * (PI / 8.0 * radius.powi(4))
}

/// Componentwise upper bound on the bracket of two twists whose
/// components are only known up to the given envelopes:
/// (|X_y·Y_θ| + |Y_y·X_θ|, |Y_x·X_θ| + |X_x·Y_θ|, 0).
pub fn bracket_upper_bound(x: Twist, y: Twist) -> Twist {
    Twist::new(
        (x.y * y.theta).abs() + (y.y * x.theta).abs(),
        (y.x * x.theta).abs() + (x.x * y.theta).abs(),
        0.0,
    )
}

/// How the connection's absolute envelope |Ā| is taken over the disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbsMode {
    /// Entrywise absolute value of the disc mean (default).
    MeanAbs,
    /// Entrywise supremum over the disc, estimated on a fixed polar
    /// sample grid — conservative.
    SupAbs,
}

/// Which sense of "bound ≤ P·cBVI" the diameter solver enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComparisonMode {
    /// Compare translation norms (default; see module docs).
    Norm,
    /// Componentwise on the translation components — stricter, and
    /// infeasible whenever the bound vector is perpendicular to the
    /// cBVI, as happens for both bundled example systems.
    Componentwise,
}

/// Knobs for the bound pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    pub abs_mode: AbsMode,
    pub comparison: ComparisonMode,
    pub quad_tol: f64,
    pub fd_step: f64,
    pub hessian_step: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            abs_mode: AbsMode::MeanAbs,
            comparison: ComparisonMode::Norm,
            quad_tol: 1e-9,
            fd_step: 1e-4,
            hessian_step: 1e-3,
        }
    }
}

/// Worst-case third-order picture at one diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Gait diameter the report describes.
    pub diameter: f64,
    /// Polynomial cBVI at this diameter.
    pub cbvi_poly: Twist,
    /// Phase-free upper bound on the third-order term (componentwise
    /// nonnegative, zero θ).
    pub bound_vector: Twist,
    /// Half-angle of the arc the worst-case correction can rotate the
    /// displacement through: atan2(‖bound‖, ‖cBVI‖) on (x, y).
    pub max_error_angle: f64,
    /// ‖bound (x,y)‖ / ‖cbvi_poly (x,y)‖.
    pub ratio: f64,
    /// True when the cBVI translation vanishes; angle and ratio are
    /// reported as 0 so downstream serialization stays finite.
    pub degenerate: bool,
}

/// Check that the closed disc of diameter `ell` about `center` stays
/// inside the connection's validity region (axis extremes suffice for
/// an axis-aligned box).
fn check_disc_domain(conn: &LocalConnection, center: ShapePoint, ell: f64) -> Result<()> {
    let r = ell / 2.0;
    for (d1, d2) in [(r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r)] {
        conn.check_domain(ShapePoint::new(center.r1 + d1, center.r2 + d2))?;
    }
    Ok(())
}

/// Entrywise absolute envelope of the connection over the disc.
fn abs_envelope(
    conn: &LocalConnection,
    center: ShapePoint,
    radius: f64,
    opts: &BoundOptions,
) -> Result<ConnectionMatrix> {
    match opts.abs_mode {
        AbsMode::MeanAbs => {
            let mean = conn.mean_over_disc(center, radius, opts.quad_tol)?;
            Ok(ConnectionMatrix::new(mean.cols[0].abs(), mean.cols[1].abs()))
        }
        AbsMode::SupAbs => {
            let mut env = conn.evaluate(center)?;
            env = ConnectionMatrix::new(env.cols[0].abs(), env.cols[1].abs());
            for i in 1..=8 {
                let rho = radius * i as f64 / 8.0;
                for j in 0..64 {
                    let phi = 2.0 * PI * j as f64 / 64.0;
                    let p = ShapePoint::new(center.r1 + rho * phi.cos(), center.r2 + rho * phi.sin());
                    let a = conn.evaluate(p)?;
                    env = ConnectionMatrix::new(
                        Twist::new(
                            env.cols[0].x.max(a.cols[0].x.abs()),
                            env.cols[0].y.max(a.cols[0].y.abs()),
                            env.cols[0].theta.max(a.cols[0].theta.abs()),
                        ),
                        Twist::new(
                            env.cols[1].x.max(a.cols[1].x.abs()),
                            env.cols[1].y.max(a.cols[1].y.abs()),
                            env.cols[1].theta.max(a.cols[1].theta.abs()),
                        ),
                    );
                }
            }
            Ok(env)
        }
    }
}

/// Build a bound report from a precomputed Taylor model (shared by the
/// diameter solver, which reuses one model across many diameters).
fn bound_from_model(
    conn: &LocalConnection,
    model: &QuadraticField,
    center: ShapePoint,
    ell: f64,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let cpoly = cbvi_polynomial(model, ell);
    let envelope = abs_envelope(conn, center, ell / 2.0, opts)?;
    // Max segment-pair response over all phases, componentwise:
    // s = (π/4)·ℓ·|Ā|·[1, 1]ᵀ.
    let s = envelope.abs_row_sums() * (PI / 4.0 * ell);
    let bound = bracket_upper_bound(s, cpoly) * 0.5;
    let bn = bound.translation_norm();
    let cn = cpoly.translation_norm();
    let degenerate = !(cn > 0.0);
    Ok(BoundReport {
        diameter: ell,
        cbvi_poly: cpoly,
        bound_vector: bound,
        max_error_angle: if degenerate { 0.0 } else { bn.atan2(cn) },
        ratio: if degenerate { 0.0 } else { bn / cn },
        degenerate,
    })
}

/// Worst-case third-order bound for circular gaits of diameter `ell`
/// centered at `center`: ½[s, cBVI(ℓ)]ᵤᵦ against the polynomial cBVI,
/// with the error angle and ratio it implies.
pub fn third_order_bound(
    conn: &LocalConnection,
    center: ShapePoint,
    ell: f64,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    if !(ell > 0.0) {
        return Err(Error::InvalidParameter(format!("bound diameter {ell} must be positive")));
    }
    check_disc_domain(conn, center, ell)?;
    let model = taylor_da(conn, center, opts.hessian_step, opts.fd_step)?;
    bound_from_model(conn, &model, center, ell, opts)
}

/// Result of the largest-diameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    /// Largest diameter keeping the bound within the proportion — the
    /// smallest positive margin crossing, for safety, when the margin
    /// is non-monotone; `ell_cap` if the bound never binds; 0 if the
    /// inequality holds nowhere.
    pub ell_star: f64,
    /// Every margin sign change found on the scan, bisected.
    pub crossings: Vec<f64>,
    /// The proportion requested.
    pub proportion: f64,
    /// Upper end of the search range.
    pub ell_cap: f64,
    /// True when the inequality held across the whole range.
    pub never_binds: bool,
    /// True when the inequality held nowhere in the range.
    pub infeasible: bool,
    /// True when the cBVI translation vanished at the cap (margin
    /// comparisons carry no information).
    pub degenerate: bool,
}

/// Largest gait diameter ℓ* ≤ `ell_cap` for which the worst-case
/// third-order bound stays within `proportion` of the polynomial cBVI
/// (in the sense of `opts.comparison`).  The margin is scanned on 256
/// points and each sign change bisected; the smallest positive
/// crossing is returned.
pub fn max_diameter(
    conn: &LocalConnection,
    center: ShapePoint,
    proportion: f64,
    ell_cap: f64,
    opts: &BoundOptions,
) -> Result<DiameterReport> {
    if !(proportion > 0.0) {
        return Err(Error::InvalidParameter(format!("proportion {proportion} must be positive")));
    }
    if !(ell_cap > 0.0) {
        return Err(Error::InvalidParameter(format!("diameter cap {ell_cap} must be positive")));
    }
    check_disc_domain(conn, center, ell_cap)?;
    let model = taylor_da(conn, center, opts.hessian_step, opts.fd_step)?;

    let margin = |ell: f64| -> Result<f64> {
        let report = bound_from_model(conn, &model, center, ell, opts)?;
        let c = report.cbvi_poly;
        let b = report.bound_vector;
        Ok(match opts.comparison {
            ComparisonMode::Norm => proportion * c.translation_norm() - b.translation_norm(),
            ComparisonMode::Componentwise => {
                (proportion * c.x.abs() - b.x).min(proportion * c.y.abs() - b.y)
            }
        })
    };

    const SCAN: usize = 256;
    let mut margins = Vec::with_capacity(SCAN);
    for k in 1..=SCAN {
        margins.push(margin(ell_cap * k as f64 / SCAN as f64)?);
    }

    let mut crossings = Vec::new();
    for k in 1..SCAN {
        let (m0, m1) = (margins[k - 1], margins[k]);
        if (m0 >= 0.0) != (m1 >= 0.0) {
            // Bisect the bracketed sign change.
            let mut lo = ell_cap * k as f64 / SCAN as f64;
            let mut hi = ell_cap * (k + 1) as f64 / SCAN as f64;
            let mut m_lo = m0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let m_mid = margin(mid)?;
                if (m_mid >= 0.0) == (m_lo >= 0.0) {
                    lo = mid;
                    m_lo = m_mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-12 * ell_cap {
                    break;
                }
            }
            crossings.push(0.5 * (lo + hi));
        }
    }

    let degenerate = bound_from_model(conn, &model, center, ell_cap, opts)?.degenerate;
    let all_hold = margins.iter().all(|&m| m >= 0.0);
    let none_hold = margins.iter().all(|&m| m < 0.0);
    let ell_star = if let Some(&first) = crossings.first() {
        first
    } else if all_hold {
        ell_cap
    } else {
        0.0
    };
    Ok(DiameterReport {
        ell_star,
        crossings,
        proportion,
        ell_cap,
        never_binds: all_hold,
        infeasible: none_hold,
        degenerate,
    })
}

/// Error angle of a third-order term against a zero-net-rotation cBVI:
/// atan2(‖third (x,y)‖, ‖cBVI (x,y)‖).  Ground-truth displacements lie
/// on an arc of this half-angle about the cBVI direction.
pub fn error_angle(cbvi: Twist, third: Twist) -> Result<f64> {
    if cbvi.theta.abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "error angle requires a zero-net-rotation gait (cBVI θ = {:.3e}); \
             net-rotation gaits are outside this construction",
            cbvi.theta
        )));
    }
    let cn = cbvi.translation_norm();
    if !(cn > 0.0) {
        return Err(Error::DegenerateGeometry(
            "cBVI translation vanishes; error angle undefined".into(),
        ));
    }
    Ok(third.translation_norm().atan2(cn))
}

/// Distance from a planar point to the arc of radius ‖cbvi (x,y)‖
/// about the origin, centered on the cBVI direction with the given
/// half-angle.
pub fn arc_distance(cbvi: Twist, half_angle: f64, px: f64, py: f64) -> f64 {
    let radius = cbvi.translation_norm();
    let arc_dir = cbvi.y.atan2(cbvi.x);
    let rho = (px * px + py * py).sqrt();
    let dtheta = crate::se2::wrap_angle(py.atan2(px) - arc_dir);
    if dtheta.abs() <= half_angle {
        (rho - radius).abs()
    } else {
        let end = arc_dir + half_angle.copysign(dtheta);
        let (ex, ey) = (radius * end.cos(), radius * end.sin());
        ((px - ex).powi(2) + (py - ey).powi(2)).sqrt()
    }
}
