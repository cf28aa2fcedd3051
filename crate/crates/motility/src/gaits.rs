//! Closed loops in shape space: the circle and square gait families,
//! their exact sampling, and the four-quarter segmentation feeding the
//! segment-composition displacement estimate.
//!
//! Both families are period-normalized to `t ∈ [0, 1)` (all integrals
//! here are invariant to time reparameterization) and carry a starting
//! phase `Φ`:
//!
//! * **circle** — `r(t) = center + (ℓ/2)·(cos(2πt + Φ), sin(2πt + Φ))`,
//! * **square** — axis-aligned, side `s`, traversed counterclockwise at
//!   uniform speed `4s`; `Φ = 0` starts at the midpoint of the right
//!   edge (mirroring the circle convention) and `Φ` advances the start
//!   point along the perimeter by the fraction `Φ/2π`.
//!
//! Reversed (clockwise) traversal is available via [`Gait::reversed`].
//! Square corners are genuine kinks: [`Gait::breakpoints`] exposes them
//! so quadrature can split panels there, and the velocity *at* a corner
//! is defined as the incoming edge's velocity (a measure-zero choice
//! that affects no integral).

use crate::connection::{LocalConnection, ShapePoint};
use crate::error::{Error, Result};
use crate::quad::adaptive_line;
use crate::se2::Twist;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The two supported loop shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaitKind {
    Circle,
    Square,
}

/// A closed parametric loop in shape space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gait {
    pub kind: GaitKind,
    pub center: ShapePoint,
    /// Circle: diameter. Square: side length.
    pub size: f64,
    /// Starting phase Φ, radians in [0, 2π).
    pub phase: f64,
    /// +1 counterclockwise (default), −1 clockwise.
    pub orientation: i8,
}

/// Line integrals of `A·ṙ` over the four quarters of a gait.
///
/// The quarters are chosen so opposite segments have antiparallel mean
/// tangents: natural parameter quarters for circles, whole edges for
/// squares.  Their sum equals the full-loop body-velocity integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentIntegrals {
    pub a: Twist,
    pub b: Twist,
    pub c: Twist,
    pub d: Twist,
}

impl SegmentIntegrals {
    pub fn sum(&self) -> Twist {
        self.a + self.b + self.c + self.d
    }

    pub fn as_array(&self) -> [Twist; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

impl Gait {
    /// Circular gait of the given diameter.
    pub fn circle(center: ShapePoint, diameter: f64, phase: f64) -> Gait {
        assert!(diameter > 0.0, "gait diameter must be positive");
        Gait {
            kind: GaitKind::Circle,
            center,
            size: diameter,
            phase: phase.rem_euclid(2.0 * PI),
            orientation: 1,
        }
    }

    /// Axis-aligned square gait of the given side length.
    pub fn square(center: ShapePoint, side: f64, phase: f64) -> Gait {
        assert!(side > 0.0, "gait side must be positive");
        Gait {
            kind: GaitKind::Square,
            center,
            size: side,
            phase: phase.rem_euclid(2.0 * PI),
            orientation: 1,
        }
    }

    /// The same loop traversed in the opposite direction from the same
    /// start point.
    pub fn reversed(mut self) -> Gait {
        self.orientation = -self.orientation;
        self
    }

    /// Parse a CLI gait specification: `circle:cx,cy,l,phi` or
    /// `square:cx,cy,s,phi` (phi in radians).
    pub fn from_spec(spec: &str) -> Result<Gait> {
        let bad = |message: String| Error::Parse { line: 0, message };
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad(format!("gait spec '{spec}' missing ':' separator")))?;
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 4 {
            return Err(bad(format!(
                "gait spec needs 4 comma-separated numbers (cx,cy,size,phi), got {}",
                parts.len()
            )));
        }
        let mut vals = [0.0; 4];
        for (i, p) in parts.iter().enumerate() {
            vals[i] = p
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("gait spec number '{p}': {e}")))?;
        }
        let center = ShapePoint::new(vals[0], vals[1]);
        if vals[2] <= 0.0 {
            return Err(bad(format!("gait size must be positive, got {}", vals[2])));
        }
        match kind {
            "circle" => Ok(Gait::circle(center, vals[2], vals[3])),
            "square" => Ok(Gait::square(center, vals[2], vals[3])),
            other => Err(bad(format!("unknown gait kind '{other}' (expected circle|square)"))),
        }
    }

    /// Shape position and velocity at time `t` (taken mod 1).
    pub fn sample(&self, t: f64) -> (ShapePoint, ShapePoint) {
        let tau = t.rem_euclid(1.0);
        let sign = self.orientation as f64;
        match self.kind {
            GaitKind::Circle => {
                let radius = self.size / 2.0;
                let angle = self.phase + sign * 2.0 * PI * tau;
                let (s, c) = angle.sin_cos();
                let r = ShapePoint::new(self.center.r1 + radius * c, self.center.r2 + radius * s);
                let rdot = ShapePoint::new(-s, c).scale(sign * 2.0 * PI * radius);
                (r, rdot)
            }
            GaitKind::Square => {
                let s = self.size;
                let perimeter = 4.0 * s;
                // Perimeter coordinate of the ccw parameterization.
                let p = (self.phase / (2.0 * PI) + sign * tau).rem_euclid(1.0) * perimeter;
                let (rel, dir) = square_point(s, p);
                let r = self.center.add(rel);
                let rdot = dir.scale(sign * perimeter);
                (r, rdot)
            }
        }
    }

    /// Times in (0, 1) where the velocity is discontinuous (square
    /// corners); empty for circles.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            GaitKind::Circle => Vec::new(),
            GaitKind::Square => {
                let sign = self.orientation as f64;
                let mut ts: Vec<f64> = (0..4)
                    .map(|k| {
                        // Corner k sits at perimeter fraction (2k+1)/8.
                        let frac = (2.0 * k as f64 + 1.0) / 8.0;
                        (sign * (frac - self.phase / (2.0 * PI))).rem_euclid(1.0)
                    })
                    .filter(|&t| t > 1e-14 && t < 1.0 - 1e-14)
                    .collect();
                ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ts
            }
        }
    }

    /// Unsigned area enclosed by the loop.
    pub fn area(&self) -> f64 {
        match self.kind {
            GaitKind::Circle => PI * self.size * self.size / 4.0,
            GaitKind::Square => self.size * self.size,
        }
    }

    /// Diameter of the area-equivalent circle: the circle's own
    /// diameter, or `side·2/√π` for squares.  Size measure used by the
    /// error-bound machinery, which models gaits as discs.
    pub fn characteristic_diameter(&self) -> f64 {
        match self.kind {
            GaitKind::Circle => self.size,
            GaitKind::Square => self.size * 2.0 / PI.sqrt(),
        }
    }

    /// Quarter boundaries in time: corner-aligned for squares (each
    /// quarter spans exactly one edge), natural quarters for circles.
    fn quarter_boundaries(&self) -> [f64; 5] {
        let start = match self.kind {
            GaitKind::Circle => 0.0,
            // First corner at or after t = 0 (corners are ¼ apart, so
            // quarters delimited here cover one full edge each).
            GaitKind::Square => {
                let bps = self.breakpoints();
                bps.first().copied().unwrap_or(0.0)
            }
        };
        [start, start + 0.25, start + 0.5, start + 0.75, start + 1.0]
    }
}

/// Point and unit direction on the ccw square of side `s` centered at
/// the origin at perimeter coordinate `p ∈ [0, 4s)`; `p = 0` is the
/// right-edge midpoint heading +r₂.  Intervals are closed on the right
/// so a corner inherits the incoming edge's direction.
fn square_point(s: f64, p: f64) -> (ShapePoint, ShapePoint) {
    let h = s / 2.0;
    if p <= 0.5 * s {
        (ShapePoint::new(h, p), ShapePoint::new(0.0, 1.0))
    } else if p <= 1.5 * s {
        (ShapePoint::new(h - (p - 0.5 * s), h), ShapePoint::new(-1.0, 0.0))
    } else if p <= 2.5 * s {
        (ShapePoint::new(-h, h - (p - 1.5 * s)), ShapePoint::new(0.0, -1.0))
    } else if p <= 3.5 * s {
        (ShapePoint::new(-h + (p - 2.5 * s), -h), ShapePoint::new(1.0, 0.0))
    } else {
        (ShapePoint::new(h, -h + (p - 3.5 * s)), ShapePoint::new(0.0, 1.0))
    }
}

/// Line integrals of `A(r(t))·ṙ(t)` over the four quarters of `gait`,
/// each refined to `quad_tol`.
pub fn quarter_segments(
    conn: &LocalConnection,
    gait: &Gait,
    quad_tol: f64,
) -> Result<SegmentIntegrals> {
    let bounds = gait.quarter_boundaries();
    let integrand = |t: f64| -> Result<Twist> {
        let (r, rdot) = gait.sample(t);
        Ok(conn.evaluate(r)?.apply(rdot))
    };
    let mut segs = [Twist::ZERO; 4];
    for (i, seg) in segs.iter_mut().enumerate() {
        // Windows may extend past t = 1; sample() wraps, and corner
        // breakpoints are only at window ends by construction.
        *seg = adaptive_line(integrand, bounds[i], bounds[i + 1], &[], quad_tol)?;
    }
    Ok(SegmentIntegrals { a: segs[0], b: segs[1], c: segs[2], d: segs[3] })
}
