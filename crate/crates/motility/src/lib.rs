//! Displacement estimates and error bounds for planar locomoting systems.
//!
//! A kinematic locomoting system — a differential-drive cart, a
//! three-link swimmer — is described by a **local connection** `A(r)`:
//! a 3×2 matrix field over a two-dimensional shape space that maps
//! shape velocity `ṙ` to body velocity `ξ = A(r)·ṙ` in se(2).  Driving
//! the shape around a closed loop (a *gait*) produces a net rigid-body
//! displacement; this crate computes that displacement several ways and
//! quantifies how far the cheap estimates can be trusted:
//!
//! * [`estimators::ground_truth`] — adaptive product integration of the
//!   exact reconstruction equation (the reference answer),
//! * [`estimators::bvi`] / [`estimators::cbvi`] — body-velocity
//!   integral and its curvature-corrected form, evaluated by adaptive
//!   surface quadrature over the enclosed region,
//! * [`estimators::third_order_term`] — the leading non-area correction,
//!   restoring third-order accuracy in the gait diameter,
//! * [`estimators::segment_bch_estimate`] — Baker–Campbell–Hausdorff
//!   composition of four quarter-gait strokes,
//! * [`bounds`] — a priori third-order error bounds, worst-case heading
//!   of the error, and the largest gait diameter a bound certifies,
//! * [`harness`] — batch sweeps over gait families with CSV/JSON export,
//! * [`render`] — deterministic SVG pictures of shape space and the
//!   reconstructed trajectories.
//!
//! Built-in systems live in [`systems`] (differential drive, three-link
//! low-Reynolds swimmer, tabulated fields); gait families in [`gaits`].
//!
//! ```
//! use motility::{gaits::Gait, systems, estimators::{self, EvalConfig}};
//! use motility::connection::ShapePoint;
//!
//! let system = systems::diffdrive_connection(1.0, 1.0);
//! let gait = Gait::circle(ShapePoint::ORIGIN, 0.2, 0.0);
//! let report = estimators::evaluate_all(&system, &gait, &EvalConfig::default()).unwrap();
//! assert!(report.errors.corrected < 1e-4); // cBVI + third-order correction
//! ```

pub mod bounds;
pub mod connection;
pub mod error;
pub mod estimators;
pub mod gaits;
pub mod harness;
pub mod quad;
pub mod render;
pub mod se2;
pub mod systems;

pub use connection::{ConnectionMatrix, LocalConnection, ShapePoint};
pub use error::{Error, Result};
pub use se2::{bch_truncate, bracket, Pose, Twist};
