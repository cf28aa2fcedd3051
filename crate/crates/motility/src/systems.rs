//! Concrete locomoting systems: differential-drive cart, three-link
//! low-Reynolds swimmer, and connections tabulated on a grid.
//!
//! # Differential drive
//! Shape variables are the two wheel rotation angles.  The connection
//! is constant — equal wheel rates drive forward, opposite rates turn
//! in place — so its exterior derivative vanishes and every displacement
//! comes from the columns' failure to commute.
//!
//! # Three-link swimmer
//! Shape variables are the two joint angles (zero when straight,
//! positive counterclockwise).  At each shape the swimmer's body
//! velocity follows from resistive force theory: each slender link
//! feels drag linear in its local velocity, with separate tangential
//! and normal coefficients, integrated in closed form along the link
//! (exact for rigid straight links); requiring zero net force and
//! moment on the swimmer yields a 3×3 linear solve per evaluation.
//! The body frame is the middle link's center frame.
//!
//! # Tabulated fields
//! [`tabulated_connection`] loads a plain-text grid file and evaluates
//! by bilinear interpolation (exact for fields up to bilinear, grid
//! nodes reproduced exactly).  Its Jacobian is the interpolant's own
//! derivative, which is only piecewise-smooth: constant in each cell
//! along the differentiated axis, discontinuous across cell boundaries.
//! The file format (see [`write_tabulated`]):
//!
//! ```text
//! r1_min r1_max n1
//! r2_min r2_max n2
//! A11 A12 A21 A22 A31 A32     ← n1·n2 data rows: row-major over the
//! ...                            grid (outer index r1, inner r2); the
//!                                six entries are rows x, y, θ of the
//!                                3×2 matrix, each as (column 1, column 2)
//! ```
//!
//! `#`-prefixed lines and blank lines are ignored; `n1, n2 ≥ 2`; grid
//! bounds must be strictly increasing.  The declared box becomes the
//! connection's validity region.

use crate::connection::{ConnectionMatrix, LocalConnection, ShapePoint, ValidityBox};
use crate::error::{Error, Result};
use crate::se2::Twist;
use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3};
use std::path::Path;

/// Constant connection of a differential-drive cart.
///
/// `wheel_radius` ρ and `half_width` w (half the axle track) give
///
/// ```text
///        ⎡  ρ/2      ρ/2  ⎤
///  A  =  ⎢   0        0   ⎥      ξ = A·ṙ
///        ⎣ −ρ/(2w)  ρ/(2w)⎦
/// ```
///
/// so shape rate (1, 1) drives straight ahead at ρ and (−1, 1) turns in
/// place at ρ/w.  The field is shape-independent and carries an
/// analytic (zero) Jacobian; there is no validity restriction.
pub fn diffdrive_connection(wheel_radius: f64, half_width: f64) -> LocalConnection {
    assert!(
        wheel_radius > 0.0 && half_width > 0.0,
        "diffdrive parameters must be positive"
    );
    let col1 = Twist::new(wheel_radius / 2.0, 0.0, -wheel_radius / (2.0 * half_width));
    let col2 = Twist::new(wheel_radius / 2.0, 0.0, wheel_radius / (2.0 * half_width));
    LocalConnection::new("diffdrive", move |_| Ok(ConnectionMatrix::new(col1, col2)))
        .with_jacobian(|_| Ok([ConnectionMatrix::ZERO, ConnectionMatrix::ZERO]))
}

/// Parameters of the three-link swimmer.
#[derive(Debug, Clone, Copy)]
pub struct PurcellParams {
    /// Length of each of the three equal links.
    pub link_length: f64,
    /// Tangential drag coefficient per unit length.
    pub tangential_drag: f64,
    /// Normal-to-tangential drag ratio (> 1; 2 is the classical
    /// slender-body value).
    pub drag_ratio: f64,
}

impl Default for PurcellParams {
    fn default() -> Self {
        PurcellParams { link_length: 1.0, tangential_drag: 1.0, drag_ratio: 2.0 }
    }
}

/// How far the joint angles may go: near-folded shapes are excluded.
pub const PURCELL_JOINT_LIMIT: f64 = std::f64::consts::PI - 0.1;

/// Three-link swimmer connection from resistive force theory.
///
/// Shape (r₁, r₂) = (proximal, distal) joint angle; body frame = middle
/// link center.  Each evaluation assembles the total drag wrench as a
/// linear function of (ξ, ṙ) and solves the zero-net-wrench condition
/// `B·ξ + C·ṙ = 0` for the two columns of `A = −B⁻¹C`.  The solve is
/// guarded by a singular-value condition estimate (the matrix is well
/// conditioned everywhere inside the joint-limit box).
pub fn purcell_connection(params: PurcellParams) -> LocalConnection {
    assert!(
        params.link_length > 0.0 && params.tangential_drag > 0.0 && params.drag_ratio > 1.0,
        "swimmer parameters out of range (need length > 0, drag > 0, ratio > 1)"
    );
    LocalConnection::new("purcell", move |p: ShapePoint| purcell_matrix(params, p))
        .with_validity(ValidityBox::symmetric(PURCELL_JOINT_LIMIT))
}

/// Planar cross product (z component of the 3-D cross product).
fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn perp(v: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

/// Drag wrench (force, torque about the body origin) on one rigid link:
/// direction `u_hat`, center `c`, center velocity `v`, spin `omega`.
///
/// Closed-form integral of the resistive line density over the link:
/// the uniform part of the velocity yields a pure force through the
/// center; the spin contributes only a torque, −(L³/12)·t·ξ·ω.
fn link_wrench(
    params: PurcellParams,
    u_hat: Vector2<f64>,
    c: Vector2<f64>,
    v: Vector2<f64>,
    omega: f64,
) -> (Vector2<f64>, f64) {
    let l = params.link_length;
    let t = params.tangential_drag;
    let xi = params.drag_ratio * t;
    let n_hat = perp(u_hat);
    let force = -(l * t * v.dot(&u_hat)) * u_hat - (l * xi * v.dot(&n_hat)) * n_hat;
    let torque = cross(c, force) - l.powi(3) / 12.0 * xi * omega;
    (force, torque)
}

/// Total drag wrench on the swimmer for body velocity `xi` and joint
/// rates `rdot`, as a function linear in both.
fn total_wrench(
    params: PurcellParams,
    p: ShapePoint,
    xi: Vector3<f64>,
    rdot: Vector2<f64>,
) -> Vector3<f64> {
    let l = params.link_length;
    let j1 = Vector2::new(-l / 2.0, 0.0);
    let j2 = Vector2::new(l / 2.0, 0.0);
    let u1 = Vector2::new(p.r1.cos(), p.r1.sin());
    let u2 = Vector2::new(p.r2.cos(), p.r2.sin());
    let (vx, vy, om) = (xi[0], xi[1], xi[2]);

    // Velocity of a point fixed at `q` in the body frame.
    let rigid = |q: Vector2<f64>| Vector2::new(vx - om * q.y, vy + om * q.x);

    // Middle link: centered at the origin, along +x.
    let (f_mid, t_mid) = link_wrench(params, Vector2::new(1.0, 0.0), Vector2::zeros(), rigid(Vector2::zeros()), om);

    // Proximal link: extends backward from j1, direction angle π + r₁
    // (drag depends on the direction only through its line, so u(r₁)
    // serves); center j1 − (L/2)u(r₁), extra spin ṙ₁ about j1.
    let c1 = j1 - (l / 2.0) * u1;
    let v1 = rigid(c1) + rdot[0] * perp(c1 - j1);
    let (f1, t1) = link_wrench(params, u1, c1, v1, om + rdot[0]);

    // Distal link: extends forward from j2, direction r₂.
    let c2 = j2 + (l / 2.0) * u2;
    let v2 = rigid(c2) + rdot[1] * perp(c2 - j2);
    let (f2, t2) = link_wrench(params, u2, c2, v2, om + rdot[1]);

    Vector3::new(
        f_mid.x + f1.x + f2.x,
        f_mid.y + f1.y + f2.y,
        t_mid + t1 + t2,
    )
}

fn purcell_matrix(params: PurcellParams, p: ShapePoint) -> Result<ConnectionMatrix> {
    // Assemble B (wrench per unit body velocity) and C (wrench per unit
    // joint rate) columnwise from the linear wrench map.
    let mut b = Matrix3::zeros();
    for i in 0..3 {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        b.set_column(i, &total_wrench(params, p, e, Vector2::zeros()));
    }
    let mut c = Matrix3x2::zeros();
    for i in 0..2 {
        let mut e = Vector2::zeros();
        e[i] = 1.0;
        c.set_column(i, &total_wrench(params, p, Vector3::zeros(), e));
    }

    let svs = b.singular_values();
    let (s_max, s_min) = (svs.max(), svs.min());
    if !(s_min > 0.0) || s_max / s_min > 1e10 {
        return Err(Error::SingularSolve {
            condition: if s_min > 0.0 { s_max / s_min } else { f64::INFINITY },
        });
    }
    let lu = b.lu();
    let mut cols = [Twist::ZERO; 2];
    for (i, col) in cols.iter_mut().enumerate() {
        // Zero net wrench: B·ξ + C·ṙ = 0 ⇒ ξ = −B⁻¹C·ṙ.
        let rhs = -c.column(i);
        let sol = lu.solve(&rhs.clone_owned()).ok_or(Error::SingularSolve {
            condition: s_max / s_min,
        })?;
        *col = Twist::new(sol[0], sol[1], sol[2]);
    }
    Ok(ConnectionMatrix { cols })
}

/// Residual of the zero-net-wrench condition for a solved body velocity
/// — a self-check hook: exact solutions return (numerically) zero.
pub fn purcell_wrench_residual(params: PurcellParams, p: ShapePoint, rdot: ShapePoint) -> Result<f64> {
    let a = purcell_matrix(params, p)?;
    let xi = a.body_velocity(rdot);
    let w = total_wrench(
        params,
        p,
        Vector3::new(xi.x, xi.y, xi.theta),
        Vector2::new(rdot.r1, rdot.r2),
    );
    Ok(w.amax())
}

/// Write a connection sampled on an `n1 × n2` grid over `bbox` in the
/// tabulated-field text format (see the module docs for the grammar).
pub fn write_tabulated(
    conn: &LocalConnection,
    bbox: ValidityBox,
    n1: usize,
    n2: usize,
    path: &Path,
) -> Result<()> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidParameter(format!(
            "tabulation grid must be at least 2×2, got {n1}×{n2}"
        )));
    }
    if !(bbox.r1_max > bbox.r1_min) || !(bbox.r2_max > bbox.r2_min) {
        return Err(Error::InvalidParameter("tabulation box must have positive extent".into()));
    }
    let mut out = String::new();
    out.push_str("# tabulated local connection: A11 A12 A21 A22 A31 A32 per grid node\n");
    out.push_str(&format!("{:.17e} {:.17e} {n1}\n", bbox.r1_min, bbox.r1_max));
    out.push_str(&format!("{:.17e} {:.17e} {n2}\n", bbox.r2_min, bbox.r2_max));
    for i in 0..n1 {
        let r1 = bbox.r1_min + (bbox.r1_max - bbox.r1_min) * i as f64 / (n1 - 1) as f64;
        for j in 0..n2 {
            let r2 = bbox.r2_min + (bbox.r2_max - bbox.r2_min) * j as f64 / (n2 - 1) as f64;
            let a = conn.evaluate(ShapePoint::new(r1, r2))?;
            out.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}\n",
                a.cols[0].x, a.cols[1].x, a.cols[0].y, a.cols[1].y, a.cols[0].theta, a.cols[1].theta
            ));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Grid data behind a tabulated connection.
#[derive(Debug)]
struct TabulatedGrid {
    r1_min: f64,
    r1_max: f64,
    n1: usize,
    r2_min: f64,
    r2_max: f64,
    n2: usize,
    /// Row-major (outer r1, inner r2) matrices at the nodes.
    values: Vec<ConnectionMatrix>,
}

impl TabulatedGrid {
    fn spacing(&self) -> (f64, f64) {
        (
            (self.r1_max - self.r1_min) / (self.n1 - 1) as f64,
            (self.r2_max - self.r2_min) / (self.n2 - 1) as f64,
        )
    }

    /// Cell index and local coordinates in [0, 1]² of a shape point.
    fn locate(&self, p: ShapePoint) -> (usize, usize, f64, f64) {
        let (h1, h2) = self.spacing();
        let clamp = |x: f64, n: usize| -> (usize, f64) {
            let idx = (x.floor() as isize).clamp(0, n as isize - 2) as usize;
            (idx, x - idx as f64)
        };
        let (i, u) = clamp((p.r1 - self.r1_min) / h1, self.n1);
        let (j, v) = clamp((p.r2 - self.r2_min) / h2, self.n2);
        (i, j, u, v)
    }

    fn node(&self, i: usize, j: usize) -> ConnectionMatrix {
        self.values[i * self.n2 + j]
    }

    /// Corner values of cell (i, j): (a00, a10, a01, a11) by (r1, r2).
    fn cell(&self, i: usize, j: usize) -> [ConnectionMatrix; 4] {
        [self.node(i, j), self.node(i + 1, j), self.node(i, j + 1), self.node(i + 1, j + 1)]
    }
}

fn lerp2(corners: &[ConnectionMatrix; 4], u: f64, v: f64) -> ConnectionMatrix {
    use crate::quad::Accumulate;
    let [a00, a10, a01, a11] = *corners;
    a00.scale((1.0 - u) * (1.0 - v))
        .add(a10.scale(u * (1.0 - v)))
        .add(a01.scale((1.0 - u) * v))
        .add(a11.scale(u * v))
}

/// Load a tabulated connection from the plain-text grid format.
///
/// Evaluation is bilinear within each cell; the Jacobian is the
/// interpolant's derivative (piecewise-smooth: discontinuous across
/// cell boundaries).  The declared grid box is the validity region.
pub fn tabulated_connection(path: &Path) -> Result<LocalConnection> {
    let text = std::fs::read_to_string(path)?;
    let grid = parse_tabulated(&text)?;
    let bbox = ValidityBox::new(grid.r1_min, grid.r1_max, grid.r2_min, grid.r2_max);
    let grid = std::sync::Arc::new(grid);
    let grid_jac = grid.clone();
    let name = format!("tabulated:{}", path.display());
    Ok(LocalConnection::new(name, move |p: ShapePoint| {
        let (i, j, u, v) = grid.locate(p);
        Ok(lerp2(&grid.cell(i, j), u, v))
    })
    .with_jacobian(move |p: ShapePoint| {
        use crate::quad::Accumulate;
        let (i, j, u, v) = grid_jac.locate(p);
        let [a00, a10, a01, a11] = grid_jac.cell(i, j);
        let (h1, h2) = grid_jac.spacing();
        // ∂/∂r1 of the bilinear patch: blend of the two r1-differences.
        let d1 = a10
            .add(a00.scale(-1.0))
            .scale((1.0 - v) / h1)
            .add(a11.add(a01.scale(-1.0)).scale(v / h1));
        let d2 = a01
            .add(a00.scale(-1.0))
            .scale((1.0 - u) / h2)
            .add(a11.add(a10.scale(-1.0)).scale(u / h2));
        Ok([d1, d2])
    })
    .with_validity(bbox))
}

fn parse_tabulated(text: &str) -> Result<TabulatedGrid> {
    // Meaningful lines with their 1-based line numbers for error reports.
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.len() < 2 {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "expected two header lines (r_min r_max n) before data".into(),
        });
    }

    let parse_header = |(line, content): (usize, &str)| -> Result<(f64, f64, usize)> {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("header needs 'min max count', got {} fields", fields.len()),
            });
        }
        let min: f64 = fields[0]
            .parse()
            .map_err(|e| Error::Parse { line, message: format!("bad min '{}': {e}", fields[0]) })?;
        let max: f64 = fields[1]
            .parse()
            .map_err(|e| Error::Parse { line, message: format!("bad max '{}': {e}", fields[1]) })?;
        let n: usize = fields[2]
            .parse()
            .map_err(|e| Error::Parse { line, message: format!("bad count '{}': {e}", fields[2]) })?;
        if !(max > min) {
            return Err(Error::Parse {
                line,
                message: format!("grid bounds must increase, got [{min}, {max}]"),
            });
        }
        if n < 2 {
            return Err(Error::Parse { line, message: format!("grid needs ≥ 2 nodes per axis, got {n}") });
        }
        Ok((min, max, n))
    };

    let (r1_min, r1_max, n1) = parse_header(lines[0])?;
    let (r2_min, r2_max, n2) = parse_header(lines[1])?;

    let data = &lines[2..];
    if data.len() != n1 * n2 {
        return Err(Error::Parse {
            line: lines.get(1).map(|&(l, _)| l).unwrap_or(0),
            message: format!("expected {} data rows ({n1}×{n2}), found {}", n1 * n2, data.len()),
        });
    }
    let mut values = Vec::with_capacity(n1 * n2);
    for &(line, content) in data {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line,
                message: format!("data row needs 6 entries (A11 A12 A21 A22 A31 A32), got {}", fields.len()),
            });
        }
        let mut e = [0.0; 6];
        for (k, f) in fields.iter().enumerate() {
            e[k] = f
                .parse::<f64>()
                .map_err(|err| Error::Parse { line, message: format!("bad number '{f}': {err}") })?;
        }
        values.push(ConnectionMatrix::new(
            Twist::new(e[0], e[2], e[4]),
            Twist::new(e[1], e[3], e[5]),
        ));
    }
    Ok(TabulatedGrid { r1_min, r1_max, n1, r2_min, r2_max, n2, values })
}
