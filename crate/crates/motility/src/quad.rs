//! Numerical integration: Gauss–Legendre rules plus self-refining line,
//! disc, and rectangle integrals.
//!
//! All adaptive routines follow the same protocol: evaluate at some
//! resolution, double it, and accept once two successive levels agree
//! componentwise to the requested tolerance (the returned value is the
//! finer one).  If the cap on refinement is reached first they report
//! [`Error::NonConvergence`] with the best agreement achieved, so
//! callers can distinguish "noisy integrand" from "wrong answer".
//!
//! Disc integrals pair a radial Gauss rule with *uniformly spaced*
//! angular nodes: the trapezoid rule is spectrally accurate for smooth
//! periodic integrands, and an even node count preserves antipodal
//! symmetry of the rule — integrals of odd fields over centered discs
//! come out zero to rounding, not just to tolerance.

use crate::error::{Error, Result};

/// Values that can be accumulated by a quadrature rule: anything that
/// forms a vector space with a componentwise max-norm.
pub trait Accumulate: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    /// Largest absolute componentwise difference — the convergence metric.
    fn max_abs_diff(self, other: Self) -> f64;
}

impl Accumulate for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn max_abs_diff(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl Accumulate for crate::se2::Twist {
    fn zero() -> Self {
        crate::se2::Twist::ZERO
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn max_abs_diff(self, other: Self) -> f64 {
        (self - other).max_abs()
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial from the
/// Chebyshev-like initial guess; accurate to machine precision for the
/// orders used here (n ≤ 1024).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite fixed-resolution Gauss rule: `panels` × GL(8) over [a, b].
fn line_fixed<T, F>(f: &F, a: f64, b: f64, panels: usize) -> Result<T>
where
    T: Accumulate,
    F: Fn(f64) -> Result<T>,
{
    let (nodes, weights) = gauss_legendre(8);
    let h = (b - a) / panels as f64;
    let mut total = T::zero();
    for p in 0..panels {
        let left = a + p as f64 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            let t = left + 0.5 * h * (x + 1.0);
            total = total.add(f(t)?.scale(0.5 * h * w));
        }
    }
    Ok(total)
}

/// Integral of `f` over [a, b], refined until two successive panel
/// doublings agree to `tol`.
///
/// `breakpoints` lists parameter values where the integrand may lose
/// smoothness (e.g. gait corners); the interval is pre-split there so
/// Gauss panels never straddle a kink and the rule keeps full order.
pub fn adaptive_line<T, F>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> Result<T>
where
    T: Accumulate,
    F: Fn(f64) -> Result<T>,
{
    if !(b > a) {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{a}, {b}] is empty"
        )));
    }
    let mut cuts = vec![a];
    for &t in breakpoints {
        if t > a + 1e-14 && t < b - 1e-14 {
            cuts.push(t);
        }
    }
    cuts.push(b);
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-14);

    let segment_total = |panels: usize| -> Result<T> {
        let mut total = T::zero();
        for seg in cuts.windows(2) {
            total = total.add(line_fixed(&f, seg[0], seg[1], panels)?);
        }
        Ok(total)
    };

    let mut panels = 1;
    let mut coarse = segment_total(panels)?;
    let mut achieved = f64::INFINITY;
    for _ in 0..14 {
        panels *= 2;
        let fine = segment_total(panels)?;
        achieved = fine.max_abs_diff(coarse);
        if achieved < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NonConvergence { achieved, required: tol })
}

/// Fixed-resolution polar rule on a disc: `n_r` radial Gauss nodes ×
/// `n_a` uniform angular nodes (midpoint offsets).
fn disc_fixed<T, F>(f: &F, cx: f64, cy: f64, radius: f64, n_r: usize, n_a: usize) -> Result<T>
where
    T: Accumulate,
    F: Fn(f64, f64) -> Result<T>,
{
    let (nodes, weights) = gauss_legendre(n_r);
    let da = 2.0 * std::f64::consts::PI / n_a as f64;
    let mut total = T::zero();
    for (x, w) in nodes.iter().zip(&weights) {
        let rho = 0.5 * radius * (x + 1.0);
        let w_r = 0.5 * radius * w * rho; // includes the polar Jacobian ρ
        for j in 0..n_a {
            let phi = da * (j as f64 + 0.5);
            total = total.add(f(cx + rho * phi.cos(), cy + rho * phi.sin())?.scale(w_r * da));
        }
    }
    Ok(total)
}

/// Integral of `f(x, y)` over the disc of given center and radius,
/// refined until two successive node doublings agree to `tol`.
pub fn adaptive_disc<T, F>(f: F, cx: f64, cy: f64, radius: f64, tol: f64) -> Result<T>
where
    T: Accumulate,
    F: Fn(f64, f64) -> Result<T>,
{
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("disc radius {radius} must be positive")));
    }
    let mut n_r = 4;
    let mut coarse = disc_fixed(&f, cx, cy, radius, n_r, 2 * n_r)?;
    let mut achieved = f64::INFINITY;
    for _ in 0..8 {
        n_r *= 2;
        let fine = disc_fixed(&f, cx, cy, radius, n_r, 2 * n_r)?;
        achieved = fine.max_abs_diff(coarse);
        if achieved < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NonConvergence { achieved, required: tol })
}

/// Fixed-resolution tensor Gauss rule on an axis-aligned rectangle.
fn rect_fixed<T, F>(f: &F, x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> Result<T>
where
    T: Accumulate,
    F: Fn(f64, f64) -> Result<T>,
{
    let (nodes, weights) = gauss_legendre(n);
    let hx = 0.5 * (x1 - x0);
    let hy = 0.5 * (y1 - y0);
    let mut total = T::zero();
    for (xi, wi) in nodes.iter().zip(&weights) {
        let x = x0 + hx * (xi + 1.0);
        for (yj, wj) in nodes.iter().zip(&weights) {
            let y = y0 + hy * (yj + 1.0);
            total = total.add(f(x, y)?.scale(hx * hy * wi * wj));
        }
    }
    Ok(total)
}

/// Integral of `f(x, y)` over [x0, x1] × [y0, y1], refined until two
/// successive node doublings agree to `tol`.
pub fn adaptive_rect<T, F>(f: F, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64) -> Result<T>
where
    T: Accumulate,
    F: Fn(f64, f64) -> Result<T>,
{
    if !(x1 > x0) || !(y1 > y0) {
        return Err(Error::InvalidParameter(format!(
            "rectangle [{x0}, {x1}] × [{y0}, {y1}] is empty"
        )));
    }
    let mut n = 4;
    let mut coarse = rect_fixed(&f, x0, x1, y0, y1, n)?;
    let mut achieved = f64::INFINITY;
    for _ in 0..8 {
        n *= 2;
        let fine = rect_fixed(&f, x0, x1, y0, y1, n)?;
        achieved = fine.max_abs_diff(coarse);
        if achieved < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::NonConvergence { achieved, required: tol })
}
