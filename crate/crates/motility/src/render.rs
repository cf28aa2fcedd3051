//! Self-contained SVG renderers.
//!
//! Three figures: a two-segment motion compared against its series
//! estimates ([`bch_demo_svg`]), the swept gait loops drawn in shape
//! space ([`shape_space_svg`]), and the world-frame displacement
//! picture — integrated trajectories, estimate endpoints, and the
//! worst-case arc each diameter's bound admits
//! ([`trajectories_svg`]).
//!
//! Rendering is a pure function of its inputs: identical datasets
//! produce byte-identical SVG.  Dataset figures embed the config hash
//! as a leading comment so a figure can be traced to the sweep that
//! produced it.

use crate::error::{Error, Result};
use crate::harness::{GaitFamily, SweepDataset};
use crate::se2::{bch_truncate, Pose, Twist};
use std::fmt::Write as _;

const CANVAS: f64 = 720.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Axis-aligned world-coordinate extent of everything a figure draws.
struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn new() -> Bounds {
        Bounds {
            min_x: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            min_y: f64::INFINITY,
            max_y: f64::NEG_INFINITY,
        }
    }

    fn include(&mut self, x: f64, y: f64) {
        self.min_x = self.min_x.min(x);
        self.max_x = self.max_x.max(x);
        self.min_y = self.min_y.min(y);
        self.max_y = self.max_y.max(y);
    }
}

/// Affine map from world coordinates (y up) to canvas pixels (y down).
struct Map {
    scale: f64,
    min_x: f64,
    max_y: f64,
    width: f64,
    height: f64,
}

impl Map {
    fn from(b: &Bounds) -> Map {
        let ex = (b.max_x - b.min_x).max(1e-12);
        let ey = (b.max_y - b.min_y).max(1e-12);
        let scale = (CANVAS - 2.0 * MARGIN) / ex.max(ey);
        Map {
            scale,
            min_x: b.min_x,
            max_y: b.max_y,
            width: ex * scale + 2.0 * MARGIN,
            height: ey * scale + 2.0 * MARGIN,
        }
    }

    fn x(&self, wx: f64) -> f64 {
        MARGIN + (wx - self.min_x) * self.scale
    }

    fn y(&self, wy: f64) -> f64 {
        MARGIN + (self.max_y - wy) * self.scale
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

fn svg_open(out: &mut String, map: &Map) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\">",
        fmt(map.width),
        fmt(map.height),
        fmt(map.width),
        fmt(map.height),
    );
}

fn dot(out: &mut String, map: &Map, x: f64, y: f64, r: f64, color: &str) {
    let _ = writeln!(
        out,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\"/>",
        fmt(map.x(x)),
        fmt(map.y(y)),
        fmt(r),
    );
}

fn open_dot(out: &mut String, map: &Map, x: f64, y: f64, r: f64, color: &str) {
    let _ = writeln!(
        out,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>",
        fmt(map.x(x)),
        fmt(map.y(y)),
        fmt(r),
    );
}

fn open_square(out: &mut String, map: &Map, x: f64, y: f64, half: f64, color: &str) {
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>",
        fmt(map.x(x) - half),
        fmt(map.y(y) - half),
        fmt(2.0 * half),
        fmt(2.0 * half),
    );
}

fn label(out: &mut String, px: f64, py: f64, color: &str, text: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{text}</text>",
        fmt(px),
        fmt(py),
    );
}

fn polyline(out: &mut String, map: &Map, pts: &[(f64, f64)], color: &str, width: f64) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{},{}", fmt(map.x(x)), fmt(map.y(y))))
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{}\"/>",
        coords.join(" "),
        fmt(width),
    );
}

/// Sampled planar trace of a two-segment motion: ride `x` from the
/// identity, then ride `y` from where `x` ended.
fn two_segment_trace(x: Twist, y: Twist, steps: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(2 * steps + 2);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let g = (x * t).exp();
        pts.push((g.x, g.y));
    }
    let gx = x.exp();
    for i in 1..=steps {
        let t = i as f64 / steps as f64;
        let g = gx * (y * t).exp();
        pts.push((g.x, g.y));
    }
    pts
}

/// Figure: the exact two-segment motion `exp(x)·exp(y)` against its
/// series estimates `exp(x + y)` (order 1) and the bracket-corrected
/// exponents of orders 2 and 3.  Shows how each added order pulls the
/// estimated endpoint toward the exact one.
pub fn bch_demo_svg(x: Twist, y: Twist) -> String {
    let trace = two_segment_trace(x, y, 96);
    let exact = x.exp() * y.exp();
    let ends = [
        (bch_truncate(x, y, 1).exp(), "order 1", PALETTE[1]),
        (bch_truncate(x, y, 2).exp(), "order 2", PALETTE[2]),
        (bch_truncate(x, y, 3).exp(), "order 3", PALETTE[3]),
    ];

    let mut b = Bounds::new();
    for &(px, py) in &trace {
        b.include(px, py);
    }
    b.include(exact.x, exact.y);
    for (g, _, _) in &ends {
        b.include(g.x, g.y);
    }
    let map = Map::from(&b);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<!-- two-segment demo: x=({},{},{}) y=({},{},{}) -->",
        x.x, x.y, x.theta, y.x, y.y, y.theta
    );
    svg_open(&mut out, &map);
    polyline(&mut out, &map, &trace, PALETTE[0], 1.6);
    dot(&mut out, &map, 0.0, 0.0, 3.0, "#555555");
    dot(&mut out, &map, exact.x, exact.y, 4.0, "#000000");
    for (g, _, color) in &ends {
        open_dot(&mut out, &map, g.x, g.y, 4.0, color);
    }
    // Legend, fixed pixel positions.
    label(&mut out, 10.0, 16.0, "#555555", "start");
    label(&mut out, 10.0, 30.0, "#000000", "exact endpoint exp(x)·exp(y)");
    for (i, (_, name, color)) in ends.iter().enumerate() {
        label(
            &mut out,
            10.0,
            44.0 + 14.0 * i as f64,
            color,
            &format!("{name} exponent endpoint"),
        );
    }
    out.push_str("</svg>\n");
    out
}

fn require_records(ds: &SweepDataset) -> Result<()> {
    if ds.records.is_empty() {
        return Err(Error::InvalidParameter(
            "dataset has no records to draw; run a sweep first (e.g. `motility sweep`) and render its sweep.json".into(),
        ));
    }
    Ok(())
}

/// Distinct diameters in first-appearance order, with a palette color
/// per diameter.
fn diameter_colors(ds: &SweepDataset) -> Vec<(f64, &'static str)> {
    let mut seen: Vec<f64> = Vec::new();
    for rec in &ds.records {
        if !seen.iter().any(|&d| d == rec.diameter) {
            seen.push(rec.diameter);
        }
    }
    seen.iter()
        .enumerate()
        .map(|(i, &d)| (d, PALETTE[i % PALETTE.len()]))
        .collect()
}

/// Figure: the swept gait loops in shape space — one outline per
/// diameter, a dot at every start phase, and the system's validity
/// region when it has one.
pub fn shape_space_svg(ds: &SweepDataset) -> Result<String> {
    require_records(ds)?;
    let center = ds.config.center;
    let colors = diameter_colors(ds);

    // Validity region, when the system both builds here and bounds one.
    let validity = ds.config.system.build().ok().and_then(|c| c.validity());

    let mut b = Bounds::new();
    if let Some(v) = &validity {
        b.include(v.r1_min, v.r2_min);
        b.include(v.r1_max, v.r2_max);
    }
    for &(d, _) in &colors {
        b.include(center.r1 - d / 2.0, center.r2 - d / 2.0);
        b.include(center.r1 + d / 2.0, center.r2 + d / 2.0);
    }
    let map = Map::from(&b);

    let mut out = String::new();
    let _ = writeln!(out, "<!-- config {} -->", ds.config_hash);
    svg_open(&mut out, &map);

    if let Some(v) = &validity {
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>",
            fmt(map.x(v.r1_min)),
            fmt(map.y(v.r2_max)),
            fmt((v.r1_max - v.r1_min) * map.scale),
            fmt((v.r2_max - v.r2_min) * map.scale),
        );
        label(&mut out, map.x(v.r1_min) + 4.0, map.y(v.r2_max) + 14.0, "#999999", "validity region");
    }

    for &(d, color) in &colors {
        match ds.config.family {
            GaitFamily::Circle => {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>",
                    fmt(map.x(center.r1)),
                    fmt(map.y(center.r2)),
                    fmt(d / 2.0 * map.scale),
                );
            }
            GaitFamily::Square => {
                let _ = writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>",
                    fmt(map.x(center.r1 - d / 2.0)),
                    fmt(map.y(center.r2 + d / 2.0)),
                    fmt(d * map.scale),
                    fmt(d * map.scale),
                );
            }
        }
    }

    // Start-phase markers, one per record.
    for rec in &ds.records {
        let color = colors
            .iter()
            .find(|&&(d, _)| d == rec.diameter)
            .map(|&(_, c)| c)
            .unwrap_or("#000000");
        let gait = match ds.config.family {
            GaitFamily::Circle => crate::gaits::Gait::circle(center, rec.diameter, rec.phase),
            GaitFamily::Square => crate::gaits::Gait::square(center, rec.diameter, rec.phase),
        };
        let (p, _) = gait.sample(0.0);
        dot(&mut out, &map, p.r1, p.r2, 2.0, color);
    }

    dot(&mut out, &map, center.r1, center.r2, 2.5, "#000000");
    for (i, &(d, color)) in colors.iter().enumerate() {
        label(&mut out, 10.0, 16.0 + 14.0 * i as f64, color, &format!("size {d}"));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One SVG arc of radius `r` around the world origin, spanning
/// `a0..a1` (math angles, radians).
fn arc_path(out: &mut String, map: &Map, r: f64, a0: f64, a1: f64, color: &str) {
    let (x0, y0) = (r * a0.cos(), r * a0.sin());
    let (x1, y1) = (r * a1.cos(), r * a1.sin());
    let large = if (a1 - a0).abs() > std::f64::consts::PI { 1 } else { 0 };
    // World CCW becomes screen CW after the y flip: sweep flag 1.
    let _ = writeln!(
        out,
        "<path d=\"M {} {} A {} {} 0 {large} 1 {} {}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2.2\"/>",
        fmt(map.x(x0)),
        fmt(map.y(y0)),
        fmt(r * map.scale),
        fmt(r * map.scale),
        fmt(map.x(x1)),
        fmt(map.y(y1)),
    );
}

/// Figure: displacement picture in the world frame.  Per diameter: one
/// integrated trajectory (first listed phase), every record's exact
/// endpoint, the endpoints the area rule and its corrected form
/// predict, and — when the record carries a non-degenerate bound — the
/// arc of directions the worst-case error angle admits at the area
/// rule's displacement radius.
pub fn trajectories_svg(ds: &SweepDataset) -> Result<String> {
    require_records(ds)?;
    let conn = ds.config.system.build()?;
    let colors = diameter_colors(ds);
    let first_phase = ds.config.phases.first().copied().unwrap_or(0.0);

    // Integrate one representative trajectory per diameter.
    const STEPS: usize = 512;
    let mut traces: Vec<(f64, &str, Vec<(f64, f64)>)> = Vec::new();
    for &(d, color) in &colors {
        let gait = match ds.config.family {
            GaitFamily::Circle => crate::gaits::Gait::circle(ds.config.center, d, first_phase),
            GaitFamily::Square => crate::gaits::Gait::square(ds.config.center, d, first_phase),
        };
        let mut g = Pose::IDENTITY;
        let mut pts = vec![(0.0, 0.0)];
        let h = 1.0 / STEPS as f64;
        for i in 0..STEPS {
            let t_mid = (i as f64 + 0.5) * h;
            let (p, v) = gait.sample(t_mid);
            let xi = conn.evaluate(p)?.apply(v) * h;
            g = g * xi.exp();
            pts.push((g.x, g.y));
        }
        traces.push((d, color, pts));
    }

    let mut b = Bounds::new();
    b.include(0.0, 0.0);
    for (_, _, pts) in &traces {
        for &(x, y) in pts {
            b.include(x, y);
        }
    }
    for rec in &ds.records {
        if let Some(r) = &rec.report {
            b.include(r.ground_truth.x, r.ground_truth.y);
            let c = r.cbvi.exp();
            b.include(c.x, c.y);
            let k = r.corrected_exponent.exp();
            b.include(k.x, k.y);
        }
    }
    let map = Map::from(&b);

    let mut out = String::new();
    let _ = writeln!(out, "<!-- config {} -->", ds.config_hash);
    svg_open(&mut out, &map);

    for (_, color, pts) in &traces {
        polyline(&mut out, &map, pts, color, 1.0);
    }

    // Origin cross.
    let (ox, oy) = (map.x(0.0), map.y(0.0));
    let _ = writeln!(
        out,
        "<path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"#000000\" stroke-width=\"1\"/>",
        fmt(ox - 5.0),
        fmt(oy),
        fmt(ox + 5.0),
        fmt(oy),
        fmt(ox),
        fmt(oy - 5.0),
        fmt(ox),
        fmt(oy + 5.0),
    );

    for rec in &ds.records {
        let color = colors
            .iter()
            .find(|&&(d, _)| d == rec.diameter)
            .map(|&(_, c)| c)
            .unwrap_or("#000000");
        if let Some(r) = &rec.report {
            dot(&mut out, &map, r.ground_truth.x, r.ground_truth.y, 1.8, color);
            let c = r.cbvi.exp();
            open_dot(&mut out, &map, c.x, c.y, 3.0, color);
            let k = r.corrected_exponent.exp();
            open_square(&mut out, &map, k.x, k.y, 2.5, color);
        }
    }

    // Worst-case arcs: one per diameter, anchored at the representative
    // record's area-rule direction.
    for &(d, color) in &colors {
        let rep = ds
            .records
            .iter()
            .find(|r| r.diameter == d && r.report.is_some() && r.bound.is_some());
        if let Some(rec) = rep {
            let report = rec.report.as_ref().unwrap();
            let bound = rec.bound.as_ref().unwrap();
            let radius = report.cbvi.translation_norm();
            if !bound.degenerate && radius > 1e-12 && bound.max_error_angle > 0.0 {
                let mid = report.cbvi.y.atan2(report.cbvi.x);
                arc_path(
                    &mut out,
                    &map,
                    radius,
                    mid - bound.max_error_angle,
                    mid + bound.max_error_angle,
                    color,
                );
            }
        }
    }

    label(&mut out, 10.0, 16.0, "#000000", "dots: exact endpoints");
    label(&mut out, 10.0, 30.0, "#000000", "open circles: area-rule endpoints");
    label(&mut out, 10.0, 44.0, "#000000", "open squares: corrected endpoints");
    label(&mut out, 10.0, 58.0, "#000000", "arcs: worst-case direction band");
    for (i, &(d, color)) in colors.iter().enumerate() {
        label(&mut out, 10.0, 80.0 + 14.0 * i as f64, color, &format!("size {d}"));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
