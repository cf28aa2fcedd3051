//! Thin command-line front end over the `motility` library.
//!
//! Exit codes: 0 success; 2 configuration problems (bad flags, bad
//! config files, gaits outside a system's validity region); 3 numeric
//! failures (non-convergent refinement, singular solves — including
//! any such failure inside an otherwise completed sweep); 1 I/O or
//! serialization trouble.

use clap::{Args, Parser, Subcommand};
use motility::bounds::{max_diameter, third_order_bound, AbsMode, BoundOptions, ComparisonMode};
use motility::connection::ShapePoint;
use motility::error::Error;
use motility::estimators::ground_truth;
use motility::gaits::Gait;
use motility::harness::{
    apply_config_key, from_json, parse_config_file, run_sweep, write_outputs,
    SweepConfig, SystemSpec,
};
use motility::render::bch_demo_svg;
use motility::se2::Twist;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable that overrides the default output directory.
const OUT_DIR_ENV: &str = "MOTILITY_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "motility-out";

#[derive(Parser)]
#[command(
    name = "motility",
    about = "Displacement estimates, error bounds, and sweep datasets for planar locomoting systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (diameter × phase) sweep and write CSV/JSON (and SVG) artifacts.
    Sweep(SweepArgs),
    /// Evaluate the worst-case third-order bound at one diameter, or
    /// the largest diameter keeping the bound below a proportion.
    Bound(BoundArgs),
    /// Integrate one gait to machine-checked accuracy and print the pose.
    GroundTruth(GroundTruthArgs),
    /// Render the two-segment series-estimate demo figure.
    BchDemo(BchDemoArgs),
    /// Re-render figures from an existing sweep.json.
    Render(RenderArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Config file of `key = value` lines (CLI flags override it).
    #[arg(long)]
    config: Option<PathBuf>,
    /// System: diffdrive[:R,W] | purcell[:L,T,RATIO] | tabulated:PATH.
    #[arg(long)]
    system: Option<String>,
    /// Gait family: circle | square.
    #[arg(long)]
    family: Option<String>,
    /// Sweep center "r1,r2".
    #[arg(long)]
    center: Option<String>,
    /// Comma-separated gait sizes.
    #[arg(long)]
    diameters: Option<String>,
    /// Comma-separated start phases, or "n:K" for K even phases.
    #[arg(long)]
    phases: Option<String>,
    #[arg(long)]
    gt_tol: Option<f64>,
    #[arg(long)]
    quad_tol: Option<f64>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    hessian_step: Option<f64>,
    #[arg(long)]
    theta_weight: Option<f64>,
    /// Segment-estimate series order (1 or 2).
    #[arg(long)]
    bch_order: Option<u32>,
    /// Output directory (overrides MOTILITY_OUT_DIR and the config file).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write SVG figures.
    #[arg(long)]
    render: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// System: diffdrive[:R,W] | purcell[:L,T,RATIO] | tabulated:PATH.
    #[arg(long, default_value = "purcell")]
    system: String,
    /// Expansion center "r1,r2".
    #[arg(long, default_value = "0,0")]
    center: String,
    /// Evaluate the bound at this diameter.
    #[arg(long, conflicts_with_all = ["proportion", "cap"])]
    diameter: Option<f64>,
    /// Find the largest diameter whose bound stays below this
    /// proportion of the predicted displacement.
    #[arg(long)]
    proportion: Option<f64>,
    /// Search cap for --proportion.
    #[arg(long, default_value_t = 1.0)]
    cap: f64,
    /// Bound comparison: norm | componentwise.
    #[arg(long, default_value = "norm")]
    comparison: String,
    /// Connection magnitude envelope: mean | sup.
    #[arg(long, default_value = "mean")]
    abs_mode: String,
}

#[derive(Args)]
struct GroundTruthArgs {
    /// System: diffdrive[:R,W] | purcell[:L,T,RATIO] | tabulated:PATH.
    #[arg(long, default_value = "purcell")]
    system: String,
    /// Gait: circle:cx,cy,size,phase | square:cx,cy,size,phase.
    #[arg(long)]
    gait: String,
    /// Convergence tolerance on the displacement.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct BchDemoArgs {
    /// First segment twist "x,y,theta".
    #[arg(long, default_value = "0.6,0.0,0.8")]
    x: String,
    /// Second segment twist "x,y,theta".
    #[arg(long, default_value = "0.0,0.5,-0.6")]
    y: String,
    /// Output directory for bch_demo.svg.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Path to a sweep.json produced by `motility sweep`.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (defaults next to the input).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_triple(s: &str, what: &str) -> Result<Twist, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "{what} needs three numbers 'x,y,theta', got '{s}'"
        )));
    }
    let mut v = [0.0; 3];
    for (slot, tok) in v.iter_mut().zip(&parts) {
        *slot = tok
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{what}: bad number '{tok}'")))?;
    }
    Ok(Twist::new(v[0], v[1], v[2]))
}

fn parse_center(s: &str) -> Result<ShapePoint, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "center needs two numbers 'r1,r2', got '{s}'"
        )));
    }
    let r1 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("center: bad number '{}'", parts[0])))?;
    let r2 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("center: bad number '{}'", parts[1])))?;
    Ok(ShapePoint::new(r1, r2))
}

/// Assemble the sweep config: defaults ← config file ← CLI flags, with
/// the output directory also drawing from MOTILITY_OUT_DIR between the
/// config file and the flag.
fn assemble_sweep_config(args: &SweepArgs) -> Result<SweepConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
        None => SweepConfig::default(),
    };
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.out_dir = Some(dir);
        }
    }
    if let Some(v) = &args.system {
        apply_config_key(&mut cfg, "system", v)?;
    }
    if let Some(v) = &args.family {
        apply_config_key(&mut cfg, "family", v)?;
    }
    if let Some(v) = &args.center {
        apply_config_key(&mut cfg, "center", v)?;
    }
    if let Some(v) = &args.diameters {
        apply_config_key(&mut cfg, "diameters", v)?;
    }
    if let Some(v) = &args.phases {
        apply_config_key(&mut cfg, "phases", v)?;
    }
    if let Some(v) = args.gt_tol {
        cfg.gt_tol = v;
    }
    if let Some(v) = args.quad_tol {
        cfg.quad_tol = v;
    }
    if let Some(v) = args.fd_step {
        cfg.fd_step = v;
    }
    if let Some(v) = args.hessian_step {
        cfg.hessian_step = v;
    }
    if let Some(v) = args.theta_weight {
        cfg.theta_weight = v;
    }
    if let Some(v) = args.bch_order {
        cfg.bch_order = v;
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = Some(dir.display().to_string());
    }
    if args.render {
        cfg.render = true;
    }
    Ok(cfg)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, Error> {
    let cfg = assemble_sweep_config(args)?;
    let dataset = run_sweep(&cfg)?;
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| DEFAULT_OUT_DIR.to_string());
    let written = write_outputs(&dataset, Path::new(&out_dir))?;

    let failures: Vec<&motility::harness::SweepRecord> =
        dataset.records.iter().filter(|r| r.error.is_some()).collect();
    println!(
        "sweep {}: {} records ({} failed), {} diameters × {} phases",
        dataset.config_hash,
        dataset.records.len(),
        failures.len(),
        cfg.diameters.len(),
        cfg.phases.len()
    );
    for rec in &failures {
        let err = rec.error.as_ref().unwrap();
        println!(
            "  failed: size {} phase {:.4}: {}",
            rec.diameter, rec.phase, err.message
        );
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    if dataset.any_numeric_failure() {
        eprintln!("error: some records failed numerically");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn bound_options(args: &BoundArgs) -> Result<BoundOptions, Error> {
    let comparison = match args.comparison.as_str() {
        "norm" => ComparisonMode::Norm,
        "componentwise" => ComparisonMode::Componentwise,
        other => {
            return Err(Error::InvalidParameter(format!(
                "comparison must be norm or componentwise, got '{other}'"
            )))
        }
    };
    let abs_mode = match args.abs_mode.as_str() {
        "mean" => AbsMode::MeanAbs,
        "sup" => AbsMode::SupAbs,
        other => {
            return Err(Error::InvalidParameter(format!(
                "abs-mode must be mean or sup, got '{other}'"
            )))
        }
    };
    Ok(BoundOptions { comparison, abs_mode, ..BoundOptions::default() })
}

fn cmd_bound(args: &BoundArgs) -> Result<ExitCode, Error> {
    let system = SystemSpec::parse(&args.system)?;
    let conn = system.build()?;
    let center = parse_center(&args.center)?;
    let opts = bound_options(args)?;
    match (args.diameter, args.proportion) {
        (Some(d), None) => {
            let report = third_order_bound(&conn, center, d, &opts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        (None, Some(p)) => {
            let report = max_diameter(&conn, center, p, args.cap, &opts)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        (None, None) => {
            return Err(Error::InvalidParameter(
                "pass either --diameter D or --proportion P [--cap C]".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with_all forbids this"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ground_truth(args: &GroundTruthArgs) -> Result<ExitCode, Error> {
    let system = SystemSpec::parse(&args.system)?;
    let conn = system.build()?;
    let gait = Gait::from_spec(&args.gait)?;
    let pose = ground_truth(&conn, &gait, args.tol)?;
    println!("{}", serde_json::to_string_pretty(&pose)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_bch_demo(args: &BchDemoArgs) -> Result<ExitCode, Error> {
    let x = parse_triple(&args.x, "--x")?;
    let y = parse_triple(&args.y, "--y")?;
    let svg = bch_demo_svg(x, y);
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| std::env::var(OUT_DIR_ENV).ok().filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&out_dir)?;
    let path = out_dir.join("bch_demo.svg");
    std::fs::write(&path, &svg)?;

    let exact = x.exp() * y.exp();
    println!("exact endpoint:   ({:+.9}, {:+.9}, {:+.9})", exact.x, exact.y, exact.theta);
    for order in 1..=3 {
        let est = motility::se2::bch_truncate(x, y, order).exp();
        println!(
            "order {order} endpoint: ({:+.9}, {:+.9}, {:+.9})  error {:.3e}",
            est.x,
            est.y,
            est.theta,
            est.distance(exact, 1.0)
        );
    }
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_render(args: &RenderArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.input)?;
    let mut dataset = from_json(&text)?;
    dataset.config.render = true;
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| std::env::var(OUT_DIR_ENV).ok().filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| args.input.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)?;
    let shape = out_dir.join("shape_space.svg");
    std::fs::write(&shape, motility::render::shape_space_svg(&dataset)?)?;
    let traj = out_dir.join("trajectories.svg");
    std::fs::write(&traj, motility::render::trajectories_svg(&dataset)?)?;
    println!("wrote {}", shape.display());
    println!("wrote {}", traj.display());
    Ok(ExitCode::SUCCESS)
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_)
        | Error::Parse { .. }
        | Error::OutOfDomain { .. }
        | Error::DegenerateGeometry(_) => 2,
        Error::NonConvergence { .. } | Error::SingularSolve { .. } => 3,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bound(args) => cmd_bound(args),
        Command::GroundTruth(args) => cmd_ground_truth(args),
        Command::BchDemo(args) => cmd_bch_demo(args),
        Command::Render(args) => cmd_render(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
