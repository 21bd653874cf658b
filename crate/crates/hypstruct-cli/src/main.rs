//! Command line front end: build 2-bridge triangulations, solve gluing and
//! filling equations, maximize volume over angle structures, draw cusps and
//! Ford domains, and run the combinatorial self-checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hypstruct::angles::{self, AnglePoint, MaxStatus};
use hypstruct::ford::{self, GroupData, Window};
use hypstruct::shapes::{complete_system, filling_system, newton_solve, peripheral_curves, NewtonOptions};
use hypstruct::triangulation::{cusp_components, cusp_svg, edge_classes, intersection_number, parse, serialize};
use hypstruct::twobridge::{build, normalize_cf};
use hypstruct::{Complex64, Error, ShapeAssignment, SolveReport, Triangulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "hypstruct", version, about = "Hyperbolic structures on ideal triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SolveOpts {
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
}

impl SolveOpts {
    fn newton(&self) -> Result<NewtonOptions> {
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        Ok(NewtonOptions { tol: self.tol, max_iter: self.max_iter })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a triangulation, from a 2-bridge code or an existing file.
    Build {
        #[command(subcommand)]
        source: Source,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Solve the gluing and completeness equations.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the Dehn filling equations for one cusp.
    Fill {
        file: PathBuf,
        /// Slope as `p,q`.
        #[arg(long, allow_hyphen_values = true)]
        slope: String,
        /// Cusp to fill; the others stay complete.
        #[arg(long, default_value_t = 0)]
        cusp: usize,
        #[command(flatten)]
        opts: SolveOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Volume of the complete structure.
    Volume {
        file: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Angle structures.
    Angles {
        #[command(subcommand)]
        action: AnglesAction,
    },
    /// Draw a cusp triangulation.
    CuspSvg {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        cusp: usize,
        /// Lay the triangles out with the shapes of the complete structure.
        #[arg(long)]
        shapes: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a cross-section of a Ford domain.
    FordSvg {
        /// Built-in group; only `figure8` is available.
        #[arg(long)]
        preset: Option<String>,
        /// JSON file with generators and cusp lattice.
        #[arg(long, conflicts_with = "preset")]
        generators: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Rectangle `x0,y0,x1,y1`; defaults to the group's window.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the combinatorial invariants of a triangulation file.
    Check { file: PathBuf },
}

#[derive(Subcommand)]
enum Source {
    /// Continued fraction code such as `2,3` or `-2,-3`.
    #[command(name = "2bridge")]
    TwoBridge {
        #[arg(allow_hyphen_values = true)]
        code: String,
    },
    /// Re-validate and canonicalize a triangulation file.
    File { path: PathBuf },
}

#[derive(Subcommand)]
enum AnglesAction {
    /// Maximize volume over the angle structures.
    Max {
        file: PathBuf,
        /// Extra random interior starting points.
        #[arg(long, default_value_t = 3)]
        starts: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The interior point with the largest minimum angle.
    Feasible { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Validation(_) | Error::NotHyperbolic(_) | Error::CuspNotTorus { .. }) => 2,
        Some(Error::NoConvergence { .. } | Error::SingularJacobian | Error::DegenerateApproach { .. }) => 3,
        Some(Error::BadSlope { .. }) => 4,
        _ => 1,
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Build { source, out } => cmd_build(source, out.as_deref()),
        Command::Solve { file, opts, out } => cmd_solve(&file, opts, out.as_deref()),
        Command::Fill { file, slope, cusp, opts, out } => cmd_fill(&file, &slope, cusp, opts, out.as_deref()),
        Command::Volume { file, opts } => cmd_volume(&file, opts),
        Command::Angles { action } => match action {
            AnglesAction::Max { file, starts, tol, out } => cmd_angles_max(&file, starts, tol, out.as_deref()),
            AnglesAction::Feasible { file } => cmd_angles_feasible(&file),
        },
        Command::CuspSvg { file, cusp, shapes, out } => cmd_cusp_svg(&file, cusp, shapes, out.as_deref()),
        Command::FordSvg { preset, generators, max_len, grid, window, out } => {
            cmd_ford_svg(preset.as_deref(), generators.as_deref(), max_len, grid, window.as_deref(), out.as_deref())
        }
        Command::Check { file } => cmd_check(&file),
    }
}

fn read_triangulation(path: &Path) -> Result<Triangulation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse(&text)?)
}

/// Write `data` to `out` and print `summary`, or print `data` when there is
/// no output file.
fn emit(out: Option<&Path>, data: &str, summary: &str) -> Result<()> {
    match out {
        Some(p) => {
            fs::write(p, data).with_context(|| format!("writing {}", p.display()))?;
            println!("{summary}");
        }
        None => print!("{data}"),
    }
    Ok(())
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|e| anyhow!("bad integer {x:?}: {e}")))
        .collect()
}

fn cmd_build(source: Source, out: Option<&Path>) -> Result<ExitCode> {
    let t = match source {
        Source::TwoBridge { code } => {
            let raw = parse_ints(&code)?;
            let cf = normalize_cf(&raw)?;
            build(&cf)?.triangulation
        }
        Source::File { path } => read_triangulation(&path)?,
    };
    let summary = format!(
        "{}: {} tetrahedra, {} edges, {} cusps",
        t.name,
        t.len(),
        edge_classes(&t).len(),
        cusp_components(&t).len()
    );
    emit(out, &serialize(&t), &summary)?;
    Ok(ExitCode::SUCCESS)
}

/// Shapes of the volume maximizer, when it lies in the interior.
fn angle_start(t: &Triangulation) -> Option<ShapeAssignment> {
    let pol = angles::polytope(t);
    let p0 = angles::feasible_point(&pol).ok()?;
    let (p, report) = angles::maximize(&p0, &pol, 1e-10).ok()?;
    (report.status == MaxStatus::InteriorMax).then(|| angles::shapes_from_angles(&p).ok()).flatten()
}

/// Newton's method from the all-`i` start, then from the angle maximizer.
fn solve_with_fallback(
    t: &Triangulation,
    sys: &hypstruct::EquationSystem,
    first: ShapeAssignment,
    opts: NewtonOptions,
) -> Result<(ShapeAssignment, SolveReport, &'static str)> {
    match newton_solve(sys, &first, opts) {
        Ok((s, r)) => Ok((s, r, "given")),
        Err(first_err) => match angle_start(t) {
            Some(start) => {
                let (s, r) = newton_solve(sys, &start, opts)?;
                Ok((s, r, "angle maximizer"))
            }
            None => Err(first_err.into()),
        },
    }
}

fn all_i(t: &Triangulation) -> ShapeAssignment {
    ShapeAssignment::uniform(t.len(), Complex64::new(0.0, 1.0))
}

fn cmd_solve(file: &Path, opts: SolveOpts, out: Option<&Path>) -> Result<ExitCode> {
    let t = read_triangulation(file)?;
    let sys = complete_system(&t)?;
    let (_, report, start) = solve_with_fallback(&t, &sys, all_i(&t), opts.newton()?)?;
    let data = serde_json::to_string_pretty(&json!({
        "name": t.name,
        "start": start,
        "report": report,
    }))? + "\n";
    let summary = format!("{}: volume {:.10} after {} iterations", t.name, report.volume, report.iterations);
    emit(out, &data, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fill(file: &Path, slope: &str, cusp: usize, opts: SolveOpts, out: Option<&Path>) -> Result<ExitCode> {
    let t = read_triangulation(file)?;
    let pq = parse_ints(slope)?;
    let [p, q] = pq[..] else {
        bail!("--slope takes two integers p,q");
    };
    let ncusps = cusp_components(&t).len();
    if cusp >= ncusps {
        bail!("cusp {cusp} does not exist ({ncusps} cusps)");
    }
    let mut slopes = vec![None; ncusps];
    slopes[cusp] = Some((p, q));
    let sys = filling_system(&t, &slopes)?;
    let newton = opts.newton()?;
    // Start from the complete structure when it is available.
    let complete = complete_system(&t)
        .ok()
        .and_then(|c| solve_with_fallback(&t, &c, all_i(&t), newton).ok())
        .map(|(s, _, _)| s);
    let result = match complete {
        Some(s) => newton_solve(&sys, &s, newton).map(|(s, r)| (s, r, "complete structure")),
        None => Err(Error::Missing("complete structure".into())),
    };
    let (_, report, start) = match result {
        Ok(r) => r,
        Err(_) => solve_with_fallback(&t, &sys, all_i(&t), newton)?,
    };
    let data = serde_json::to_string_pretty(&json!({
        "name": t.name,
        "cusp": cusp,
        "slope": [p, q],
        "start": start,
        "report": report,
    }))? + "\n";
    let summary = format!("{}({p},{q}): volume {:.10} after {} iterations", t.name, report.volume, report.iterations);
    emit(out, &data, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_volume(file: &Path, opts: SolveOpts) -> Result<ExitCode> {
    let t = read_triangulation(file)?;
    let sys = complete_system(&t)?;
    let (_, report, _) = solve_with_fallback(&t, &sys, all_i(&t), opts.newton()?)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "name": t.name,
            "volume": report.volume,
            "geometric": report.geometric,
        }))?
    );
    Ok(ExitCode::SUCCESS)
}

fn seed() -> Result<u64> {
    match std::env::var("HYPSTRUCT_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("HYPSTRUCT_SEED={s:?} is not an integer")),
        Err(_) => Ok(0),
    }
}

/// A random interior point on a segment from `p` toward the boundary.
fn random_start(pol: &angles::AnglePolytope, p: &AnglePoint, rng: &mut ChaCha8Rng) -> AnglePoint {
    let d = pol.dimension();
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dir = pol.tangent(&x).w;
    let mut tmax = f64::INFINITY;
    for (a, w) in p.a.iter().zip(dir.iter()) {
        if *w > 0.0 {
            tmax = tmax.min((std::f64::consts::PI - a) / w);
        } else if *w < 0.0 {
            tmax = tmax.min(-a / w);
        }
    }
    let step = if tmax.is_finite() { tmax * rng.gen_range(0.1..0.6) } else { 0.0 };
    AnglePoint::new(p.a.iter().zip(dir.iter()).map(|(a, w)| a + step * w).collect())
}

fn cmd_angles_max(file: &Path, starts: usize, tol: f64, out: Option<&Path>) -> Result<ExitCode> {
    let t = read_triangulation(file)?;
    let pol = angles::polytope(&t);
    let p0 = angles::feasible_point(&pol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed()?);
    let mut points = vec![p0.clone()];
    points.extend((0..starts).map(|_| random_start(&pol, &p0, &mut rng)));
    let mut runs = Vec::with_capacity(points.len());
    for p in &points {
        runs.push(angles::maximize(p, &pol, tol)?);
    }
    let spread = runs
        .iter()
        .flat_map(|(p, _)| p.a.iter().zip(&runs[0].0.a).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let (best, report) = runs
        .into_iter()
        .max_by(|(pa, ra), (pb, rb)| {
            ra.volume
                .total_cmp(&rb.volume)
                .then_with(|| pb.a.iter().zip(&pa.a).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
        })
        .expect("at least one start");

    let mut certified = serde_json::Value::Null;
    if report.status == MaxStatus::InteriorMax {
        let shapes = angles::shapes_from_angles(&best)?;
        let sys = complete_system(&t)?;
        certified = match newton_solve(&sys, &shapes, NewtonOptions::default()) {
            Ok((_, r)) => json!({
                "converged": true,
                "geometric": r.geometric,
                "volume": r.volume,
                "volume_gap": (r.volume - report.volume).abs(),
                "iterations": r.iterations,
                "shapes": r.shapes,
            }),
            Err(e) => json!({ "converged": false, "error": e.to_string() }),
        };
    }
    let data = serde_json::to_string_pretty(&json!({
        "name": t.name,
        "status": report.status,
        "volume": report.volume,
        "maximizer": best.a,
        "report": report,
        "starts": points.len(),
        "start_spread": spread,
        "certified": certified,
    }))? + "\n";
    let summary = format!("{}: {:?} volume {:.10}", t.name, report.status, report.volume);
    emit(out, &data, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_angles_feasible(file: &Path) -> Result<ExitCode> {
    let t = read_triangulation(file)?;
    let pol = angles::polytope(&t);
    let p = angles::feasible_point(&pol)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "name": t.name,
            "dimension": pol.dimension(),
            "min_slack": p.min_slack(),
            "point": p.a,
        }))?
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_cusp_svg(file: &Path, cusp: usize, shapes: bool, out: Option<&Path>) -> Result<ExitCode> {
    let t = read_triangulation(file)?;
    let cs = hypstruct::cusps(&t)?;
    let c = cs.get(cusp).ok_or_else(|| anyhow!("cusp {cusp} does not exist ({} cusps)", cs.len()))?;
    let solution = if shapes {
        let sys = complete_system(&t)?;
        Some(solve_with_fallback(&t, &sys, all_i(&t), NewtonOptions::default())?.0)
    } else {
        None
    };
    let svg = cusp_svg(&t, c, solution.as_ref())?;
    emit(out, &svg, &format!("{}: cusp {cusp} with {} triangles", t.name, c.len()))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_window(s: &str) -> Result<Window> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow!("bad number {x:?}: {e}")))
        .collect::<Result<_>>()?;
    let [x0, y0, x1, y1] = v[..] else {
        bail!("--window takes x0,y0,x1,y1");
    };
    if !(x1 > x0 && y1 > y0) {
        bail!("--window must have x1 > x0 and y1 > y0");
    }
    Ok(Window::rectangle(x0, y0, x1, y1))
}

fn cmd_ford_svg(
    preset: Option<&str>,
    generators: Option<&Path>,
    max_len: usize,
    grid: usize,
    window: Option<&str>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let group: GroupData = match (preset, generators) {
        (Some("figure8"), None) => ford::figure8_group(),
        (Some(other), None) => bail!("unknown preset {other:?}"),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ford::parse_group(&text)?
        }
        _ => bail!("give either --preset or --generators"),
    };
    if grid < 64 {
        bail!("--grid must be at least 64");
    }
    let window = match window {
        Some(w) => parse_window(w)?,
        None => group.window,
    };
    let spheres = ford::enumerate(&group.generators, &group.lattice, max_len, &window);
    let vis = ford::visible(&spheres, &group.lattice, &window, grid);
    let stabilized = max_len >= 2 && {
        let shorter = ford::enumerate(&group.generators, &group.lattice, max_len - 1, &window);
        ford::same_spheres(&ford::visible(&shorter, &group.lattice, &window, grid), &vis)
    };
    let svg = ford::ford_svg(&vis, &group.lattice, &window);
    let summary = json!({
        "spheres": spheres.len(),
        "visible": vis.len(),
        "stabilized": stabilized,
        "faces": vis.iter().map(|v| json!({
            "center": [v.sphere.center.re, v.sphere.center.im],
            "radius": v.sphere.radius,
            "word": v.sphere.word,
            "apex_covered": v.apex_covered,
        })).collect::<Vec<_>>(),
    });
    match out {
        Some(p) => {
            fs::write(p, &svg).with_context(|| format!("writing {}", p.display()))?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => {
            print!("{svg}");
            eprintln!("{} visible spheres, stabilized: {stabilized}", vis.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(file: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let mut failures = 0;
    let mut report = |name: &str, result: std::result::Result<(), String>| match result {
        Ok(()) => println!("PASS {name}"),
        Err(why) => {
            failures += 1;
            println!("FAIL {name}: {why}");
        }
    };
    let t = match parse(&text) {
        Ok(t) => {
            report("parse and validate", Ok(()));
            t
        }
        Err(e) => {
            report("parse and validate", Err(e.to_string()));
            return Ok(ExitCode::FAILURE);
        }
    };
    let n = t.len();
    report(
        "round trip",
        if serialize(&t) == text { Ok(()) } else { Err("serialized text differs from the file".into()) },
    );
    let classes = edge_classes(&t);
    report(
        "edge classes = tetrahedra",
        if classes.len() == n { Ok(()) } else { Err(format!("{} edge classes for {n} tetrahedra", classes.len())) },
    );
    let sides: usize = classes.iter().map(|c| c.sides.len()).sum();
    let comps = cusp_components(&t);
    let triangles: usize = comps.iter().map(|c| c.len()).sum();
    report(
        "totality",
        if sides == 6 * n && triangles == 4 * n {
            Ok(())
        } else {
            Err(format!("{sides} edge sides and {triangles} cusp triangles for {n} tetrahedra"))
        },
    );
    let bad: Vec<String> = comps
        .iter()
        .filter(|c| c.euler_characteristic != 0)
        .map(|c| format!("cusp {} has χ = {}", c.id, c.euler_characteristic))
        .collect();
    report("cusps are tori", if bad.is_empty() { Ok(()) } else { Err(bad.join(", ")) });
    if bad.is_empty() {
        let peripheral = match peripheral_curves(&t) {
            Ok(curves) => curves
                .iter()
                .enumerate()
                .map(|(k, (mu, lam))| {
                    mu.check(&t).map_err(|e| format!("cusp {k} meridian: {e}"))?;
                    lam.check(&t).map_err(|e| format!("cusp {k} longitude: {e}"))?;
                    match intersection_number(&t, mu, lam) {
                        1 | -1 => Ok(()),
                        i => Err(format!("cusp {k}: intersection number {i}")),
                    }
                })
                .collect::<std::result::Result<Vec<()>, String>>()
                .map(|_| ()),
            Err(e) => Err(e.to_string()),
        };
        report("peripheral curves", peripheral);
    }
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
