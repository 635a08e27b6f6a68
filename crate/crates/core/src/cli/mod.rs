//! Command-line front end.

mod config;
mod report;

pub use config::{parse_list, parse_ops, parse_point, parse_shape, parse_shape_text};
pub use report::{config_map, strip_timing, Record, Report, Status};

use crate::eikonal::{fast_march, sup_error_vs_exact};
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::geometry::{Point, Shape};
use crate::plaplace::{p_sweep, SweepRow};
use crate::ridge::{classify_with, max_distance_cells, ridge_cells, ridge_cross_check};
use crate::verify::{theorem_verdict_with, trajectory_with, GradientField, TheoremOptions, Trajectory};
use crate::web::{build_web, build_web_with_constant, OperatorKind};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "inflab", version, about = "Overdetermined infinity-Laplacian problems on planar domains")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Catalog name, `catalog:<name>`, inline `key=value;...`, JSON, or a file.
    #[arg(long, global = true, default_value = "disk")]
    pub shape: String,
    /// Grid spacing; defaults to inradius/64.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Operator(s), comma separated: classical, normalized, plimit.
    #[arg(long, global = true)]
    pub op: Option<String>,
    /// Exponents for the p sweep.
    #[arg(long, global = true, default_value = "4,8,16,32")]
    pub ps: String,
    /// Gradient norm exponents for the p sweep.
    #[arg(long, global = true, default_value = "2,4")]
    pub qs: String,
    /// Directory for the report and dumps.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Multiplies every check tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    /// Seed for sampled boundary starting points.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Fast-marching distance and its error against the exact distance.
    Distance {
        /// Use the exact distance instead of fast marching.
        #[arg(long)]
        exact: bool,
    },
    /// Ridge and deepest-set extraction and comparison.
    Classify,
    /// Full existence check for the chosen operators.
    Verify {
        /// Random trajectory starts for the classical operator.
        #[arg(long, default_value_t = 16)]
        starts: usize,
    },
    /// p-Laplacian solutions for increasing p.
    Psweep {
        /// Fail unless sup|u_p - d| strictly decreases.
        #[arg(long)]
        assert_monotone: bool,
    },
    /// Web-function field for one operator.
    Web {
        /// Override the Neumann constant (result is not a theorem instance).
        #[arg(long)]
        a: Option<f64>,
    },
    /// Steepest-ascent trajectories of the classical web solution.
    Trajectory {
        /// Boundary starting point `x,y`; random starts otherwise.
        #[arg(long)]
        start: Option<String>,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
}

/// Files produced by a command, relative to the output directory.
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

struct Setup {
    shape: Shape,
    grid: Arc<Grid>,
    config: Vec<(&'static str, Value)>,
}

fn setup(c: &Common) -> Result<Setup> {
    let shape = parse_shape(&c.shape)?;
    let h = c.h.unwrap_or(shape.inradius() / 64.0);
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Argument(format!("h must be positive, got {h}")));
    }
    if !(c.tol_scale > 0.0 && c.tol_scale.is_finite()) {
        return Err(Error::Argument(format!("tol-scale must be positive, got {}", c.tol_scale)));
    }
    let grid = Grid::build(&shape, h)?;
    let config = vec![
        ("shape", serde_json::to_value(shape.kind()).expect("shape serializes")),
        ("h", h.into()),
        ("nx", grid.nx.into()),
        ("ny", grid.ny.into()),
        ("inradius", shape.inradius().into()),
        ("tol_scale", c.tol_scale.into()),
        ("seed", c.seed.into()),
        ("out", c.out.as_ref().map(|p| p.display().to_string()).into()),
    ];
    Ok(Setup { shape, grid, config })
}

fn ops_or(c: &Common, default: &str) -> Result<Vec<OperatorKind>> {
    parse_ops(c.op.as_deref().unwrap_or(default))
}

fn random_starts(shape: &Shape, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| shape.boundary_point(rng.gen::<f64>()).0).collect()
}

fn run_trajectories(
    sol: &crate::web::WebSolution,
    starts: &[Point],
    dt: f64,
) -> Result<Vec<(Point, Trajectory)>> {
    let grad = GradientField::new(&sol.field);
    starts.iter().map(|&x0| trajectory_with(sol, &grad, x0, dt).map(|t| (x0, t))).collect()
}

fn trajectory_records(prefix: &str, sol: &crate::web::WebSolution, runs: &[(Point, Trajectory)], tol: f64) -> Vec<Record> {
    let h = sol.field.grid().h;
    let a2 = sol.a * sol.a;
    let ident = runs.iter().map(|(_, t)| t.identity_deviation()).fold(0.0, f64::max);
    let disp = runs.iter().map(|(_, t)| t.max_displacement()).fold(0.0, f64::max);
    let stop_t = runs.iter().map(|(_, t)| t.end().t).fold(f64::INFINITY, f64::min);
    vec![
        Record::at_most(format!("{prefix}trajectory_identity"), ident, 0.05 * a2 * tol).with("starts", runs.len()),
        Record::at_most(format!("{prefix}trajectory_displacement"), disp, sol.a.powi(3) / 3.0 + 2.0 * h * tol)
            .with("min_stop_time", stop_t),
    ]
}

pub fn cmd_distance(c: &Common, exact: bool) -> Result<Outcome> {
    let s = setup(c)?;
    let mut config = s.config;
    config.push(("exact", exact.into()));
    let mut report = Report::new("distance", config_map(config));
    let field = if exact { ScalarField::exact_distance(&s.grid) } else { fast_march(&s.grid)? };
    let err = sup_error_vs_exact(&field);
    report.push(Record::at_most("sup_error", err, 2.0 * s.grid.h * c.tol_scale).with("error_over_h", err / s.grid.h));
    report.push(Record::info("field").with("max", field.max_inside()).with("inside_cells", s.grid.inside_count()));
    Ok(Outcome { report, files: vec![("distance.txt".into(), field.to_dump())] })
}

pub fn cmd_classify(c: &Common) -> Result<Outcome> {
    let s = setup(c)?;
    let mut report = Report::new("classify", config_map(s.config));
    let verdict = classify_with(&s.grid, c.tol_scale)?;
    let ridge = ridge_cells(&s.grid);
    let deepest = max_distance_cells(&s.grid);
    let cross = ridge_cross_check(&ridge);
    report.push(Record::info("verdict").with_fields("", &verdict).with("solution_exists", verdict.solution_exists()));
    report.push(
        Record::info("ridge_cross_check")
            .with("gradient_ridge_cells", cross.gradient_ridge.len())
            .with("disagreements", cross.disagreements.len()),
    );
    Ok(Outcome {
        report,
        files: vec![("ridge.txt".into(), ridge.to_dump()), ("deepest.txt".into(), deepest.to_dump())],
    })
}

pub fn cmd_verify(c: &Common, starts: usize) -> Result<Outcome> {
    let s = setup(c)?;
    let ops = ops_or(c, "classical,normalized")?;
    let mut config = s.config;
    config.push(("operators", ops.iter().map(|o| o.as_str()).collect::<Vec<_>>().into()));
    config.push(("trajectory_starts", starts.into()));
    let mut report = Report::new("verify", config_map(config));
    let opts = TheoremOptions { tol_scale: c.tol_scale, ..TheoremOptions::default() };
    config_options(&mut report, &opts);
    let mut classified = false;
    for &op in &ops {
        let t = theorem_verdict_with(&s.grid, op, &opts)?;
        if !classified {
            report.push(Record::info("classify").with_fields("", &t.verdict));
            classified = true;
        }
        let p = format!("{op}.");
        let mut info = Record::info(format!("{p}summary"))
            .with("exists", t.exists)
            .with("a", t.a)
            .with("ridge_distance", t.ridge_distance)
            .with_fields("kink", &t.kink);
        if let Some(w) = t.witness {
            info = info.with_fields("witness", w);
        }
        if let Some(r) = &t.residual {
            info = info.with_fields("residual", r);
        }
        if let Some(n) = &t.neumann {
            info = info.with_fields("neumann", n);
        }
        report.push(info);
        for ch in &t.checks {
            let mut r = Record::check(format!("{p}{}", ch.name), ch.passed).with("value", ch.value).with("tolerance", ch.tolerance);
            if ch.name == "kink_witness" {
                r = r.with("max_depth", t.ridge_distance - 4.0 * s.grid.h);
            }
            report.push(r);
        }
        if op == OperatorKind::Classical && t.exists && starts > 0 {
            let sol = build_web(&s.grid, op)?;
            let runs = run_trajectories(&sol, &random_starts(&s.shape, starts, c.seed), 0.01)?;
            for r in trajectory_records(&p, &sol, &runs, c.tol_scale) {
                report.push(r);
            }
        }
    }
    Ok(Outcome { report, files: Vec::new() })
}

fn config_options(report: &mut Report, opts: &TheoremOptions) {
    if let Ok(Value::Object(m)) = serde_json::to_value(opts) {
        for (k, v) in m {
            report.config.insert(format!("verify.{k}"), v);
        }
    }
}

pub fn cmd_psweep(c: &Common, assert_monotone: bool) -> Result<Outcome> {
    let s = setup(c)?;
    let ps = parse_list(&c.ps)?;
    let qs = parse_list(&c.qs)?;
    let mut config = s.config;
    config.push(("ps", ps.clone().into()));
    config.push(("qs", qs.clone().into()));
    config.push(("assert_monotone", assert_monotone.into()));
    let mut report = Report::new("psweep", config_map(config));
    let rows = p_sweep(&s.grid, &ps, &qs)?;
    for r in &rows {
        report.push(Record::info(format!("p={}", r.p)).with_fields("", r));
    }
    report.push(Record::check("energy_below_distance", rows.iter().all(|r| r.energy <= r.energy_d)));
    report.push(Record::check("gradient_bounds", rows.iter().all(SweepRow::bounds_hold)));
    report.push(Record::info("converged").with("all", rows.iter().all(|r| r.converged)));
    if assert_monotone {
        let errs: Vec<f64> = rows.iter().map(|r| r.sup_err_vs_d).collect();
        report.push(Record::check("sup_error_decreasing", errs.windows(2).all(|w| w[1] < w[0])).with("sup_errors", errs));
    }
    let mut csv = SweepRow::csv_header(&qs) + "\n";
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    Ok(Outcome { report, files: vec![("psweep.csv".into(), csv)] })
}

pub fn cmd_web(c: &Common, a: Option<f64>) -> Result<Outcome> {
    let s = setup(c)?;
    let ops = ops_or(c, "classical")?;
    let [op] = ops[..] else {
        return Err(Error::Argument("web takes a single operator".into()));
    };
    let mut config = s.config;
    config.push(("operator", op.as_str().into()));
    config.push(("a_override", a.into()));
    let mut report = Report::new("web", config_map(config));
    let mut sol = match a {
        Some(a) => build_web_with_constant(&s.grid, op, a)?,
        None => build_web(&s.grid, op)?,
    };
    if op != OperatorKind::PLimit {
        sol.note_verdict(&classify_with(&s.grid, c.tol_scale)?);
    }
    report.push(
        Record::info("web")
            .with("a", sol.a)
            .with("rho", sol.rho)
            .with("theorem", sol.theorem)
            .with("max_value", sol.field.max_inside())
            .with("warnings", &sol.warnings),
    );
    Ok(Outcome { report, files: vec![(format!("web_{op}.txt"), sol.field.to_dump())] })
}

pub fn cmd_trajectory(c: &Common, start: Option<&str>, starts: usize, dt: f64) -> Result<Outcome> {
    let s = setup(c)?;
    let points = match start {
        Some(p) => vec![parse_point(p)?],
        None => random_starts(&s.shape, starts, c.seed),
    };
    let mut config = s.config;
    config.push(("start", start.into()));
    config.push(("starts", points.len().into()));
    config.push(("dt", dt.into()));
    let mut report = Report::new("trajectory", config_map(config));
    let sol = build_web(&s.grid, OperatorKind::Classical)?;
    let runs = run_trajectories(&sol, &points, dt)?;
    for r in trajectory_records("", &sol, &runs, c.tol_scale) {
        report.push(r);
    }
    let mut csv = String::from("start,t,x,y,gradsq,identity\n");
    for (n, (_, tr)) in runs.iter().enumerate() {
        for p in &tr.points {
            csv.push_str(&format!(
                "{n},{},{},{},{},{}\n",
                p.t,
                p.x.x,
                p.x.y,
                p.gradsq,
                sol.a * sol.a - 2.0 * p.t
            ));
        }
    }
    Ok(Outcome { report, files: vec![("trajectory.csv".into(), csv)] })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let started = Instant::now();
    let c = &cli.common;
    let mut out = match &cli.command {
        Command::Distance { exact } => cmd_distance(c, *exact),
        Command::Classify => cmd_classify(c),
        Command::Verify { starts } => cmd_verify(c, *starts),
        Command::Psweep { assert_monotone } => cmd_psweep(c, *assert_monotone),
        Command::Web { a } => cmd_web(c, *a),
        Command::Trajectory { start, starts, dt } => cmd_trajectory(c, start.as_deref(), *starts, *dt),
    }?;
    out.report.timing.insert("total_s".into(), started.elapsed().as_secs_f64());
    Ok(out)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("INFLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Argument(format!("INFLAB_THREADS must be a positive integer, got {v:?}")))?;
        // A pool may already exist when called twice in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write_outputs(cli: &Cli, out: &Outcome) -> Result<()> {
    let Some(dir) = &cli.common.out else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.txt"), out.report.to_text())?;
    std::fs::write(dir.join("report.json"), out.report.to_json())?;
    for (name, body) in &out.files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Runs the tool and returns the process exit status: 0 when every check
/// passes, 1 on a failed check, 2 on usage or configuration errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli)).and_then(|out| {
        write_outputs(&cli, &out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.report.to_text());
            if out.report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
