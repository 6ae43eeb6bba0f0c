//! Command-line front end: builds spaces, runs sweeps and property suites,
//! and emits CSV/JSON artifacts.
//!
//! Every run is deterministic from its flags and seed; artifacts carry a
//! metadata block echoing the configuration and the library version, and
//! contain no timestamps, so reruns are byte-identical. Exit codes: 0 on
//! success, 1 when a checked invariant is violated, 2 on invalid input or
//! an unwritable output path.

use clap::{Parser, Subcommand, ValueEnum};
use holonomic::transport::angle_difference;
use holonomic::{
    counterexample_space, fiber_distance, gauss_bonnet_residual, holonomy_angle, length_norm,
    length_norm_numeric, manifold_holonomy_radius, operator_norm, sphere_latitude_transport,
    suite::{run_property_suite, SuiteConfig},
    transport_rotation, GeodesicCircle, Matrix,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "holonomic",
    version,
    about = "Holonomic spaces: radii, length norms, transport checks, and property suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the closed-form length norm against the circle-family oracle
    SpaceformTable {
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        /// Number of angles in [-pi, pi]
        #[arg(long, default_value_t = 99)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Holonomy radius of the space form of curvature K
    Holrad {
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sweep the convexity and holonomy ratios of the two-frequency
    /// rotation family over t in [t_min, t_max]
    CounterexampleSweep {
        #[arg(long = "t-min")]
        t_min: f64,
        #[arg(long = "t-max")]
        t_max: f64,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Fiber distance on the sphere of curvature K between two plane vectors
    FiberDistance {
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        /// Comma-separated vector, e.g. "10,0"
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        u: Vec2,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        v: Vec2,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run every module invariant; fails fast with a serialized counterexample
    PropertySuite {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Random pairs/triples per sampled check
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Fiber sample resolution
        #[arg(long = "n-angles", default_value_t = 512)]
        n_angles: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the three holonomy oracles on geodesic circles
    TransportCheck {
        #[arg(long = "K", default_value_t = 1.0, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, default_value_t = 1024)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy)]
struct Vec2([f64; 2]);

fn parse_vec2(s: &str) -> Result<Vec2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got {s:?}"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    if !(x.is_finite() && y.is_finite()) {
        return Err("vector entries must be finite".into());
    }
    Ok(Vec2([x, y]))
}

enum CliError {
    /// Exit 2: bad input or unwritable output.
    Invalid(String),
    /// Exit 1: a checked invariant failed; carries the serialized witness.
    Violation(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(format!("i/o failure: {e}"))
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    let started = Instant::now();
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary} ({:.3}s)", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(CliError::Violation(witness)) => {
            eprintln!("invariant violation: {witness}");
            ExitCode::from(1)
        }
        Err(CliError::Invalid(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// HOLONOMIC_THREADS caps the worker count for internal sweeps; results are
/// identical for any setting.
fn init_thread_pool() {
    if let Ok(value) = std::env::var("HOLONOMIC_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

/// Config echo for artifact metadata; keys keep insertion order.
#[derive(Serialize)]
struct Meta {
    command: &'static str,
    version: &'static str,
    config: serde_json::Value,
}

fn meta(command: &'static str, config: serde_json::Value) -> Meta {
    Meta { command, version: env!("CARGO_PKG_VERSION"), config }
}

fn write_artifact(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn json_artifact<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s
}

/// CSV with '#'-prefixed metadata lines, '.' decimals, 17 significant digits.
fn csv_artifact(meta: &Meta, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# command = {}", meta.command);
    let _ = writeln!(out, "# version = {}", meta.version);
    if let Some(map) = meta.config.as_object() {
        for (key, value) in map {
            let _ = writeln!(out, "# {key} = {value}");
        }
    }
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .map(|x| if x.is_nan() { String::new() } else { format!("{x:.16e}") })
            .collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

fn default_path(command: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    PathBuf::from(format!("{command}.{ext}"))
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::SpaceformTable { k, grid, out, format } => spaceform_table(k, grid, out, format),
        Command::Holrad { k, out, format } => holrad(k, out, format),
        Command::CounterexampleSweep { t_min, t_max, grid, out, format } => {
            counterexample_sweep(t_min, t_max, grid, out, format)
        }
        Command::FiberDistance { k, u, v, out, format } => {
            fiber_distance_cmd(k, u, v, out, format)
        }
        Command::PropertySuite { seed, budget, n_angles, out } => {
            property_suite(seed, budget, n_angles, out)
        }
        Command::TransportCheck { k, steps, out } => transport_check(k, steps, out),
    }
}

fn spaceform_table(
    k: f64,
    grid: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<String, CliError> {
    if grid < 8 {
        return Err(CliError::Invalid(format!("grid must be at least 8, got {grid}")));
    }
    let meta = meta("spaceform-table", serde_json::json!({"K": k, "grid": grid}));
    let mut rows = Vec::with_capacity(grid);
    let mut max_err: f64 = 0.0;
    for i in 0..grid {
        let theta = -std::f64::consts::PI
            + std::f64::consts::TAU * i as f64 / (grid - 1) as f64;
        let closed = length_norm(k, theta).map_err(invalid)?;
        let numeric = length_norm_numeric(k, theta, 1024).map_err(invalid)?;
        let err = (closed - numeric.length).abs();
        max_err = max_err.max(err);
        rows.push(vec![k, theta, closed, numeric.length, err]);
    }
    let path = out.unwrap_or_else(|| default_path("spaceform-table", format));
    let contents = match format {
        Format::Csv => csv_artifact(&meta, &["K", "theta", "L_closed", "L_numeric", "abs_err"], &rows),
        Format::Json => {
            #[derive(Serialize)]
            struct Table {
                meta: Meta,
                max_abs_err: f64,
                rows: Vec<Vec<f64>>,
            }
            json_artifact(&Table { meta, max_abs_err: max_err, rows })
        }
    };
    write_artifact(&path, &contents)?;
    if max_err > 1e-8 {
        return Err(CliError::Violation(format!(
            "closed form vs circle-family oracle: max |err| = {max_err:.3e} > 1e-8"
        )));
    }
    Ok(format!(
        "spaceform-table: K={k}, {grid} angles, max |L_closed - L_numeric| = {max_err:.2e}, wrote {}",
        path.display()
    ))
}

fn holrad(k: f64, out: Option<PathBuf>, format: Format) -> Result<String, CliError> {
    let estimate = manifold_holonomy_radius(k).map_err(invalid)?;
    let meta = meta("holrad", serde_json::json!({"K": k}));
    let path = out.unwrap_or_else(|| default_path("holrad", format));
    let contents = match format {
        Format::Csv => csv_artifact(
            &meta,
            &["K", "holrad", "theta_star"],
            &[vec![k, estimate.value, estimate.theta_star]],
        ),
        Format::Json => {
            #[derive(Serialize)]
            struct Report {
                meta: Meta,
                #[serde(rename = "K")]
                k: f64,
                holrad: f64,
                theta_star: f64,
            }
            json_artifact(&Report { meta, k, holrad: estimate.value, theta_star: estimate.theta_star })
        }
    };
    write_artifact(&path, &contents)?;
    if !(estimate.value.is_finite() && estimate.value > 0.0) {
        return Err(CliError::Violation(format!(
            "holonomy radius must be positive and finite, got {}",
            estimate.value
        )));
    }
    Ok(format!(
        "holrad: K={k}, radius = {:.6} at theta* = {:.4}, wrote {}",
        estimate.value,
        estimate.theta_star,
        path.display()
    ))
}

fn counterexample_sweep(
    t_min: f64,
    t_max: f64,
    grid: usize,
    out: Option<PathBuf>,
    format: Format,
) -> Result<String, CliError> {
    if grid < 8 {
        return Err(CliError::Invalid(format!("grid must be at least 8, got {grid}")));
    }
    let space = counterexample_space(t_min, t_max).map_err(invalid)?;
    let family = space.family().expect("counterexample space is family-backed");
    let identity = Matrix::identity(4);

    // ascending in t, so the artifact ordering is fixed
    let rows: Vec<Vec<f64>> = (0..grid)
        .map(|i| {
            let t = t_min + (t_max - t_min) * i as f64 / (grid - 1) as f64;
            let element = family.element_at(t).expect("family elements are orthogonal");
            let sigma = operator_norm(&identity.sub(element.matrix()))
                .expect("difference is finite");
            let l = family.l_at(t);
            vec![t, l, sigma, l / sigma, l / (2.0 * sigma).sqrt()]
        })
        .collect();

    let (mut min_cvx, mut cvx_at) = (f64::INFINITY, f64::NAN);
    let (mut min_hol, mut hol_at) = (f64::INFINITY, f64::NAN);
    for row in &rows {
        if row[3] < min_cvx {
            min_cvx = row[3];
            cvx_at = row[0];
        }
        if row[4] < min_hol {
            min_hol = row[4];
            hol_at = row[0];
        }
    }

    let meta = meta(
        "counterexample-sweep",
        serde_json::json!({"t_min": t_min, "t_max": t_max, "grid": grid}),
    );
    let path = out.unwrap_or_else(|| default_path("counterexample-sweep", format));
    let contents = match format {
        Format::Csv => csv_artifact(
            &meta,
            &["t", "L", "opnorm_id_minus_a", "ratio_cvx", "ratio_hol"],
            &rows,
        ),
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                meta: Meta,
                min_ratio_cvx: f64,
                min_ratio_cvx_at: f64,
                min_ratio_hol: f64,
                min_ratio_hol_at: f64,
            }
            json_artifact(&Summary {
                meta,
                min_ratio_cvx: min_cvx,
                min_ratio_cvx_at: cvx_at,
                min_ratio_hol: min_hol,
                min_ratio_hol_at: hol_at,
            })
        }
    };
    write_artifact(&path, &contents)?;
    // the convexity ratio is bounded below by 1/sqrt(2) for this family
    if min_cvx < std::f64::consts::FRAC_1_SQRT_2 - 1e-9 {
        return Err(CliError::Violation(format!(
            "convexity ratio dipped below 1/sqrt(2): {min_cvx}"
        )));
    }
    Ok(format!(
        "counterexample-sweep: min L/||id-a|| = {min_cvx:.6} (t={cvx_at:.3e}), \
         min L/sqrt(2||id-a||) = {min_hol:.4e} (t={hol_at:.3e}), wrote {}",
        path.display()
    ))
}

fn fiber_distance_cmd(
    k: f64,
    u: Vec2,
    v: Vec2,
    out: Option<PathBuf>,
    format: Format,
) -> Result<String, CliError> {
    let report = fiber_distance(k, &u.0, &v.0).map_err(invalid)?;
    let meta = meta(
        "fiber-distance",
        serde_json::json!({"K": k, "u": u.0.to_vec(), "v": v.0.to_vec()}),
    );
    let path = out.unwrap_or_else(|| default_path("fiber-distance", format));
    let contents = match format {
        Format::Csv => csv_artifact(
            &meta,
            &["K", "u0", "u1", "v0", "v1", "d", "theta_star"],
            &[vec![k, u.0[0], u.0[1], v.0[0], v.0[1], report.d, report.theta_star]],
        ),
        Format::Json => {
            #[derive(Serialize)]
            struct Report {
                meta: Meta,
                #[serde(rename = "K")]
                k: f64,
                u: Vec<f64>,
                v: Vec<f64>,
                d: f64,
                theta_star: f64,
            }
            json_artifact(&Report {
                meta,
                k,
                u: report.u.clone(),
                v: report.v.clone(),
                d: report.d,
                theta_star: report.theta_star,
            })
        }
    };
    write_artifact(&path, &contents)?;
    let euclid = ((u.0[0] - v.0[0]).powi(2) + (u.0[1] - v.0[1]).powi(2)).sqrt();
    if report.d > euclid + 1e-12 {
        return Err(CliError::Violation(format!(
            "fiber distance {} exceeds the Euclidean distance {euclid}",
            report.d
        )));
    }
    Ok(format!(
        "fiber-distance: K={k}, d = {:.9} at theta* = {:.6}, wrote {}",
        report.d,
        report.theta_star,
        path.display()
    ))
}

fn property_suite(
    seed: u64,
    budget: usize,
    n_angles: usize,
    out: Option<PathBuf>,
) -> Result<String, CliError> {
    if budget == 0 {
        return Err(CliError::Invalid("budget must be at least 1".into()));
    }
    if n_angles < 8 {
        return Err(CliError::Invalid(format!("n-angles must be at least 8, got {n_angles}")));
    }
    let config = SuiteConfig { seed, pair_budget: budget, triple_budget: budget, n_angles };
    let results = run_property_suite(&config);
    let meta = meta(
        "property-suite",
        serde_json::json!({"seed": seed, "budget": budget, "n_angles": n_angles}),
    );
    #[derive(Serialize)]
    struct Report<'a> {
        meta: Meta,
        passed: usize,
        failed: usize,
        checks: &'a [holonomic::suite::CheckResult],
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    let path = out.unwrap_or_else(|| default_path("property-suite", Format::Json));
    write_artifact(
        &path,
        &json_artifact(&Report {
            meta,
            passed: results.iter().filter(|r| r.passed).count(),
            failed: failed.len(),
            checks: &results,
        }),
    )?;
    if let Some(first) = failed.first() {
        let witness = serde_json::to_string_pretty(first).expect("check serializes");
        return Err(CliError::Violation(witness));
    }
    Ok(format!(
        "property-suite: {} checks passed (seed {seed}, budget {budget}), wrote {}",
        results.len(),
        path.display()
    ))
}

fn transport_check(k: f64, steps: usize, out: Option<PathBuf>) -> Result<String, CliError> {
    if k == 0.0 || !k.is_finite() {
        return Err(CliError::Invalid("K must be nonzero and finite".into()));
    }
    if steps < 16 {
        return Err(CliError::Invalid(format!("steps must be at least 16, got {steps}")));
    }
    let radii: Vec<f64> = if k > 0.0 {
        let pi = std::f64::consts::PI;
        [pi / 6.0, pi / 4.0, pi / 3.0, pi / 2.0]
            .iter()
            .map(|r| r / k.sqrt())
            .collect()
    } else {
        [0.25, 0.5, 1.0, 2.0].iter().map(|r| r / k.abs().sqrt()).collect()
    };

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &r in &radii {
        let circle = GeodesicCircle::new(k, r).map_err(invalid)?;
        let spec = circle.loop_spec();
        let ode = transport_rotation(&spec, steps).map_err(invalid)?;
        let gb = holonomy_angle(&spec, steps).map_err(invalid)?;
        // the extrinsic integrator lives on the unit sphere only
        let extrinsic = if (k - 1.0).abs() < 1e-15 {
            sphere_latitude_transport(r, 4 * steps).map_err(invalid)?
        } else {
            f64::NAN
        };
        let residual = gauss_bonnet_residual(&circle);
        worst = worst.max(angle_difference(ode.rotation, gb).abs());
        if extrinsic.is_finite() {
            worst = worst.max(angle_difference(gb, extrinsic).abs());
        }
        worst = worst.max(residual.abs());
        rows.push(vec![
            k,
            r,
            circle.circumference(),
            ode.curvature_integral,
            ode.rotation,
            gb,
            extrinsic,
            residual,
        ]);
    }

    let meta = meta("transport-check", serde_json::json!({"K": k, "steps": steps}));
    let path = out.unwrap_or_else(|| default_path("transport-check", Format::Csv));
    write_artifact(
        &path,
        &csv_artifact(
            &meta,
            &["K", "r", "ell", "int_k", "theta_ode", "theta_gb", "theta_extrinsic", "residual"],
            &rows,
        ),
    )?;
    if worst > 1e-6 {
        return Err(CliError::Violation(format!(
            "holonomy oracles disagree by {worst:.3e} > 1e-6"
        )));
    }
    Ok(format!(
        "transport-check: K={k}, {} radii, worst oracle gap {worst:.2e}, wrote {}",
        radii.len(),
        path.display()
    ))
}
