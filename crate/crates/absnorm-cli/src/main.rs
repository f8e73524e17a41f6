//! Command-line front end: parse norm and space specs, dispatch the
//! computations, and emit structured reports (JSON) or curve data (CSV).
//!
//! Exit status: 0 on success (including vacuous checks), 1 when a
//! verification check fails, 2 on usage, parse, or computation errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use absnorm::bm::{bm_upper, operator_norm, LinearMap};
use absnorm::dual::{bidual_check, dual};
use absnorm::geometry::{asq_obstruction, classify_extremes, norm_profile, ExtremeClass, GeomError, NormProfile};
use absnorm::norm2::AbsoluteNorm;
use absnorm::space::{
    default_resolution, s_modulus, slice_diameter, FiniteSpace, Interval, ModuliReport,
    SliceQuery,
};
use absnorm::specfile::{NormSpec, SpaceSpec};
use absnorm::verify::{
    check_asq_impossible, check_prop_loh, check_sum_lasq_transfer, Verdict, VerificationReport,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

mod report;
mod suite;

use report::{digest_file, emit, fmt12, Envelope};

#[derive(Parser)]
#[command(
    name = "absnorm",
    version,
    about = "Geometry of absolute normalised norms on the plane and of direct sums built from them"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Scalar geometry summary of a plane norm
    Profile(ProfileArgs),
    /// Sample the upper boundary curve of the unit ball to CSV
    Curve(CurveArgs),
    /// Dual norm, with a double-dual round-trip check
    Dual(DualArgs),
    /// Octahedrality threshold of a plane norm
    R(RArgs),
    /// Certified moduli brackets of a finite-dimensional space
    Moduli(ModuliArgs),
    /// Certified slice-diameter bracket
    Slice(SliceArgs),
    /// Verification checks on two-summand direct sums
    SumCheck(SumCheckArgs),
    /// Banach-Mazur distance upper bound between two spaces
    Bm(BmArgs),
    /// Run a manifest of checks and write one report per check plus a summary
    Suite(SuiteArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Norm spec file (JSON)
    spec: PathBuf,
    /// Bisection tolerance for thresholds and boundary values
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Grid resolution for witness searches
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Norm spec file (JSON)
    spec: PathBuf,
    /// Number of grid intervals on [0, 1]; emits resolution + 1 rows
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Bisection tolerance per sample
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// CSV file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DualArgs {
    /// Norm spec file (JSON)
    spec: PathBuf,
    /// Table resolution for numeric duals
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RArgs {
    /// Norm spec file (JSON)
    spec: PathBuf,
    /// Bisection tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModuliArgs {
    /// Space spec file (JSON)
    spec: PathBuf,
    /// Sphere cover resolution (a dimension-dependent default when absent)
    #[arg(long)]
    resolution: Option<usize>,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    /// Space spec file (JSON)
    spec: PathBuf,
    /// Functional coordinates, comma separated
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    functional: Vec<f64>,
    /// Slice depth in (0, 2)
    #[arg(long)]
    eps: f64,
    /// Sphere cover resolution (a dimension-dependent default when absent)
    #[arg(long)]
    resolution: Option<usize>,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SumClaim {
    /// Doubling directions push every vector of the first summand outward
    Pushout,
    /// The first summand's defect transfers to the sum
    Transfer,
    /// The sum is never almost square
    Square,
}

#[derive(Args)]
struct SumCheckArgs {
    /// Which direct-sum claim to verify
    #[arg(long, value_enum)]
    claim: SumClaim,
    /// Space spec of the first summand
    #[arg(long)]
    left: PathBuf,
    /// Space spec of the second summand
    #[arg(long)]
    right: PathBuf,
    /// Norm spec combining the summands
    #[arg(long)]
    norm: PathBuf,
    /// Doubling slack (pushout claim)
    #[arg(long)]
    eps: Option<f64>,
    /// Defect level (transfer claim)
    #[arg(long)]
    mu: Option<f64>,
    /// Sphere cover resolution (a claim-dependent default when absent)
    #[arg(long)]
    resolution: Option<usize>,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BmArgs {
    /// Space spec of the source
    #[arg(long)]
    left: PathBuf,
    /// Space spec of the target
    #[arg(long)]
    right: PathBuf,
    /// Inline row-major matrix "a,b;c,d": certify this map instead of searching
    #[arg(long, allow_hyphen_values = true)]
    map: Option<String>,
    /// Search restarts
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Certification cover resolution
    #[arg(long, default_value_t = 1 << 20)]
    resolution: usize,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Manifest file (JSON)
    #[arg(long)]
    manifest: PathBuf,
    /// Override the manifest's output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    if let Ok(raw) = std::env::var("ABSNORM_THREADS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .with_context(|| format!("ABSNORM_THREADS must be a positive integer, got {raw:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("installing the worker pool")?;
    }
    let cli = Cli::parse();
    match cli.verb {
        Verb::Profile(a) => cmd_profile(a),
        Verb::Curve(a) => cmd_curve(a),
        Verb::Dual(a) => cmd_dual(a),
        Verb::R(a) => cmd_r(a),
        Verb::Moduli(a) => cmd_moduli(a),
        Verb::Slice(a) => cmd_slice(a),
        Verb::SumCheck(a) => cmd_sum_check(a),
        Verb::Bm(a) => cmd_bm(a),
        Verb::Suite(a) => suite::run_suite(&a.manifest, a.out.as_deref()),
    }
}

fn load_norm(path: &Path) -> Result<AbsoluteNorm> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: NormSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    spec.to_norm()
        .with_context(|| format!("building the norm from {}", path.display()))
}

fn load_space(path: &Path) -> Result<FiniteSpace> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: SpaceSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    spec.to_space()
        .with_context(|| format!("building the space from {}", path.display()))
}

#[derive(Serialize)]
struct ProfileBody {
    profile: NormProfile,
    class: Option<ExtremeClass>,
    asq_obstruction: Option<f64>,
    /// Per-field computation problems; the rest of the profile stands.
    notes: Vec<String>,
}

fn cmd_profile(a: ProfileArgs) -> Result<ExitCode> {
    let f = load_norm(&a.spec)?;
    let profile = norm_profile(&f, a.tol, a.resolution);
    let mut notes = Vec::new();
    let class = match classify_extremes(&f, 256) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("classification: {e}"));
            None
        }
    };
    let asq = match asq_obstruction(&f) {
        Ok(v) => Some(v),
        Err(GeomError::InfinityNormExcluded) => {
            notes.push("asq_obstruction: excluded (the max norm has square sums)".into());
            None
        }
        Err(e) => {
            notes.push(format!("asq_obstruction: {e}"));
            None
        }
    };
    let body = ProfileBody {
        profile,
        class,
        asq_obstruction: asq,
        notes,
    };
    let envelope = Envelope::new(
        vec![digest_file(&a.spec)?],
        params(&[("tol", json!(a.tol)), ("resolution", json!(a.resolution))]),
        body,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_curve(a: CurveArgs) -> Result<ExitCode> {
    if a.resolution < 2 {
        bail!("curve needs --resolution >= 2, got {}", a.resolution);
    }
    let f = load_norm(&a.spec)?;
    let n = a.resolution;
    let mut csv = String::from("t,f\n");
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let v = f.boundary(t, a.tol);
        csv.push_str(&fmt12(t));
        csv.push(',');
        csv.push_str(&fmt12(v));
        csv.push('\n');
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DualBody {
    /// "polygon" for exact polygonal duals, "table" for numeric ones.
    kind: &'static str,
    vertices: Option<Vec<[f64; 2]>>,
    round_trip: VerificationReport,
}

fn cmd_dual(a: DualArgs) -> Result<ExitCode> {
    let f = load_norm(&a.spec)?;
    if a.resolution < 8 {
        bail!("dual needs --resolution >= 8, got {}", a.resolution);
    }
    let d = dual(&f, a.resolution);
    let vertices = d.as_polygon();
    let body = DualBody {
        kind: if vertices.is_some() { "polygon" } else { "table" },
        vertices,
        round_trip: bidual_check(&f, a.resolution),
    };
    let envelope = Envelope::new(
        vec![digest_file(&a.spec)?],
        params(&[("resolution", json!(a.resolution))]),
        body,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RBody {
    r_f: f64,
    r_f_swapped: f64,
    class: Option<ExtremeClass>,
    notes: Vec<String>,
}

fn cmd_r(a: RArgs) -> Result<ExitCode> {
    let f = load_norm(&a.spec)?;
    let mut notes = Vec::new();
    let class = match classify_extremes(&f, 256) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("classification: {e}"));
            None
        }
    };
    let body = RBody {
        r_f: absnorm::geometry::r_of(&f, a.tol),
        r_f_swapped: absnorm::geometry::r_of(&f.swap(), a.tol),
        class,
        notes,
    };
    let envelope = Envelope::new(
        vec![digest_file(&a.spec)?],
        params(&[("tol", json!(a.tol))]),
        body,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_moduli(a: ModuliArgs) -> Result<ExitCode> {
    let space = load_space(&a.spec)?;
    let res = a.resolution.unwrap_or_else(|| default_resolution(space.dim()));
    let body: ModuliReport = s_modulus(&space, res)?;
    let envelope = Envelope::new(
        vec![digest_file(&a.spec)?],
        params(&[("resolution", json!(res))]),
        body,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SliceBody {
    functional: Vec<f64>,
    eps: f64,
    diameter: Interval,
}

fn cmd_slice(a: SliceArgs) -> Result<ExitCode> {
    let space = load_space(&a.spec)?;
    let res = a.resolution.unwrap_or_else(|| default_resolution(space.dim()));
    let query = SliceQuery {
        functional: a.functional.clone(),
        eps: a.eps,
    };
    let diameter = slice_diameter(&space, &query, res)?;
    let body = SliceBody {
        functional: a.functional,
        eps: a.eps,
        diameter,
    };
    let envelope = Envelope::new(
        vec![digest_file(&a.spec)?],
        params(&[("eps", json!(a.eps)), ("resolution", json!(res))]),
        body,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sum_check(a: SumCheckArgs) -> Result<ExitCode> {
    let left = load_space(&a.left)?;
    let right = load_space(&a.right)?;
    let norm = load_norm(&a.norm)?;
    let mut p = Map::new();
    let report = match a.claim {
        SumClaim::Pushout => {
            let Some(eps) = a.eps else {
                bail!("the pushout claim needs --eps");
            };
            let res = a.resolution.unwrap_or(1_800_000);
            p.insert("claim".into(), "sum-pushout".into());
            p.insert("eps".into(), json!(eps));
            p.insert("resolution".into(), json!(res));
            check_prop_loh(&left, &right, &norm, eps, res)?
        }
        SumClaim::Transfer => {
            let Some(mu) = a.mu else {
                bail!("the transfer claim needs --mu");
            };
            let res = a.resolution.unwrap_or(40_000);
            p.insert("claim".into(), "sum-defect-transfer".into());
            p.insert("mu".into(), json!(mu));
            p.insert("resolution".into(), json!(res));
            check_sum_lasq_transfer(&left, &right, &norm, mu, res)?
        }
        SumClaim::Square => {
            let res = a.resolution.unwrap_or(20_000);
            p.insert("claim".into(), "sum-never-square".into());
            p.insert("resolution".into(), json!(res));
            check_asq_impossible(&left, &right, &norm, res)?
        }
    };
    let failed = report.verdict == Verdict::Fail;
    let envelope = Envelope::new(
        vec![
            digest_file(&a.left)?,
            digest_file(&a.right)?,
            digest_file(&a.norm)?,
        ],
        p,
        report,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
#[serde(untagged)]
enum BmBody {
    Search {
        upper_bound: f64,
        restarts: usize,
    },
    Certify {
        map: Vec<Vec<f64>>,
        forward: Interval,
        backward: Interval,
        distortion: f64,
    },
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad matrix entry {cell:?}"))
                })
                .collect()
        })
        .collect()
}

fn cmd_bm(a: BmArgs) -> Result<ExitCode> {
    let left = load_space(&a.left)?;
    let right = load_space(&a.right)?;
    let mut p = Map::new();
    p.insert("resolution".into(), json!(a.resolution));
    let body = match &a.map {
        Some(text) => {
            let rows = parse_matrix(text)?;
            let map = LinearMap::new(rows.clone())?;
            let forward = operator_norm(&map, &left, &right, a.resolution)?;
            let backward = operator_norm(&map.inverse()?, &right, &left, a.resolution)?;
            p.insert("map".into(), json!(rows));
            BmBody::Certify {
                map: rows,
                distortion: forward.hi * backward.hi,
                forward,
                backward,
            }
        }
        None => {
            p.insert("restarts".into(), json!(a.restarts));
            BmBody::Search {
                upper_bound: bm_upper(&left, &right, a.restarts, a.resolution)?,
                restarts: a.restarts,
            }
        }
    };
    let envelope = Envelope::new(
        vec![digest_file(&a.left)?, digest_file(&a.right)?],
        p,
        body,
    );
    emit(a.out.as_deref(), &envelope.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}
