//! The `k3walls` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 a scan that could
//! not certify its answer within the given bounds.

pub mod render;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use k3walls_core::classify::{
    classify_wall, hyperbolic_lattice, minimal_class, positivity_report, EffectivenessContext, MinimalClass,
    WallClassification, WallKind,
};
use k3walls_core::duality::{
    check_conditions, make_pair, propex_step_a, propex_step_b, sweep, SDStatus, StepB, SweepRow, Verdict,
};
use k3walls_core::mukai::{pairing, reflect, twist, DivisorClass, MukaiVector};
use k3walls_core::quad::{parse_rational, QuadExt};
use k3walls_core::slice::{ChargeConvention, SliceSpec};
use k3walls_core::tower::{
    arcara_miles_wall, build_tower, closed_form_v, default_ray, eq9_solutions, first_wall_scan, persistence_slice,
    scan_slice, spherical_s, v1_scan, ScanReport, ScanStatus, TowerLevel, TowerSpec,
};
use k3walls_core::wall::{is_nested, t_intercept_sq, wall_locus, Wall, WallGeometry};
use k3walls_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Svg,
    Csv,
}

/// `K` or `R,K`: rank bound `R` and coefficient bound `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub rank: Option<i64>,
    pub coeff: i64,
}

fn parse_bounds(s: &str) -> Result<Bounds, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let int = |i: usize, p: &str| -> Result<i64, String> {
        p.trim()
            .parse::<i64>()
            .map_err(|_| format!("bound {} ({p:?}) is not an integer", i + 1))
    };
    let b = match parts.as_slice() {
        [k] => Bounds {
            rank: None,
            coeff: int(0, k)?,
        },
        [r, k] => Bounds {
            rank: Some(int(0, r)?),
            coeff: int(1, k)?,
        },
        _ => return Err(format!("expected K or R,K, got {s:?}")),
    };
    if b.coeff < 1 || b.rank.is_some_and(|r| r < 1) {
        return Err(format!("bounds must be positive, got {s:?}"));
    }
    Ok(b)
}

fn parse_ints<const N: usize>(s: &str, what: &str) -> Result<[i64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!(
            "{what} needs {N} comma-separated integers, got {} in {s:?}",
            parts.len()
        ));
    }
    let mut out = [0; N];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse()
            .map_err(|_| format!("component {} of {s:?} ({p:?}) is not an integer", i + 1))?;
    }
    Ok(out)
}

fn parse_vector(s: &str) -> Result<MukaiVector, String> {
    let [r, a, b, t] = parse_ints::<4>(s, "a Mukai vector r,alpha,beta,s")?;
    Ok(MukaiVector::from_coords(r, a, b, t))
}

fn parse_divisor(s: &str) -> Result<DivisorClass, String> {
    let [a, b] = parse_ints::<2>(s, "a divisor alpha,beta")?;
    Ok(DivisorClass::new(a, b))
}

fn parse_rat(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "k3walls",
    version,
    about = "Exact wall-crossing on the Mukai lattice of an elliptic K3"
)]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Enumeration bounds, `K` or `R,K`.
    #[arg(long, global = true, value_parser = parse_bounds)]
    pub bounds: Option<Bounds>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mukai pairing of two vectors.
    Pair(PairArgs),
    /// Twist a vector by a line bundle.
    Twist(TwistArgs),
    /// Reflect a vector in a spherical class.
    Reflect(ReflectArgs),
    /// The potential wall of `v` caused by `w`.
    Wall(WallArgs),
    /// Classify the wall of `v` defined by `w`.
    Classify(WallArgs),
    /// The tower `v_r` with its walls.
    Tower(TowerArgs),
    /// First totally semistable wall of `I_Z` (or of `I_Z(C)` with `--v1`).
    Firstwall(FirstwallArgs),
    /// Solutions of `−(m−1)k² + n + k(m−n) = r(r+1)`.
    Eq9(Eq9Args),
    /// Strange duality conditions for a pair, or a sweep.
    Sd(SdArgs),
    /// SVG pictures.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub v: MukaiVector,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub w: MukaiVector,
}

#[derive(Debug, Args)]
pub struct TwistArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub v: MukaiVector,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_divisor)]
    pub d: DivisorClass,
}

#[derive(Debug, Args)]
pub struct ReflectArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub v: MukaiVector,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub s: MukaiVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Mukai,
    Chern,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    /// Polarization `c + mf`; may be rational.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rat)]
    pub m: BigRational,
    /// Use `H = c + mf` rather than `H/√(2m−2)`.
    #[arg(long)]
    pub unnormalized: bool,
    #[arg(long, value_enum, default_value = "mukai")]
    pub convention: Convention,
}

impl SliceArgs {
    fn slice(&self) -> Result<SliceSpec, Error> {
        let conv = match self.convention {
            Convention::Mukai => ChargeConvention::Mukai,
            Convention::Chern => ChargeConvention::Chern,
        };
        Ok(SliceSpec::with_rational_m(self.m.clone(), !self.unnormalized)?.with_convention(conv))
    }
}

#[derive(Debug, Args)]
pub struct WallArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub v: MukaiVector,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub w: MukaiVector,
    #[command(flatten)]
    pub slice: SliceArgs,
}

#[derive(Debug, Args)]
pub struct TowerArgs {
    #[arg(long)]
    pub n: i64,
    #[arg(long)]
    pub m: i64,
    /// Top rank.
    #[arg(long = "R", alias = "top-rank")]
    pub top_rank: i64,
}

#[derive(Debug, Args)]
pub struct FirstwallArgs {
    #[arg(long)]
    pub n: i64,
    /// Vertical ray `u`; defaults to the apex of the `O(−C)` wall.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rat)]
    pub u: Option<BigRational>,
    /// Scan `v₁ = v(I_Z(C))` on `P_m` instead.
    #[arg(long)]
    pub v1: bool,
    #[arg(long, requires = "v1")]
    pub m: Option<i64>,
}

#[derive(Debug, Args)]
pub struct Eq9Args {
    #[arg(long, default_value_t = 40)]
    pub m_max: i64,
    #[arg(long, default_value_t = 30)]
    pub n_max: i64,
    #[arg(long, default_value_t = 5)]
    pub r_max: i64,
    #[arg(long, default_value_t = 10)]
    pub k_max: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Step {
    A,
    B,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct SdArgs {
    #[command(subcommand)]
    pub sweep: Option<SdCommand>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<i64>,
    /// Also apply a wall-hitting step to the pair.
    #[arg(long, value_enum)]
    pub step: Option<Step>,
}

#[derive(Debug, Subcommand)]
pub enum SdCommand {
    /// Verdicts over `0 ≤ r, s ≤ rs-max` and `pq-min ≤ p, q ≤ pq-max`.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub rs_max: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub pq_min: i64,
    /// Defaults to `−pq-min`.
    #[arg(long, allow_hyphen_values = true)]
    pub pq_max: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Picture {
    /// Nested tower walls with a vertical ray.
    Tower,
    /// Surviving first-wall candidates of `I_Z` along the scan ray.
    Firstwall,
    /// Spherical classes of a tower wall lattice.
    Hyperbola,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, value_enum)]
    pub kind: Picture,
    #[arg(long)]
    pub n: i64,
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long = "R", alias = "top-rank")]
    pub top_rank: Option<i64>,
    /// Level of the tower wall for the hyperbola view.
    #[arg(long)]
    pub r: Option<i64>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Rendered output with the exit code it should produce.
pub struct Output {
    pub body: String,
    pub code: i32,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, code: EXIT_OK }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn unsupported(cmd: &str, f: Format) -> Failure {
    usage(format!("{cmd} does not support --format {f:?}").to_lowercase())
}

fn geometry_text(g: &WallGeometry) -> String {
    match g {
        WallGeometry::Semicircle { center, radius_sq } => format!("semicircle center {center}, radius^2 {radius_sq}"),
        WallGeometry::Vertical { u0 } => format!("vertical u = {u0}"),
        WallGeometry::Empty => "empty".into(),
        WallGeometry::Everywhere => "everywhere".into(),
    }
}

fn cmd_vector(format: Format, name: &str, v: &MukaiVector) -> Result<Output, Failure> {
    match format {
        Format::Json => Ok(Output::ok(json(v))),
        Format::Text => Ok(Output::ok(format!("{v}\n"))),
        f => Err(unsupported(name, f)),
    }
}

#[derive(Serialize)]
struct WallReport<'a> {
    v: MukaiVector,
    w: MukaiVector,
    slice: &'a SliceSpec,
    wall: Wall,
    t_intercept_sq: Option<QuadExt>,
}

fn cmd_wall(format: Format, args: &WallArgs) -> Result<Output, Failure> {
    let slice = args.slice.slice()?;
    let wall = wall_locus(&args.v, &args.w, &slice)?;
    let report = WallReport {
        v: args.v,
        w: args.w,
        slice: &slice,
        t_intercept_sq: t_intercept_sq(&wall.geometry),
        wall,
    };
    match format {
        Format::Json => Ok(Output::ok(json(&report))),
        Format::Text => {
            let q = &report.wall.quadratic;
            let mut s = format!("({})(u^2 + t^2) + ({})u + ({}) = 0\n", q.a, q.b, q.c);
            writeln!(s, "{}", geometry_text(&report.wall.geometry)).unwrap();
            if let Some(t) = &report.t_intercept_sq {
                writeln!(s, "t-intercept t^2 = {t}").unwrap();
            }
            Ok(Output::ok(s))
        }
        Format::Svg => Ok(Output::ok(render::render_walls(
            std::slice::from_ref(&report.wall.geometry),
            &[],
            &format!("wall of {} caused by {}", args.v, args.w),
        ))),
        f => Err(unsupported("wall", f)),
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    wall: Wall,
    basis: [MukaiVector; 2],
    gram: [[i64; 2]; 2],
    classification: WallClassification,
    minimal_class: Option<MinimalClass>,
}

fn cmd_classify(format: Format, bounds: Option<Bounds>, args: &WallArgs) -> Result<Output, Failure> {
    let slice = args.slice.slice()?;
    let bound = bounds.map_or(30, |b| b.coeff);
    let wall = wall_locus(&args.v, &args.w, &slice)?;
    let h = hyperbolic_lattice(&args.v, &args.w)?;
    let ctx = EffectivenessContext::on_wall(&wall.geometry, args.v, &slice)?;
    let classification = classify_wall(&args.v, &h, &ctx, &slice, bound)?;
    let minimal = if classification.kind == WallKind::Spherical {
        Some(minimal_class(&args.v, &h, &ctx, &slice, bound)?)
    } else {
        None
    };
    let report = ClassifyReport {
        wall,
        basis: h.basis,
        gram: h.gram,
        classification,
        minimal_class: minimal,
    };
    match format {
        Format::Json => Ok(Output::ok(json(&report))),
        Format::Text => {
            let c = &report.classification;
            let mut s = format!("wall: {}\n", geometry_text(&report.wall.geometry));
            writeln!(s, "lattice basis: {}, {}", report.basis[0], report.basis[1]).unwrap();
            writeln!(
                s,
                "totally semistable: {}",
                if c.totally_semistable { "yes" } else { "no" }
            )
            .unwrap();
            writeln!(s, "kind: {:?}", c.kind).unwrap();
            for w in &c.witnesses {
                writeln!(s, "witness: {w}").unwrap();
            }
            if let Some(m) = &report.minimal_class {
                writeln!(s, "minimal class: {} after {} reflection(s)", m.v0, m.reflections.len()).unwrap();
            }
            Ok(Output::ok(s))
        }
        f => Err(unsupported("classify", f)),
    }
}

#[derive(Serialize)]
struct TowerRow {
    #[serde(flatten)]
    level: TowerLevel,
    t_intercept_sq: Option<QuadExt>,
    /// `W_{r−1}` lies inside `W_r`; vacuous at `r = 1`.
    nested: Option<bool>,
    arcara_miles: Wall,
}

#[derive(Serialize)]
struct TowerReport {
    spec: TowerSpec,
    ray: Option<QuadExt>,
    levels: Vec<TowerRow>,
}

fn tower_report(spec: &TowerSpec) -> Result<TowerReport, Failure> {
    let levels = build_tower(spec)?;
    let mut rows: Vec<TowerRow> = Vec::new();
    for level in levels {
        let nested = match rows.last() {
            None => None,
            Some(prev) => is_nested(&prev.level.wall.geometry, &level.wall.geometry).ok(),
        };
        rows.push(TowerRow {
            t_intercept_sq: t_intercept_sq(&level.wall.geometry),
            nested,
            arcara_miles: arcara_miles_wall(spec, level.r)?,
            level,
        });
    }
    // the ray through the apex of W₁ meets every wall nesting around it
    let ray = rows.first().and_then(|r| r.level.wall.geometry.apex()).map(|p| p.u);
    Ok(TowerReport {
        spec: *spec,
        ray,
        levels: rows,
    })
}

fn tower_svg(report: &TowerReport) -> String {
    let walls: Vec<WallGeometry> = report.levels.iter().map(|l| l.level.wall.geometry.clone()).collect();
    let rays: Vec<QuadExt> = report.ray.iter().cloned().collect();
    let s = report.spec;
    let title = match s.top_rank {
        0 => format!("empty tower for n = {}, m = {}", s.n, s.m),
        r => format!("tower walls W_1..W_{r} for n = {}, m = {}", s.n, s.m),
    };
    render::render_walls(&walls, &rays, &title)
}

fn cmd_tower(format: Format, args: &TowerArgs) -> Result<Output, Failure> {
    let spec = TowerSpec::new(args.n, args.m, args.top_rank)?;
    let report = tower_report(&spec)?;
    match format {
        Format::Json => Ok(Output::ok(json(&report))),
        Format::Text => {
            let mut s = String::new();
            for row in &report.levels {
                let l = &row.level;
                let nested = match row.nested {
                    None | Some(true) => "yes",
                    Some(false) => "no",
                };
                let t = row.t_intercept_sq.as_ref().map_or("-".to_string(), |t| t.to_string());
                writeln!(
                    s,
                    "r = {}  v_r = {}  s_(r-1) = {}  wall: {}  t^2 = {}  nested: {}",
                    l.r,
                    l.v_r,
                    spherical_s(l.r - 1),
                    geometry_text(&l.wall.geometry),
                    t,
                    nested
                )
                .unwrap();
            }
            Ok(Output::ok(s))
        }
        Format::Svg => Ok(Output::ok(tower_svg(&report))),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["r", "rank", "alpha", "beta", "s", "wall", "t_sq", "nested"])
                .unwrap();
            for row in &report.levels {
                let [r, a, b, t] = row.level.v_r.coords();
                w.write_record([
                    row.level.r.to_string(),
                    r.to_string(),
                    a.to_string(),
                    b.to_string(),
                    t.to_string(),
                    geometry_text(&row.level.wall.geometry),
                    row.t_intercept_sq.as_ref().map_or(String::new(), |t| t.to_string()),
                    row.nested.map_or(String::new(), |b| b.to_string()),
                ])
                .unwrap();
            }
            Ok(Output::ok(String::from_utf8(w.into_inner().unwrap()).unwrap()))
        }
    }
}

fn scan_bounds(bounds: Option<Bounds>) -> (i64, i64) {
    match bounds {
        None => (5, 30),
        Some(b) => (b.rank.unwrap_or(5), b.coeff),
    }
}

fn run_firstwall(bounds: Option<Bounds>, args: &FirstwallArgs) -> Result<ScanReport, Failure> {
    let (rank, coeff) = scan_bounds(bounds);
    if args.v1 {
        let m = args.m.unwrap_or(args.n);
        if m < args.n {
            return Err(Error::Domain(format!("m = {m} must be at least n = {}", args.n)).into());
        }
        if args.u.is_some() {
            return Err(usage("--u is fixed to the apex of W_1 with --v1"));
        }
        return Ok(v1_scan(args.n, &persistence_slice(m), rank, coeff)?);
    }
    if args.n < 2 {
        return Err(Error::Domain(format!("n = {} must be at least 2", args.n)).into());
    }
    let slice = scan_slice(args.n);
    let u = match &args.u {
        Some(u) => QuadExt::rational(u.clone()),
        None => default_ray(args.n, &slice)?,
    };
    Ok(first_wall_scan(args.n, &slice, &u, rank, coeff)?)
}

fn cmd_firstwall(format: Format, bounds: Option<Bounds>, args: &FirstwallArgs) -> Result<Output, Failure> {
    let report = run_firstwall(bounds, args)?;
    let code = match report.status {
        ScanStatus::CertifiedUpTo { .. } => EXIT_OK,
        ScanStatus::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    };
    let body = match format {
        Format::Json => json(&report),
        Format::Text => {
            let mut s = format!("target {} along u = {}\n", report.target, report.u_ray);
            writeln!(s, "examined {} spherical classes", report.examined).unwrap();
            for (reason, count) in &report.exclusions {
                writeln!(s, "  excluded {count}: {reason:?}").unwrap();
            }
            for c in &report.survivors {
                let label = c.label.clone().unwrap_or_else(|| c.vector.to_string());
                writeln!(s, "  survivor {label}: t^2 = {}", c.t_sq).unwrap();
            }
            match &report.selected {
                Some(c) => writeln!(
                    s,
                    "selected: {}",
                    c.label.clone().unwrap_or_else(|| c.vector.to_string())
                )
                .unwrap(),
                None => writeln!(s, "selected: none").unwrap(),
            }
            let status = match report.status {
                ScanStatus::CertifiedUpTo {
                    rank_bound,
                    coeff_bound,
                } => {
                    format!("certified up to rank {rank_bound}, coefficients {coeff_bound}")
                }
                ScanStatus::Inconclusive {
                    rank_bound,
                    coeff_bound,
                } => {
                    format!("inconclusive at rank {rank_bound}, coefficients {coeff_bound}")
                }
            };
            writeln!(s, "status: {status}").unwrap();
            s
        }
        Format::Svg => {
            let walls: Vec<WallGeometry> = report.survivors.iter().map(|c| c.wall.geometry.clone()).collect();
            render::render_walls(
                &walls,
                std::slice::from_ref(&report.u_ray),
                &format!("first-wall candidates for {}", report.target),
            )
        }
        f => return Err(unsupported("firstwall", f)),
    };
    Ok(Output { body, code })
}

fn cmd_eq9(format: Format, args: &Eq9Args) -> Result<Output, Failure> {
    let sols = eq9_solutions(2..=args.m_max, 2..=args.n_max, 1..=args.r_max, -args.k_max..=args.k_max);
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                m: i64,
                n: i64,
                r: i64,
                k: i64,
            }
            let rows: Vec<Row> = sols.iter().map(|&(m, n, r, k)| Row { m, n, r, k }).collect();
            Ok(Output::ok(json(&rows)))
        }
        Format::Text => Ok(Output::ok(
            sols.iter()
                .map(|(m, n, r, k)| format!("m = {m}  n = {n}  r = {r}  k = {k}\n"))
                .collect(),
        )),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["m", "n", "r", "k"]).unwrap();
            for (m, n, r, k) in sols {
                w.write_record([m, n, r, k].map(|x| x.to_string())).unwrap();
            }
            Ok(Output::ok(String::from_utf8(w.into_inner().unwrap()).unwrap()))
        }
        f => Err(unsupported("eq9", f)),
    }
}

#[derive(Serialize)]
struct SdReport {
    status: SDStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_a: Option<SDStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_b: Option<StepB>,
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Isomorphism => "isomorphism",
        Verdict::Zero => "zero",
        Verdict::Unknown => "unknown",
    }
}

fn status_text(st: &SDStatus) -> String {
    let p = &st.pair;
    let yes = |b: bool| if b { "true" } else { "false" };
    let mut s = format!("v = {}  w = {}\n", p.v, p.w);
    writeln!(
        s,
        "(r, s, p, q, a, b) = ({}, {}, {}, {}, {}, {})  p+q+r+s = {}",
        p.r,
        p.s,
        p.p,
        p.q,
        p.a,
        p.b,
        p.degree_sum()
    )
    .unwrap();
    writeln!(
        s,
        "mo_theorem: {}  ex1: {}  ex3: {}",
        yes(st.mo_theorem),
        yes(st.ex1),
        yes(st.ex3)
    )
    .unwrap();
    writeln!(s, "verdict: {} ({})", verdict_text(st.verdict), st.provenance).unwrap();
    s
}

fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>, Failure> {
    let pq_max = args.pq_max.unwrap_or(-args.pq_min);
    if args.rs_max < 0 || args.pq_min > pq_max {
        return Err(usage("empty sweep range"));
    }
    Ok(sweep(args.rs_max, args.pq_min, pq_max)?)
}

fn cmd_sd(format: Option<Format>, args: &SdArgs) -> Result<Output, Failure> {
    if let Some(SdCommand::Sweep(sw)) = &args.sweep {
        let rows = sweep_rows(sw)?;
        return match format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["r", "s", "p", "q", "a", "b", "verdict"]).unwrap();
                for row in &rows {
                    let mut rec: Vec<String> = [row.r, row.s, row.p, row.q, row.a, row.b]
                        .map(|x| x.to_string())
                        .to_vec();
                    rec.push(verdict_text(row.verdict).into());
                    w.write_record(&rec).unwrap();
                }
                Ok(Output::ok(String::from_utf8(w.into_inner().unwrap()).unwrap()))
            }
            Format::Json => Ok(Output::ok(json(&rows))),
            f => Err(unsupported("sd sweep", f)),
        };
    }
    let need =
        |x: Option<i64>, name: &str| x.ok_or_else(|| usage(format!("sd needs --{name} (or the sweep subcommand)")));
    let pair = make_pair(
        need(args.r, "r")?,
        need(args.s, "s")?,
        need(args.p, "p")?,
        need(args.q, "q")?,
        need(args.a, "a")?,
        need(args.b, "b")?,
    )?;
    let status = check_conditions(&pair)?;
    let (step_a, step_b) = match args.step {
        None => (None, None),
        Some(Step::A) => (Some(check_conditions(&propex_step_a(&pair)?)?), None),
        Some(Step::B) => (None, Some(propex_step_b(&pair)?)),
    };
    let report = SdReport { status, step_a, step_b };
    match format.unwrap_or(Format::Json) {
        Format::Json => Ok(Output::ok(json(&report))),
        Format::Text => {
            let mut s = status_text(&report.status);
            if let Some(a) = &report.step_a {
                s.push_str("after step a:\n");
                s.push_str(&status_text(a));
            }
            if let Some(b) = &report.step_b {
                let t = &b.pair;
                writeln!(
                    s,
                    "after step b: (r, s, p, q) = ({}, {}, {}, {})  witness pairing {}  verdict: {}",
                    t.r,
                    t.s,
                    t.p,
                    t.q,
                    b.witness_pairing,
                    verdict_text(b.verdict)
                )
                .unwrap();
            }
            Ok(Output::ok(s))
        }
        f => Err(unsupported("sd", f)),
    }
}

fn cmd_render(format: Option<Format>, bounds: Option<Bounds>, args: &RenderArgs) -> Result<Output, Failure> {
    if let Some(f) = format.filter(|f| *f != Format::Svg) {
        return Err(unsupported("render", f));
    }
    let body = match args.kind {
        Picture::Tower => {
            let m = args.m.ok_or_else(|| usage("render --kind tower needs --m"))?;
            let top = args.top_rank.ok_or_else(|| usage("render --kind tower needs --R"))?;
            tower_svg(&tower_report(&TowerSpec::new(args.n, m, top)?)?)
        }
        Picture::Firstwall => {
            let fw = FirstwallArgs {
                n: args.n,
                u: None,
                v1: false,
                m: None,
            };
            return cmd_firstwall(Format::Svg, bounds, &fw);
        }
        Picture::Hyperbola => {
            let r = args.r.ok_or_else(|| usage("render --kind hyperbola needs --r"))?;
            if r < 2 || args.n < 2 {
                return Err(Error::Domain("the hyperbola view needs n ≥ 2 and r ≥ 2".into()).into());
            }
            let h = hyperbolic_lattice(&spherical_s(r - 1), &closed_form_v(args.n, r))?;
            let bound = bounds.map_or(12, |b| b.coeff);
            render::render_hyperbola(&positivity_report(&h, r, args.n, bound)?)
        }
    };
    Ok(Output::ok(body))
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<Output, Failure> {
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Pair(a) => {
            let p = pairing(&a.v, &a.w);
            match fmt(Format::Json) {
                Format::Json => Ok(Output::ok(json(&serde_json::json!({ "pairing": p })))),
                Format::Text => Ok(Output::ok(format!("{p}\n"))),
                f => Err(unsupported("pair", f)),
            }
        }
        Command::Twist(a) => cmd_vector(fmt(Format::Json), "twist", &twist(&a.v, a.d)),
        Command::Reflect(a) => cmd_vector(fmt(Format::Json), "reflect", &reflect(&a.v, &a.s)?),
        Command::Wall(a) => cmd_wall(fmt(Format::Json), a),
        Command::Classify(a) => cmd_classify(fmt(Format::Json), cli.bounds, a),
        Command::Tower(a) => cmd_tower(fmt(Format::Json), a),
        Command::Firstwall(a) => cmd_firstwall(fmt(Format::Json), cli.bounds, a),
        Command::Eq9(a) => cmd_eq9(fmt(Format::Json), a),
        Command::Sd(a) => cmd_sd(cli.format, a),
        Command::Render(a) => cmd_render(cli.format, cli.bounds, a),
    }
}

/// Parses `args`, runs the command and writes the result; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let outcome = execute(&cli);
    match outcome {
        Ok(out) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &out.body),
                None => stdout.write_all(out.body.as_bytes()),
            };
            match written {
                Ok(()) => out.code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write output: {e}");
                    EXIT_DOMAIN
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Caps the global thread pool from `K3WALLS_THREADS` if it holds a positive integer.
pub fn configure_threads() {
    if let Some(n) = std::env::var("K3WALLS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
