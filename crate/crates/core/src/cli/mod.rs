//! The `nodal-lab` command line.
//!
//! Every subcommand writes its payload (`<command>.json` or `<command>.csv`)
//! plus any artifacts into `--out`, and a `manifest.json` listing them. A
//! manifest can be fed back to `replay` to rerun the command and compare the
//! outputs. Settings resolve as flags over `--config` over the shipped
//! defaults.

mod config;

pub use config::LabConfig;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::ensemble_member;
use crate::error::LabError;
use crate::geom::{Ball, Region};
use crate::growth::{doubling_report, growth_report, max_doubling_index};
use crate::hfun::{laplacian_residual, Field, HarmonicExpr};
use crate::io;
use crate::multiscale::{find_subballs, lmi, recursive_collection, tunnel_max_index, zeros_in_tunnel};
use crate::nodal::{nodal_polylines, nodal_triangles, nodal_volume, projection_lower_bound, signed_balls_in_layers};
use crate::svg;

/// Keys ignored when replayed outputs are compared.
pub const TIMING_KEYS: [&str; 2] = ["elapsed_ms", "timings"];

#[derive(Parser, Debug, Clone)]
#[command(name = "nodal-lab", version, about = "Growth and nodal geometry of harmonic functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Function as inline JSON or a path to a JSON file.
    #[arg(long = "fn", global = true, value_name = "JSON|FILE")]
    pub function: Option<String>,
    /// Region as inline JSON or a path to a JSON file.
    #[arg(long, global = true, value_name = "JSON|FILE")]
    pub region: Option<String>,
    /// Doubling-index reduction factor.
    #[arg(long = "A", global = true)]
    pub a: Option<f64>,
    /// Number of pieces when chopping a tunnel.
    #[arg(long = "K", global = true)]
    pub k: Option<usize>,
    /// Grid cells per side for nodal estimates.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Ensemble seed; also selects the function when `--fn` is absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON configuration file; see `config show` for the schema.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Value, gradient and Laplacian residual at points.
    Eval {
        /// Point `x1,x2[,x3…]`; repeatable. Defaults to the region center.
        #[arg(long, allow_hyphen_values = true)]
        point: Vec<String>,
    },
    /// H, G, frequency and doubling index on spheres around a center.
    Growth {
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Doubling index of a ball, or maximal doubling index of a cube.
    Doubling,
    /// Nodal measure inside the region, with an SVG (2D) or OBJ (3D) drawing.
    Nodal,
    /// SVG drawing of the planar nodal set.
    Plot,
    /// Chop a tunnel into cubes and into K sub-tunnels.
    Chop,
    /// Logarithmic increment, maximal index and zeros along a tunnel.
    Tunnel,
    /// Sign-definite ball pairs around a zero at the ball center.
    Signed,
    /// Disjoint zero-centered sub-balls with smaller doubling index.
    Multiscale {
        /// Iterate until every ball is frozen.
        #[arg(long)]
        recursive: bool,
    },
    /// Subcube index distribution over a seeded ensemble.
    Sweep,
    /// Configuration utilities.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Rerun the command recorded in a manifest and compare its outputs.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand, Debug, Clone)]
pub enum ConfigAction {
    /// Print the resolved configuration.
    Show,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Growth { .. } => "growth",
            Command::Doubling => "doubling",
            Command::Nodal => "nodal",
            Command::Plot => "plot",
            Command::Chop => "chop",
            Command::Tunnel => "tunnel",
            Command::Signed => "signed",
            Command::Multiscale { .. } => "multiscale",
            Command::Sweep => "sweep",
            Command::Config { .. } => "config",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments without `--out` and `--config`.
    pub args: Vec<String>,
    pub config: LabConfig,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<String, String>,
    pub timings: BTreeMap<String, f64>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lab(LabError),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Lab(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lab(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lab(e) if e.is_not_found() => 2,
            _ => 1,
        }
    }
}

/// What a subcommand produced, before anything is written.
struct Output {
    payload: Value,
    /// Tabular form for `--format csv`; `None` means JSON only.
    csv: Option<String>,
    artifacts: Vec<(String, Vec<u8>)>,
    seeds: Vec<u64>,
}

impl Output {
    fn json(payload: Value) -> Self {
        Output {
            payload,
            csv: None,
            artifacts: Vec::new(),
            seeds: Vec::new(),
        }
    }
}

fn read_json_arg(arg: &str) -> CliResult<String> {
    let t = arg.trim_start();
    if t.starts_with('{') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| CliError::Usage(format!("{arg} is neither JSON nor a readable file: {e}")))
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("bad coordinate {t:?}: {e}"))))
        .collect()
}

struct Inputs {
    f: HarmonicExpr,
    region: Region,
}

fn inputs(g: &GlobalArgs) -> CliResult<Inputs> {
    let f = match (&g.function, g.seed) {
        (Some(s), _) => HarmonicExpr::from_json(&read_json_arg(s)?)?,
        (None, Some(seed)) => ensemble_member(seed)?,
        (None, None) => return Err(CliError::Usage("--fn is required (or --seed for an ensemble member)".into())),
    };
    let region = match &g.region {
        Some(s) => Region::from_json(&read_json_arg(s)?)?,
        None => Region::Ball(Ball::unit(f.min_dim().max(2))),
    };
    f.validate(region.dim())?;
    Ok(Inputs { f, region })
}

fn region_center(region: &Region) -> Vec<f64> {
    let (lo, hi) = region.bounding_box();
    lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
}

fn need_ball(region: &Region, cmd: &str) -> CliResult<Ball> {
    match region {
        Region::Ball(b) => Ok(b.clone()),
        _ => Err(CliError::Usage(format!("`{cmd}` needs a ball region"))),
    }
}

/// Flat CSV from a list of JSON objects: header from the first row's keys,
/// arrays joined with `;`.
fn values_to_csv(rows: &[Value]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let cell = |v: &Value| match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if let Some(Value::Object(first)) = rows.first() {
        let keys: Vec<&String> = first.keys().collect();
        w.write_record(keys.iter().map(|k| k.as_str()))
            .map_err(|e| LabError::Io(e.to_string()))?;
        for r in rows {
            let rec: Vec<String> = keys.iter().map(|k| r.get(k.as_str()).map(cell).unwrap_or_default()).collect();
            w.write_record(&rec).map_err(|e| LabError::Io(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| LabError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).map_err(|e| LabError::Io(e.to_string()))?)
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v).map_err(LabError::from)?)
}

fn cmd_eval(g: &GlobalArgs, points: &[String]) -> CliResult<Output> {
    let inp = inputs(g)?;
    let pts: Vec<Vec<f64>> = if points.is_empty() {
        vec![region_center(&inp.region)]
    } else {
        points.iter().map(|p| parse_point(p)).collect::<CliResult<_>>()?
    };
    let mut rows = Vec::new();
    for x in &pts {
        if x.len() != inp.region.dim() {
            return Err(CliError::Usage(format!("point {x:?} does not match dimension {}", inp.region.dim())));
        }
        let mut grad = vec![0.0; x.len()];
        let value = inp.f.value_and_gradient(x, &mut grad);
        rows.push(json!({
            "x": x,
            "value": value,
            "gradient": grad,
            "laplacian_residual": laplacian_residual(&inp.f, x, 1e-3),
        }));
    }
    let csv = values_to_csv(&rows)?;
    Ok(Output {
        csv: Some(csv),
        ..Output::json(json!({ "function": inp.f, "points": rows }))
    })
}

fn cmd_growth(g: &GlobalArgs, cfg: &LabConfig, center: &Option<String>, radii: &[f64]) -> CliResult<Output> {
    let inp = inputs(g)?;
    let c = match center {
        Some(s) => parse_point(s)?,
        None => region_center(&inp.region),
    };
    let radii: Vec<f64> = if radii.is_empty() {
        match &inp.region {
            Region::Ball(b) => vec![b.radius],
            _ => return Err(CliError::Usage("--radii is required unless the region is a ball".into())),
        }
    } else {
        radii.to_vec()
    };
    let rows = radii
        .iter()
        .map(|&r| growth_report(&inp.f, &c, r, &cfg.growth).map_err(CliError::from).and_then(|x| to_value(&x)))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Output {
        csv: Some(values_to_csv(&rows)?),
        ..Output::json(json!({ "function": inp.f, "reports": rows }))
    })
}

fn cmd_doubling(g: &GlobalArgs, cfg: &LabConfig) -> CliResult<Output> {
    let inp = inputs(g)?;
    let row = match &inp.region {
        Region::Ball(b) => {
            let d = doubling_report(&inp.f, b, &cfg.growth)?;
            json!({
                "ball": b,
                "doubling_index": d.value,
                "sdi": d.value * b.radius.powi(b.dim() as i32 - 1),
                "sup_inner": d.sup_inner,
                "sup_outer": d.sup_outer,
                "error_bound": d.error_bound,
            })
        }
        Region::Cube(q) => {
            let m = max_doubling_index(&inp.f, q, &cfg.growth, &cfg.index_grid)?;
            json!({
                "cube": q,
                "max_doubling_index": m.value,
                "argmax_center": m.argmax_center,
                "argmax_radius": m.argmax_radius,
                "evaluated": m.evaluated,
                "skipped": m.skipped,
                "clipped": m.clipped,
            })
        }
        _ => return Err(CliError::Usage("`doubling` needs a ball or cube region".into())),
    };
    let csv = values_to_csv(std::slice::from_ref(&row))?;
    let mut payload = row;
    payload["function"] = to_value(&inp.f)?;
    Ok(Output {
        csv: Some(csv),
        ..Output::json(payload)
    })
}

fn plot_svg(f: &HarmonicExpr, region: &Region, resolution: usize) -> CliResult<(String, usize)> {
    let lines = nodal_polylines(f, region, resolution)?;
    Ok((svg::render(region, &lines)?, lines.len()))
}

fn cmd_nodal(g: &GlobalArgs, cfg: &LabConfig) -> CliResult<Output> {
    let inp = inputs(g)?;
    let est = nodal_volume(&inp.f, &inp.region, cfg.resolution)?;
    let mut out = Output::json(json!({ "function": inp.f, "estimate": est }));
    let row = json!({
        "measure": est.measure,
        "resolution": est.resolution,
        "cell_count": est.cell_count,
        "error_indicator": est.error_indicator,
    });
    out.csv = Some(values_to_csv(&[row])?);
    if inp.region.dim() == 2 {
        let (s, _) = plot_svg(&inp.f, &inp.region, cfg.resolution)?;
        out.artifacts.push(("nodal.svg".into(), s.into_bytes()));
    } else {
        let tris = nodal_triangles(&inp.f, &inp.region, cfg.resolution)?;
        out.artifacts.push(("nodal.obj".into(), io::to_obj_string(&tris).into_bytes()));
    }
    Ok(out)
}

fn cmd_plot(g: &GlobalArgs, cfg: &LabConfig) -> CliResult<Output> {
    let inp = inputs(g)?;
    if inp.region.dim() != 2 {
        return Err(LabError::Dimension(inp.region.dim()).into());
    }
    let (s, count) = plot_svg(&inp.f, &inp.region, cfg.resolution)?;
    let mut out = Output::json(json!({
        "function": inp.f,
        "region": inp.region,
        "resolution": cfg.resolution,
        "polylines": count,
        "file": "plot.svg",
    }));
    out.artifacts.push(("plot.svg".into(), s.into_bytes()));
    Ok(out)
}

fn cmd_chop(g: &GlobalArgs, cfg: &LabConfig) -> CliResult<Output> {
    let inp = inputs(g)?;
    let Region::Tunnel(t) = &inp.region else {
        return Err(CliError::Usage("`chop` needs a tunnel region".into()));
    };
    let cubes = t.subcubes()?;
    let pieces = t.split(cfg.k);
    let rows = cubes
        .iter()
        .enumerate()
        .map(|(i, q)| json!({ "index": i, "center": q.center, "half_side": q.half_side }))
        .collect::<Vec<_>>();
    Ok(Output {
        csv: Some(values_to_csv(&rows)?),
        ..Output::json(json!({ "tunnel": t, "m": cubes.len(), "subcubes": cubes, "k": cfg.k, "pieces": pieces }))
    })
}

fn cmd_tunnel(g: &GlobalArgs, cfg: &LabConfig) -> CliResult<Output> {
    let inp = inputs(g)?;
    let Region::Tunnel(t) = &inp.region else {
        return Err(CliError::Usage("`tunnel` needs a tunnel region".into()));
    };
    let p = &cfg.multiscale;
    let z = lmi(&inp.f, t, &p.growth)?;
    let (max_index, clipped) = tunnel_max_index(&inp.f, t, p.inflation, &p.tunnel_grid, &p.growth)?;
    let zeros = zeros_in_tunnel(&inp.f, t, p)?;
    Ok(Output::json(json!({
        "function": inp.f,
        "tunnel": t,
        "m": t.m()?,
        "lmi": z,
        "max_index": max_index,
        "clipped": clipped,
        "zeros": zeros,
    })))
}

fn cmd_signed(g: &GlobalArgs, cfg: &LabConfig) -> CliResult<Output> {
    let inp = inputs(g)?;
    let b = need_ball(&inp.region, "signed")?;
    let s = signed_balls_in_layers(&inp.f, &b, &cfg.signed)?;
    let bounds = s.pairs.iter().map(projection_lower_bound).collect::<crate::Result<Vec<_>>>()?;
    let rows = s
        .pairs
        .iter()
        .zip(&bounds)
        .map(|(p, lb)| {
            json!({
                "layer_index": p.layer_index,
                "radius": p.radius,
                "positive_center": p.positive.center,
                "negative_center": p.negative.center,
                "certified": p.certified,
                "projection_lower_bound": lb,
            })
        })
        .collect::<Vec<_>>();
    Ok(Output {
        csv: Some(values_to_csv(&rows)?),
        ..Output::json(json!({ "function": inp.f, "ball": b, "search": s, "projection_lower_bounds": bounds }))
    })
}

fn cmd_multiscale(g: &GlobalArgs, cfg: &LabConfig, recursive: bool) -> CliResult<Output> {
    let inp = inputs(g)?;
    let b = need_ball(&inp.region, "multiscale")?;
    let p = &cfg.multiscale;
    let (payload, balls) = if recursive {
        let r = recursive_collection(&inp.f, &b, p)?;
        let balls = to_value(&r.balls)?;
        (json!({ "function": inp.f, "recursive": r }), balls)
    } else {
        let c = find_subballs(&inp.f, &b, p)?;
        let balls = to_value(&c.balls)?;
        (json!({ "function": inp.f, "collection": c }), balls)
    };
    let rows = balls.as_array().cloned().unwrap_or_default();
    Ok(Output {
        csv: Some(values_to_csv(&rows)?),
        ..Output::json(payload)
    })
}

fn cmd_sweep(cfg: &LabConfig) -> CliResult<Output> {
    let report = crate::dist::ensemble_sweep(&cfg.sweep);
    let table = io::to_csv_string(&report.rows)?;
    let mut out = Output::json(json!({
        "rows": report.rows,
        "failures": report.failures,
        "pass_rates": report.pass_rates,
        "median_margin": report.median_margin,
    }));
    out.artifacts.push(("sweep.csv".into(), table.clone().into_bytes()));
    out.csv = Some(table);
    out.seeds = cfg.sweep.seeds.clone();
    Ok(out)
}

fn load_config(g: &GlobalArgs) -> CliResult<LabConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            LabConfig::from_json(&text)?
        }
        None => LabConfig::default(),
    };
    cfg.apply_flags(g);
    Ok(cfg)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let p = dir.join(name);
    fs::write(&p, bytes).map_err(|e| LabError::Io(format!("{}: {e}", p.display())))?;
    Ok(())
}

const DEFAULT_OUT: &str = "nodal-lab-out";

fn out_dir(g: &GlobalArgs) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Arguments worth recording: everything except the output directory and
/// the config file, whose content is snapshotted instead.
fn replayable_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" || a == "--config" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--config=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn execute(cli: &Cli, args: &[String]) -> CliResult<i32> {
    let g = &cli.global;
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, g.out.clone());
    }
    let cfg = load_config(g)?;
    if let Command::Config { action: ConfigAction::Show } = &cli.command {
        println!("{}", io::to_json_string(&cfg)?.trim_end());
        return Ok(0);
    }
    let start = Instant::now();
    let out = match &cli.command {
        Command::Eval { point } => cmd_eval(g, point)?,
        Command::Growth { center, radii } => cmd_growth(g, &cfg, center, radii)?,
        Command::Doubling => cmd_doubling(g, &cfg)?,
        Command::Nodal => cmd_nodal(g, &cfg)?,
        Command::Plot => cmd_plot(g, &cfg)?,
        Command::Chop => cmd_chop(g, &cfg)?,
        Command::Tunnel => cmd_tunnel(g, &cfg)?,
        Command::Signed => cmd_signed(g, &cfg)?,
        Command::Multiscale { recursive } => cmd_multiscale(g, &cfg, *recursive)?,
        Command::Sweep => cmd_sweep(&cfg)?,
        Command::Config { .. } | Command::Replay { .. } => unreachable!(),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let dir = out_dir(g);
    fs::create_dir_all(&dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
    let name = cli.command.name();
    let format = g.format.unwrap_or_default();
    let mut outputs = Vec::new();
    let payload_json = io::to_json_string(&out.payload)?;
    let main_file = match (format, &out.csv) {
        (Format::Csv, Some(table)) => {
            let f = format!("{name}.csv");
            write_file(&dir, &f, table.as_bytes())?;
            f
        }
        (Format::Csv, None) => return Err(CliError::Usage(format!("`{name}` has no tabular output; use --format json"))),
        (Format::Json, _) => {
            let f = format!("{name}.json");
            write_file(&dir, &f, payload_json.as_bytes())?;
            f
        }
    };
    outputs.push(main_file);
    for (f, bytes) in &out.artifacts {
        if !outputs.contains(f) {
            write_file(&dir, f, bytes)?;
            outputs.push(f.clone());
        }
    }
    let mut seeds = out.seeds.clone();
    if seeds.is_empty() {
        seeds.extend(g.seed);
    }
    let manifest = RunManifest {
        command: name.to_string(),
        args: replayable_args(args),
        config: cfg,
        seeds,
        versions: BTreeMap::from([("nodal-lab".to_string(), env!("CARGO_PKG_VERSION").to_string())]),
        timings: BTreeMap::from([("total_ms".to_string(), elapsed)]),
        outputs,
    };
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    println!("{}", payload_json.trim_end());
    Ok(0)
}

fn comparable(path: &Path) -> CliResult<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let mut v: Value = serde_json::from_slice(&bytes).map_err(LabError::from)?;
        io::strip_keys(&mut v, &TIMING_KEYS);
        return Ok(io::to_json_string(&v)?.into_bytes());
    }
    Ok(bytes)
}

fn replay(manifest_path: &Path, out: Option<PathBuf>) -> CliResult<i32> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", manifest_path.display())))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(LabError::from)?;
    let src = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let dir = out.unwrap_or_else(|| src.join("replay"));
    if dir == src {
        return Err(CliError::Usage("replay needs an output directory different from the original".into()));
    }
    fs::create_dir_all(&dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))?;
    let snapshot = dir.join("config.snapshot.json");
    io::write_json(&snapshot, &m.config)?;
    let mut args = vec!["nodal-lab".to_string()];
    args.extend(m.args.iter().cloned());
    args.extend(["--out".to_string(), dir.display().to_string()]);
    args.extend(["--config".to_string(), snapshot.display().to_string()]);
    let code = run(args);
    if code != 0 {
        return Ok(code);
    }
    let mut files = Vec::new();
    let mut identical = true;
    for f in &m.outputs {
        let same = match (comparable(&src.join(f)), comparable(&dir.join(f))) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        identical &= same;
        files.push(json!({ "file": f, "identical": same }));
    }
    let report = json!({ "manifest": manifest_path.display().to_string(), "files": files, "identical": identical });
    io::write_json(&dir.join("replay.json"), &report)?;
    println!("{}", io::to_json_string(&report)?.trim_end());
    Ok(if identical { 0 } else { 1 })
}

fn report_error(e: &CliError, out: &Path) {
    eprintln!("error [{}]: {}", e.kind(), e.message());
    let body = json!({ "kind": e.kind(), "message": e.message(), "exit_code": e.exit_code() });
    if fs::create_dir_all(out).is_ok() {
        let _ = io::write_json(&out.join("error.json"), &body);
    }
}

fn run_parsed(cli: &Cli, args: &[String]) -> i32 {
    match execute(cli, args) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e, &out_dir(&cli.global));
            e.exit_code()
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code: 0 on success, 2 when an analysis found nothing,
/// 1 for usage and all other errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let rest = args.get(1..).unwrap_or(&[]).to_vec();
    match std::env::var("NODAL_LAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run_parsed(&cli, &rest)),
            Err(_) => run_parsed(&cli, &rest),
        },
        _ => run_parsed(&cli, &rest),
    }
}

pub fn main_from_env() -> i32 {
    run(std::env::args_os())
}
