//! The `critsense` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use critsense_core::critpoint::{find_critical_points, resolution, DetectOptions, MorseIndex};
use critsense_core::field::Field;
use critsense_core::gallery::{self, GalleryEntry};
use critsense_core::hom_index::{audit_summary, poincare_hopf_audit_with, winding_index_2d, ZeroKind};
use critsense_core::morse::{build_chart, flow_trajectory, verify_morse_chart, ChartOptions};
use critsense_core::mountain_pass::{mountain_pass_point, PassOptions};
use critsense_core::rand_field::{FieldSpec, MonteCarloSpec};
use critsense_core::sequence::SequenceOptions;
use critsense_core::{Domain, Error};

use crate::format::{fmt_f64, fmt_opt, to_csv, to_json, to_json_line};
use crate::parallel;
use crate::parse::{parse_domain, parse_point};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "critsense", version, about = "Critical point analysis of scalar fields and field sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect and classify the critical points of a field.
    Classify(ClassifyArgs),
    /// Interior plus boundary index against the Euler characteristic.
    Audit(AuditArgs),
    /// Morse chart around a critical point, with an optional flow trajectory.
    Flow(FlowArgs),
    /// Mountain pass point between two local maxima.
    Mountain(MountainArgs),
    /// Critical point counts along a family and against its limit.
    Sequence(SequenceArgs),
    /// Monte Carlo convergence of empirical mean random fields.
    Montecarlo(MonteCarloArgs),
    /// List the built-in field families.
    Gallery(GalleryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with default values for any flag, keyed by flag name.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FieldArgs {
    /// Family name; see `critsense gallery`.
    #[arg(long)]
    gallery: Option<String>,
    /// Family member index.
    #[arg(long)]
    n: Option<u32>,
    /// Use the family's limit instead of member n.
    #[arg(long)]
    limit: bool,
    /// interval:a,b | box:lo1,lo2:hi1,hi2 | ball:cx,cy:r
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Grid cells per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Newton tolerance on |grad f|.
    #[arg(long)]
    tol: Option<f64>,
    /// Also report the winding index on circles of this radius (2D only).
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Chart center; defaults to the first interior Morse point found.
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    /// Integrate and emit the path t -> G_t(x) for this x.
    #[arg(long, allow_hyphen_values = true)]
    trajectory: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    /// Morse chart parameter in (0, 1).
    #[arg(long)]
    m: Option<f64>,
    /// Upper bound on the chart radius search.
    #[arg(long)]
    cap: Option<f64>,
    /// RK4 step.
    #[arg(long)]
    ode_step: Option<f64>,
    /// Chart ball samples used for verification.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct MountainArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    p1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p2: Option<String>,
    /// Movable path knots.
    #[arg(long)]
    knots: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Certificate tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SequenceArgs {
    #[arg(long)]
    gallery: Option<String>,
    /// Comma-separated family indices.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long)]
    domain: Option<String>,
    /// Detector grid for every member; per-member default otherwise.
    #[arg(long)]
    grid: Option<usize>,
    /// Resolution hypothesis threshold.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    match_radius: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Keep per-trial records in the JSON output.
    #[arg(long)]
    records: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct GalleryArgs {
    /// Show a single family.
    #[arg(long)]
    gallery: Option<String>,
    #[command(flatten)]
    output: Output,
}

/// Values read from `--config`; explicit flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    gallery: Option<String>,
    n: Option<OneOrMany>,
    limit: Option<bool>,
    domain: Option<String>,
    grid: Option<usize>,
    tol: Option<f64>,
    eps: Option<f64>,
    ode_step: Option<f64>,
    seed: Option<u64>,
    at: Option<Vec<f64>>,
    trajectory: Option<Vec<f64>>,
    p1: Option<Vec<f64>>,
    p2: Option<Vec<f64>>,
    m: Option<f64>,
    cap: Option<f64>,
    samples: Option<usize>,
    knots: Option<usize>,
    iters: Option<usize>,
    match_radius: Option<f64>,
    #[serde(rename = "D", alias = "dim")]
    dim: Option<usize>,
    degree: Option<u32>,
    decay: Option<f64>,
    noise: Option<f64>,
    n_list: Option<Vec<u32>>,
    trials: Option<u64>,
    format: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(u32),
    Many(Vec<u32>),
}

impl OneOrMany {
    fn list(&self) -> Vec<u32> {
        match self {
            OneOrMany::One(n) => vec![*n],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

enum Failure {
    Usage(String),
    Numeric { kind: String, message: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric {
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

/// A finished command: the JSON result, its CSV rendering if any, and whether it counts as a failure.
struct Artifact {
    config: Value,
    result: Value,
    csv: Option<String>,
    failure: Option<(String, String)>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a Value,
    result: &'a Value,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_config(path: &Option<PathBuf>) -> Outcome<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

fn resolve_format(flag: Option<Format>, cfg: &ConfigFile) -> Outcome<Format> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match cfg.format.as_deref() {
        None | Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(other) => Err(usage(format!("unknown format `{other}`"))),
    }
}

fn point_arg(flag: &Option<String>, cfg: &Option<Vec<f64>>, name: &str) -> Outcome<Option<Vec<f64>>> {
    match flag {
        Some(s) => parse_point(s).map(Some).map_err(|e| usage(format!("--{name}: {e}"))),
        None => Ok(cfg.clone()),
    }
}

fn lookup(name: Option<&str>) -> Outcome<GalleryEntry> {
    let name = name.ok_or_else(|| usage("--gallery is required"))?;
    gallery::entry(name).map_err(|e| Failure::from(Error::from(e)))
}

struct Target {
    entry: GalleryEntry,
    field: Field,
    domain: Domain,
    n: u32,
    limit: bool,
}

impl Target {
    fn config(&self) -> Value {
        json!({
            "gallery": self.entry.name,
            "n": self.n,
            "limit": self.limit,
            "field": self.field.label(),
            "domain": self.domain,
        })
    }
}

fn domain_arg(flag: &Option<String>, cfg: &ConfigFile, default: &Domain) -> Outcome<Domain> {
    match flag.as_ref().or(cfg.domain.as_ref()) {
        Some(s) => parse_domain(s).map_err(|e| usage(format!("--domain: {e}"))),
        None => Ok(default.clone()),
    }
}

fn target(args: &FieldArgs, cfg: &ConfigFile) -> Outcome<Target> {
    let entry = lookup(args.gallery.as_deref().or(cfg.gallery.as_deref()))?;
    let n = match (args.n, &cfg.n) {
        (Some(n), _) => n,
        (None, Some(v)) => match v.list().as_slice() {
            [n] => *n,
            _ => return Err(usage("config `n` must be a single index for this command")),
        },
        (None, None) => 1,
    };
    if n == 0 {
        return Err(usage("--n starts at 1"));
    }
    let limit = args.limit || cfg.limit.unwrap_or(false);
    let domain = domain_arg(&args.domain, cfg, &entry.domain)?;
    if domain.dim() != entry.dim() {
        return Err(usage(format!(
            "domain is {}-dimensional but `{}` is {}-dimensional",
            domain.dim(),
            entry.name,
            entry.dim()
        )));
    }
    let field = if limit { entry.limit.clone() } else { entry.member(n) };
    Ok(Target {
        entry,
        field,
        domain,
        n,
        limit,
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

fn coords_header(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|i| format!("{prefix}{i}")).collect()
}

fn classify(a: &ClassifyArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let t = target(&a.field, &cfg)?;
    let grid = a.grid.or(cfg.grid).unwrap_or_else(|| t.entry.grid_for(t.n));
    let tol = a.tol.or(cfg.tol).unwrap_or(DetectOptions::default().newton_tol);
    let eps = a.eps.or(cfg.eps);
    if eps.is_some_and(|e| e.is_nan() || e <= 0.0) {
        return Err(usage("--eps must be positive"));
    }
    let opts = DetectOptions {
        grid_res: grid,
        newton_tol: tol,
        ..Default::default()
    };
    let det = find_critical_points(&t.field, &t.domain, &opts).map_err(Error::from)?;
    let winding: Option<Vec<Option<i32>>> = eps.filter(|_| t.field.dim() == 2).map(|e| {
        det.points
            .iter()
            .map(|p| winding_index_2d(&t.field, &p.location, e, 256).ok())
            .collect()
    });
    let config = merge(
        t.config(),
        json!({ "command": "classify", "grid": grid, "tol": tol, "eps": eps }),
    );
    let result = json!({
        "points": det.points,
        "unresolved": det.unresolved,
        "cell_size": det.cell_size,
        "dedupe_radius": det.dedupe_radius,
        "resolution": resolution(&det.points),
        "winding_at_eps": winding,
    });
    let d = t.field.dim();
    let mut header = coords_header("x", d);
    header.extend(
        ["value", "grad_norm", "morse_index", "hom_index", "classification", "near_boundary", "winding_at_eps"]
            .map(String::from),
    );
    let rows: Vec<Vec<String>> = det
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r: Vec<String> = p.location.iter().map(|&x| fmt_f64(x)).collect();
            r.push(fmt_f64(p.value));
            r.push(fmt_f64(p.grad_norm));
            r.push(match p.morse_index {
                MorseIndex::Index(k) => k.to_string(),
                MorseIndex::Degenerate => "degenerate".into(),
            });
            r.push(p.hom_index.value().map(|v| v.to_string()).unwrap_or_default());
            r.push(class_label(&to_value(&p.classification)));
            r.push(p.near_boundary.to_string());
            r.push(
                winding
                    .as_ref()
                    .and_then(|w| w[i])
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            );
            r
        })
        .collect();
    Ok(Artifact {
        config,
        result,
        csv: Some(csv_from(&header, &rows)),
        failure: None,
    })
}

fn class_label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(m) => match m.get("saddle").and_then(|s| s.get("prongs")).and_then(Value::as_u64) {
            Some(p) => format!("saddle_{p}"),
            None => "saddle".into(),
        },
        other => other.to_string(),
    }
}

fn csv_from(header: &[String], rows: &[Vec<String>]) -> String {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    to_csv(&h, rows)
}

fn default_audit_grid(dim: usize) -> usize {
    match dim {
        1 => 1024,
        2 => 128,
        _ => 24,
    }
}

fn audit(a: &AuditArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let t = target(&a.field, &cfg)?;
    let grid = a.grid.or(cfg.grid).unwrap_or_else(|| default_audit_grid(t.domain.dim()));
    let r = poincare_hopf_audit_with(&t.field, &t.domain, grid)?;
    let config = merge(t.config(), json!({ "command": "audit", "grid": grid }));
    let summary = audit_summary(&r);
    let failure = (!r.pass).then(|| ("audit_failed".to_string(), summary.clone()));
    let d = t.domain.dim();
    let mut header = vec!["kind".to_string()];
    header.extend(coords_header("x", d));
    header.extend(["index", "weight", "contribution"].map(String::from));
    let rows: Vec<Vec<String>> = r
        .per_point
        .iter()
        .map(|p| {
            let mut row = vec![match p.kind {
                ZeroKind::Interior => "interior".to_string(),
                ZeroKind::Boundary => "boundary".to_string(),
            }];
            row.extend(p.location.iter().map(|&x| fmt_f64(x)));
            row.push(p.index.to_string());
            row.push(p.weight.to_string());
            row.push(p.contribution.to_string());
            row
        })
        .collect();
    let result = merge(to_value(&r), json!({ "summary": summary }));
    Ok(Artifact {
        config,
        result,
        csv: Some(csv_from(&header, &rows)),
        failure,
    })
}

fn flow(a: &FlowArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let t = target(&a.field, &cfg)?;
    let defaults = ChartOptions::default();
    let opts = ChartOptions {
        m: a.m.or(cfg.m).unwrap_or(defaults.m),
        search_cap: a.cap.or(cfg.cap).unwrap_or(defaults.search_cap),
        ode_step: a.ode_step.or(cfg.ode_step).unwrap_or(defaults.ode_step),
        n_samples: a.samples.or(cfg.samples).unwrap_or(defaults.n_samples),
    };
    if [opts.ode_step, opts.search_cap].iter().any(|v| v.is_nan() || *v <= 0.0) {
        return Err(usage("--ode-step and --cap must be positive"));
    }
    let d = t.field.dim();
    let at = match point_arg(&a.at, &cfg.at, "at")? {
        Some(p) => p,
        None => {
            let grid = a.grid.or(cfg.grid).unwrap_or_else(|| t.entry.grid_for(t.n));
            let det = find_critical_points(&t.field, &t.domain, &DetectOptions::with_grid(grid)).map_err(Error::from)?;
            det.points
                .iter()
                .find(|p| !p.near_boundary && matches!(p.morse_index, MorseIndex::Index(_)))
                .map(|p| p.location.clone())
                .ok_or_else(|| usage("no interior Morse point found; pass --at"))?
        }
    };
    if at.len() != d {
        return Err(usage(format!("--at needs {d} coordinates")));
    }
    let trajectory_x = point_arg(&a.trajectory, &cfg.trajectory, "trajectory")?;
    if trajectory_x.as_ref().is_some_and(|x| x.len() != d) {
        return Err(usage(format!("--trajectory needs {d} coordinates")));
    }
    let chart = build_chart(&t.field, &at, &opts).map_err(Error::from)?;
    let report = verify_morse_chart(&t.field, &chart, opts.n_samples).map_err(Error::from)?;
    let path = match &trajectory_x {
        Some(x) => Some(flow_trajectory(&t.field, &chart, x, opts.ode_step).map_err(Error::from)?),
        None => None,
    };
    let config = merge(
        t.config(),
        json!({
            "command": "flow",
            "at": at,
            "trajectory": trajectory_x,
            "m": opts.m,
            "cap": opts.search_cap,
            "ode_step": opts.ode_step,
            "samples": opts.n_samples,
        }),
    );
    let csv = path.as_ref().map(|p| {
        let mut header = vec!["t".to_string()];
        header.extend(coords_header("x", d));
        let rows: Vec<Vec<String>> = p
            .iter()
            .map(|(t, y)| std::iter::once(fmt_f64(*t)).chain(y.iter().map(|&v| fmt_f64(v))).collect())
            .collect();
        csv_from(&header, &rows)
    });
    let trajectory = path.map(|p| {
        p.into_iter()
            .map(|(t, y)| json!({ "t": t, "point": y }))
            .collect::<Vec<_>>()
    });
    let result = json!({ "chart": chart, "report": report, "trajectory": trajectory });
    Ok(Artifact {
        config,
        result,
        csv,
        failure: None,
    })
}

fn mountain(a: &MountainArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let t = target(&a.field, &cfg)?;
    let d = t.field.dim();
    let p1 = point_arg(&a.p1, &cfg.p1, "p1")?.ok_or_else(|| usage("--p1 is required"))?;
    let p2 = point_arg(&a.p2, &cfg.p2, "p2")?.ok_or_else(|| usage("--p2 is required"))?;
    if p1.len() != d || p2.len() != d {
        return Err(usage(format!("--p1 and --p2 need {d} coordinates")));
    }
    let defaults = PassOptions::default();
    let opts = PassOptions {
        n_knots: a.knots.or(cfg.knots).unwrap_or(defaults.n_knots),
        iters: a.iters.or(cfg.iters).unwrap_or(defaults.iters),
        pass_tol: a.tol.or(cfg.tol).unwrap_or(defaults.pass_tol),
        ..defaults
    };
    let r = mountain_pass_point(&t.field, &t.domain, &p1, &p2, &opts).map_err(Error::from)?;
    let config = merge(
        t.config(),
        json!({
            "command": "mountain",
            "p1": p1,
            "p2": p2,
            "knots": opts.n_knots,
            "iters": opts.iters,
            "tol": opts.pass_tol,
            "path_tol": opts.path_tol,
        }),
    );
    let mut header = vec!["k".to_string()];
    header.extend(coords_header("x", d));
    header.push("value".into());
    let rows: Vec<Vec<String>> = r
        .path
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut row = vec![k.to_string()];
            row.extend(p.iter().map(|&x| fmt_f64(x)));
            row.push(fmt_f64(t.field.value(p)));
            row
        })
        .collect();
    Ok(Artifact {
        config,
        result: to_value(&r),
        csv: Some(csv_from(&header, &rows)),
        failure: None,
    })
}

fn sequence(a: &SequenceArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let entry = lookup(a.gallery.as_deref().or(cfg.gallery.as_deref()))?;
    let n_list = match (&a.n, &cfg.n) {
        (Some(v), _) => v.clone(),
        (None, Some(v)) => v.list(),
        (None, None) => vec![4, 16, 64],
    };
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(usage("--n needs one or more indices starting at 1"));
    }
    let domain = domain_arg(&a.domain, &cfg, &entry.domain)?;
    if domain.dim() != entry.dim() {
        return Err(usage("domain dimension does not match the family"));
    }
    let defaults = SequenceOptions::default();
    let opts = SequenceOptions {
        grid_res: a.grid.or(cfg.grid),
        resolution_tol: a.tol.or(cfg.tol).unwrap_or(defaults.resolution_tol),
        match_radius: a.match_radius.or(cfg.match_radius),
        ..defaults
    };
    let report = parallel::convergence(&entry, &n_list, &domain, &opts, None).map_err(Error::from)?;
    let config = json!({
        "command": "sequence",
        "gallery": entry.name,
        "n": n_list,
        "domain": domain,
        "options": opts,
    });
    let header = [
        "n",
        "d0",
        "d1",
        "d2",
        "n_critical",
        "n_max",
        "n_min",
        "n_saddle",
        "n_undulation",
        "n_unclassified",
        "resolution",
        "boundary_min_gradient",
        "matched",
        "unmatched_n",
        "unmatched_limit",
        "multi_match",
        "max_pair_distance",
        "unresolved",
        "error",
    ]
    .map(String::from);
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let c = &r.counts;
            vec![
                r.n.to_string(),
                fmt_f64(r.d0),
                fmt_opt(r.d1),
                fmt_opt(r.d2),
                c.n_critical.to_string(),
                c.n_max.to_string(),
                c.n_min.to_string(),
                c.n_saddle.to_string(),
                c.n_undulation.to_string(),
                c.n_unclassified.to_string(),
                fmt_f64(r.resolution),
                fmt_f64(r.boundary_min_gradient),
                r.matched.to_string(),
                r.unmatched_n.to_string(),
                r.unmatched_limit.to_string(),
                r.multi_match.to_string(),
                fmt_f64(r.max_pair_distance),
                r.unresolved.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Artifact {
        config,
        result: to_value(&report),
        csv: Some(csv_from(&header, &rows)),
        failure: None,
    })
}

fn montecarlo(a: &MonteCarloArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let n_list = a
        .n
        .clone()
        .or(cfg.n_list.clone())
        .or(cfg.n.as_ref().map(OneOrMany::list))
        .unwrap_or_else(|| vec![10, 100, 1000]);
    let spec = MonteCarloSpec {
        field: FieldSpec {
            dim: a.dim.or(cfg.dim).unwrap_or(1),
            degree: a.degree.or(cfg.degree).unwrap_or(4),
            decay: a.decay.or(cfg.decay).unwrap_or(2.0),
        },
        noise: a.noise.or(cfg.noise).unwrap_or(1.0),
        n_list,
        trials: a.trials.or(cfg.trials).unwrap_or(200),
        seed: a.seed.or(cfg.seed).unwrap_or(0),
        grid: a.grid.or(cfg.grid).unwrap_or(256),
    };
    if !(1..=3).contains(&spec.field.dim) {
        return Err(usage("--dim must be 1, 2 or 3"));
    }
    if spec.trials == 0 || spec.n_list.is_empty() || spec.n_list.contains(&0) {
        return Err(usage("need at least one trial and member indices starting at 1"));
    }
    if spec.grid < 8 {
        return Err(usage("--grid must be at least 8"));
    }
    let table = parallel::monte_carlo(&spec, None);
    let config = merge(json!({ "command": "montecarlo", "records": a.records }), to_value(&spec));
    let header = [
        "n",
        "valid_trials",
        "failed_trials",
        "frequency",
        "frequency_hypotheses_ok",
        "frequency_hypotheses_failed",
        "frequency_low_m",
        "frequency_high_m",
        "tv_distance",
        "median_resolution_gap",
        "tail_resolution",
        "mean_critical",
    ]
    .map(String::from);
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.valid_trials.to_string(),
                r.failed_trials.to_string(),
                fmt_f64(r.frequency),
                fmt_opt(r.frequency_hypotheses_ok),
                fmt_opt(r.frequency_hypotheses_failed),
                fmt_opt(r.frequency_low_m),
                fmt_opt(r.frequency_high_m),
                fmt_f64(r.tv_distance),
                fmt_f64(r.median_resolution_gap),
                fmt_f64(r.tail_resolution),
                fmt_f64(r.mean_critical),
            ]
        })
        .collect();
    let result = if a.records {
        to_value(&table)
    } else {
        json!({ "spec": table.spec, "rows": table.rows })
    };
    Ok(Artifact {
        config,
        result,
        csv: Some(csv_from(&header, &rows)),
        failure: None,
    })
}

fn gallery_cmd(a: &GalleryArgs) -> Outcome<Artifact> {
    let cfg = load_config(&a.output.config)?;
    let name = a.gallery.as_deref().or(cfg.gallery.as_deref());
    let infos: Vec<_> = match name {
        Some(_) => vec![lookup(name)?.info()],
        None => gallery::catalogue().iter().map(GalleryEntry::info).collect(),
    };
    let header = ["name", "dim", "provenance", "convergence", "summary", "expected"].map(String::from);
    let rows: Vec<Vec<String>> = infos
        .iter()
        .map(|i| {
            vec![
                i.name.clone(),
                i.dim.to_string(),
                class_label(&to_value(&i.provenance)),
                class_label(&to_value(&i.convergence)),
                i.summary.clone(),
                i.expected.clone(),
            ]
        })
        .collect();
    Ok(Artifact {
        config: json!({ "command": "gallery", "gallery": name }),
        result: to_value(&infos),
        csv: Some(csv_from(&header, &rows)),
        failure: None,
    })
}

fn output_of(c: &Command) -> &Output {
    match c {
        Command::Classify(a) => &a.output,
        Command::Audit(a) => &a.output,
        Command::Flow(a) => &a.output,
        Command::Mountain(a) => &a.output,
        Command::Sequence(a) => &a.output,
        Command::Montecarlo(a) => &a.output,
        Command::Gallery(a) => &a.output,
    }
}

fn execute(c: &Command) -> Outcome<Artifact> {
    match c {
        Command::Classify(a) => classify(a),
        Command::Audit(a) => audit(a),
        Command::Flow(a) => flow(a),
        Command::Mountain(a) => mountain(a),
        Command::Sequence(a) => sequence(a),
        Command::Montecarlo(a) => montecarlo(a),
        Command::Gallery(a) => gallery_cmd(a),
    }
}

fn error_json(kind: &str, message: &str) -> String {
    to_json(&json!({ "error": kind, "message": message }))
}

fn render(c: &Command, art: &Artifact) -> Outcome<String> {
    let out = output_of(c);
    let cfg = load_config(&out.config)?;
    let format = resolve_format(out.format, &cfg)?;
    let mut config = art.config.clone();
    if let Value::Object(m) = &mut config {
        m.insert("format".into(), to_value(&format));
        if let Some(path) = &out.config {
            m.insert("config_file".into(), json!(path.display().to_string()));
        }
    }
    match format {
        Format::Json => Ok(to_json(&Envelope {
            tool: "critsense",
            version: VERSION,
            config: &config,
            result: &art.result,
        })),
        Format::Csv => {
            let body = art
                .csv
                .as_ref()
                .ok_or_else(|| usage("CSV output needs --trajectory for this command"))?;
            let meta = to_json_line(&json!({ "tool": "critsense", "version": VERSION, "config": config }));
            Ok(format!("# {meta}\n{body}"))
        }
    }
}

/// Run with explicit output streams; returns the process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let outcome = execute(&cli.command).and_then(|art| render(&cli.command, &art).map(|text| (art, text)));
    match outcome {
        Ok((art, text)) => {
            match &output_of(&cli.command).out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &text) {
                        let _ = write!(stderr, "{}", error_json("io", &format!("{}: {e}", path.display())));
                        return 1;
                    }
                }
                None => {
                    if stdout.write_all(text.as_bytes()).is_err() {
                        return 1;
                    }
                }
            }
            match art.failure {
                Some((kind, message)) => {
                    let _ = write!(stderr, "{}", error_json(&kind, &message));
                    1
                }
                None => 0,
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Numeric { kind, message }) => {
            let _ = write!(stderr, "{}", error_json(&kind, &message));
            1
        }
    }
}

/// Run against the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
