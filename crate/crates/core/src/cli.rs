//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 numeric failure, 2 usage or configuration error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::Integer;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::cycles::{a_sweep, integrate_cycle, CircleAction, CycleError, CycleOptions, CycleResult, DEFAULT_BOUNDARY_GUARD};
use crate::geometry::{validate_curvature, MetricField};
use crate::metrics::{catalog, solve_ypq, ypq_metric, MetricError, YpqParams};
use crate::quadrature::QuadratureSpec;
use crate::selftest;
use crate::wcs::SymbolVariant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("config file {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "loopwcs", version, about = "Wodzicki-Chern-Simons integrals over circle-action cycles")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check curvature identities (and the Einstein condition) at random points.
    Verify(VerifyArgs),
    /// Integrate the WCS form over the cycle of a circle action.
    Wcs(WcsArgs),
    /// Run a family of cycle integrals and write a CSV table.
    Sweep(SweepArgs),
    /// Run the built-in invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Flat `key = value` file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `ypq`, `ypq-a`, or a catalog name (flat_torusN, round_sphereN, perturbed_torus3, s2xs3).
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Family parameter for `ypq-a`.
    #[arg(long)]
    pub a: Option<f64>,
    /// Fibre scale for `ypq-a`.
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    /// Radius for round spheres.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Gauss-Legendre nodes per integrated axis.
    #[arg(long, default_value_t = 32)]
    pub nodes: usize,
    #[arg(long, default_value_t = 2)]
    pub max_refinements: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Integrate symmetry axes by quadrature instead of multiplying by their extent.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Worker threads (default: WCS_WORKERS or all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Trapezoid nodes for loop integrals off symmetry axes.
    #[arg(long, default_value_t = 64)]
    pub loop_nodes: usize,
    #[arg(long, default_value = "reduced")]
    pub variant: String,
    #[arg(long, default_value_t = 1.0)]
    pub s_scale: f64,
    /// Polar-axis band (fraction of extent) evaluated by extrapolation; 0 disables.
    #[arg(long, default_value_t = DEFAULT_BOUNDARY_GUARD)]
    pub boundary_guard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct WcsArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// `trivial`, `rotate:AXIS[:SPEED]`, `iterate:N[:rotate:AXIS[:SPEED]]`.
    #[arg(long, default_value = "rotate:alpha")]
    pub action: String,
    /// Form degree is 2k-1; defaults to (dim+1)/2.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Semicolon-separated `p,q` pairs, e.g. `7,3;13,7`.
    #[arg(long)]
    pub pairs: Option<String>,
    /// All coprime pairs with square 4p^2-3q^2 and p up to this bound.
    #[arg(long)]
    pub scan_pmax: Option<u64>,
    /// Comma-separated values of a (fibre scale fixed to 1).
    #[arg(long)]
    pub a_grid: Option<String>,
    #[arg(long, default_value = "rotate:alpha")]
    pub action: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

/// Boolean keys that appear as bare flags on the command line.
const FLAG_KEYS: &[&str] = &["no-symmetry"];

/// Parses a flat `key = value` config file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        out.insert(key, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

/// Splices config-file values in front of the command-line flags so that
/// flags given explicitly win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let path = PathBuf::from(path);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Config { path: path.clone(), message: e.to_string() })?;
    let map = parse_config(&text).map_err(|message| CliError::Config { path: path.clone(), message })?;
    let mut injected = Vec::new();
    for (k, v) in map {
        if k == "config" {
            continue;
        }
        if FLAG_KEYS.contains(&k.as_str()) {
            match v.as_str() {
                "true" | "1" | "yes" => injected.push(format!("--{k}")),
                "false" | "0" | "no" => {}
                other => {
                    return Err(CliError::Config { path, message: format!("{k}: expected a boolean, got '{other}'") })
                }
            }
        } else {
            injected.push(format!("--{k}={v}"));
        }
    }
    // program name and subcommand stay in front
    let split = args.len().min(2);
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend(args[split..].iter().cloned());
    Ok(out)
}

/// Builds the metric named by the selector flags.
pub fn build_metric(m: &MetricArgs) -> Result<Arc<dyn MetricField>, CliError> {
    let name = match (&m.metric, m.p.is_some() || m.q.is_some(), m.a.is_some()) {
        (Some(n), _, _) => n.clone(),
        (None, true, _) => "ypq".into(),
        (None, false, true) => "ypq-a".into(),
        (None, false, false) => return Err(CliError::Usage("no metric selected (use --metric)".into())),
    };
    match name.as_str() {
        "ypq" => {
            let (Some(p), Some(q)) = (m.p, m.q) else {
                return Err(CliError::Usage("--metric ypq needs --p and --q".into()));
            };
            Ok(Arc::new(ypq_metric(solve_ypq(p, q)?)?))
        }
        "ypq-a" => {
            let a = m.a.ok_or_else(|| CliError::Usage("--metric ypq-a needs --a".into()))?;
            Ok(Arc::new(ypq_metric(YpqParams::from_a(a, m.ell)?)?))
        }
        other => Ok(catalog(other, m.radius)?),
    }
}

fn axis_by_name(metric: &dyn MetricField, name: &str) -> Result<usize, CliError> {
    let canonical = match name {
        "φ" => "phi",
        "θ" => "theta",
        "ψ" => "psi",
        "α" => "alpha",
        other => other,
    };
    if let Some(i) = metric.domain().axis_index(canonical) {
        return Ok(i);
    }
    if let Ok(i) = canonical.parse::<usize>() {
        if i < metric.dim() {
            return Ok(i);
        }
    }
    let names: Vec<&str> = metric.domain().axes.iter().map(|a| a.name.as_str()).collect();
    Err(CliError::Usage(format!("unknown axis '{name}' (axes: {})", names.join(", "))))
}

/// Parses `trivial`, `rotate:AXIS[:SPEED]`, or `iterate:N[:BASE]`.
pub fn parse_action(metric: &dyn MetricField, spec: &str) -> Result<CircleAction, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["trivial"] => Ok(CircleAction::Trivial),
        ["rotate", axis] => {
            let axis = axis_by_name(metric, axis)?;
            CircleAction::unit_rotation(metric, axis).map_err(|e| CliError::Usage(e.to_string()))
        }
        ["rotate", axis, speed] => {
            let axis = axis_by_name(metric, axis)?;
            let speed = speed
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad rotation speed '{speed}'")))?;
            Ok(CircleAction::Rotation { axis, speed })
        }
        ["iterate", n, rest @ ..] => {
            let n = n
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("bad iterate count '{n}'")))?;
            let base = if rest.is_empty() {
                let axis = metric
                    .domain()
                    .axis_index("alpha")
                    .or_else(|| metric.killing_axes().last().copied())
                    .ok_or_else(|| CliError::Usage("metric has no default rotation axis".into()))?;
                CircleAction::unit_rotation(metric, axis).map_err(|e| CliError::Usage(e.to_string()))?
            } else {
                parse_action(metric, &rest.join(":"))?
            };
            Ok(base.iterate(n))
        }
        _ => Err(CliError::Usage(format!(
            "bad action '{spec}' (expected trivial, rotate:AXIS[:SPEED] or iterate:N[:ACTION])"
        ))),
    }
}

fn quad_spec(q: &QuadArgs, dim: usize) -> QuadratureSpec {
    let mut spec = QuadratureSpec::uniform(dim, q.nodes);
    spec.max_refinements = q.max_refinements;
    spec.rel_tol = q.rel_tol;
    spec.abs_tol = q.abs_tol;
    spec.workers = q.workers;
    spec
}

fn cycle_options(q: &QuadArgs) -> Result<CycleOptions, CliError> {
    Ok(CycleOptions {
        variant: q.variant.parse::<SymbolVariant>().map_err(CliError::Usage)?,
        s_scale: q.s_scale,
        loop_nodes: q.loop_nodes,
        symmetry: !q.no_symmetry,
        boundary_guard: q.boundary_guard,
    })
}

/// serde_json formatter printing floats with 17 significant digits.
pub struct SigDigits<'a>(PrettyFormatter<'a>);

impl Default for SigDigits<'_> {
    fn default() -> Self {
        SigDigits(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for SigDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON with stable field order and 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits::default());
    value.serialize(&mut ser).expect("serializable record");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8 json")
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize)]
struct CsvRow {
    label: String,
    p: Option<u64>,
    q: Option<u64>,
    a: String,
    ell: String,
    value: String,
    pi4_numerator: Option<i64>,
    pi4_denominator: Option<i64>,
    error_estimate: String,
    converged: Option<bool>,
    wall_time: String,
    error: String,
}

fn row_from(label: String, metric: Option<&dyn MetricField>, r: Result<&CycleResult, String>) -> CsvRow {
    let params = metric.map(|m| m.parameters()).unwrap_or_default();
    let get_f = |k: &str| params.get(k).and_then(|v| v.as_f64()).map(fmt17).unwrap_or_default();
    let get_u = |k: &str| params.get(k).and_then(|v| v.as_u64());
    let mut row = CsvRow {
        label,
        p: get_u("p"),
        q: get_u("q"),
        a: get_f("a"),
        ell: get_f("ell"),
        value: String::new(),
        pi4_numerator: None,
        pi4_denominator: None,
        error_estimate: String::new(),
        converged: None,
        wall_time: String::new(),
        error: String::new(),
    };
    match r {
        Ok(c) => {
            row.value = fmt17(c.value);
            row.pi4_numerator = c.pi4_multiple.map(|m| m.numerator);
            row.pi4_denominator = c.pi4_multiple.map(|m| m.denominator);
            row.error_estimate = fmt17(c.error_estimate);
            row.converged = Some(c.converged);
            row.wall_time = format!("{:.3}", c.wall_time);
        }
        Err(e) => row.error = e,
    }
    row
}

fn write_csv(rows: &[CsvRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn summary(r: &CycleResult) -> String {
    let mut s = format!(
        "{} / {}: value {} (error estimate {:.3e}, {})\n",
        r.provenance.metric,
        r.provenance.action,
        fmt17(r.value),
        r.error_estimate,
        if r.converged { "converged" } else { "NOT converged" }
    );
    if let Some(m) = r.pi4_multiple {
        s += &format!("  = ({m}) pi^4\n");
    }
    if let Some(refc) = &r.provenance.reference {
        s += &format!(
            "  reference ({}) pi^4 = {}; ratio {}\n",
            refc.expected_pi4_multiple,
            fmt17(refc.expected_value),
            fmt17(refc.ratio)
        );
    }
    s += &format!(
        "  nodes {:?} -> {:?}, wall time {:.3} s\n",
        r.node_counts, r.final_node_counts, r.wall_time
    );
    s
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let metric = build_metric(&a.metric)?;
    let pts = selftest::sample_points(metric.as_ref(), a.samples, a.seed);
    match validate_curvature(metric.as_ref(), &pts) {
        Ok(report) => {
            writeln!(out, "{report}")?;
            let failures = report.failures();
            if failures.is_empty() {
                writeln!(out, "PASS")?;
                Ok(EXIT_OK)
            } else {
                writeln!(out, "FAIL: {}", failures.join(", "))?;
                Ok(EXIT_NUMERIC)
            }
        }
        Err(e) => {
            writeln!(out, "FAIL: {e}")?;
            Ok(EXIT_NUMERIC)
        }
    }
}

fn cmd_wcs(a: &WcsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let metric = build_metric(&a.metric)?;
    let action = parse_action(metric.as_ref(), &a.action)?;
    let dim = metric.dim();
    let k = a.k.unwrap_or(dim.div_ceil(2));
    if dim % 2 == 0 || k < 2 || 2 * k - 1 != dim {
        return Err(CliError::Usage(format!("need an odd dimension 2k-1 >= 3; metric has {dim}, k = {k}")));
    }
    let opts = cycle_options(&a.quad)?;
    let spec = quad_spec(&a.quad, dim);
    let result = match integrate_cycle(metric.as_ref(), &action, k, &spec, &opts) {
        Ok(r) => r,
        Err(CycleError::InvalidAction(m)) => return Err(CliError::Usage(m)),
        Err(e @ CycleError::Dimension { .. }) => return Err(CliError::Usage(e.to_string())),
        Err(e) => {
            writeln!(err, "numeric failure: {e}")?;
            return Ok(EXIT_NUMERIC);
        }
    };
    let text = match a.format {
        Format::Json => to_json(&result),
        Format::Csv => write_csv(&[row_from(result.provenance.action.clone(), Some(metric.as_ref()), Ok(&result))])?,
    };
    emit(out, a.output.as_deref(), &text)?;
    let human = summary(&result);
    if a.output.is_some() {
        write!(out, "{human}")?;
    } else {
        write!(err, "{human}")?;
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NUMERIC })
}

fn parse_list<T: std::str::FromStr>(s: &str, sep: char) -> Result<Vec<T>, CliError> {
    s.split(sep)
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| CliError::Usage(format!("cannot parse '{t}'"))))
        .collect()
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let opts = cycle_options(&a.quad)?;
    let modes = [a.pairs.is_some(), a.scan_pmax.is_some(), a.a_grid.is_some()];
    if modes.iter().filter(|m| **m).count() != 1 {
        return Err(CliError::Usage("give exactly one of --pairs, --scan-pmax, --a-grid".into()));
    }
    let mut rows = Vec::new();
    let mut failed = false;
    if let Some(grid) = &a.a_grid {
        let grid: Vec<f64> = parse_list(grid, ',')?;
        if grid.is_empty() {
            return Err(CliError::Usage("empty a-grid".into()));
        }
        let sweep = a_sweep(&grid, 3, &quad_spec(&a.quad, 5), &opts);
        for r in &sweep.rows {
            let metric = YpqParams::from_a(r.a, 1.0).ok().and_then(|p| ypq_metric(p).ok());
            let res = r.result.as_ref().map_err(|e| e.to_string());
            failed |= res.as_ref().map_or(true, |c| !c.converged);
            let mut row = row_from(format!("a={}", r.a), metric.as_ref().map(|m| m as &dyn MetricField), res);
            if metric.is_none() {
                row.a = fmt17(r.a);
            }
            rows.push(row);
        }
        let mut fit = row_from("fitted_exponent".into(), None, Err(String::new()));
        match sweep.exponent {
            Some(e) => fit.value = fmt17(e),
            None => fit.error = "fewer than two usable rows".into(),
        }
        rows.push(fit);
    } else {
        let pairs: Vec<(u64, u64)> = if let Some(s) = &a.pairs {
            s.split(';')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    let v: Vec<u64> = parse_list(t, ',')?;
                    match v.as_slice() {
                        [p, q] => Ok((*p, *q)),
                        _ => Err(CliError::Usage(format!("bad pair '{t}'"))),
                    }
                })
                .collect::<Result<_, _>>()?
        } else {
            let pmax = a.scan_pmax.unwrap_or(0);
            (2..=pmax)
                .flat_map(|p| (1..p).map(move |q| (p, q)))
                .filter(|&(p, q)| p.gcd(&q) == 1)
                .filter(|&(p, q)| {
                    let d = 4 * p * p - 3 * q * q;
                    let r = (d as f64).sqrt().round() as u64;
                    r * r == d
                })
                .collect()
        };
        if pairs.is_empty() {
            return Err(CliError::Usage("empty list of (p, q) entries".into()));
        }
        for (p, q) in pairs {
            let label = format!("ypq({p},{q})");
            let metric = solve_ypq(p, q).map_err(|e| e.to_string()).and_then(|x| ypq_metric(x).map_err(|e| e.to_string()));
            match metric {
                Ok(m) => {
                    let res = parse_action(&m, &a.action)
                        .map_err(|e| e.to_string())
                        .and_then(|act| {
                            integrate_cycle(&m, &act, 3, &quad_spec(&a.quad, 5), &opts).map_err(|e| e.to_string())
                        });
                    failed |= res.as_ref().map_or(true, |c| !c.converged);
                    rows.push(row_from(label, Some(&m), res.as_ref().map_err(Clone::clone)));
                }
                Err(e) => {
                    failed = true;
                    let mut row = row_from(label, None, Err(e));
                    row.p = Some(p);
                    row.q = Some(q);
                    rows.push(row);
                }
            }
        }
    }
    let text = write_csv(&rows)?;
    emit(out, a.output.as_deref(), &text)?;
    if a.output.is_some() {
        writeln!(out, "wrote {} rows", rows.len())?;
    }
    Ok(if failed { EXIT_NUMERIC } else { EXIT_OK })
}

fn cmd_selftest(a: &SelftestArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let fault = match a.inject_fault.as_deref() {
        None => false,
        Some("riemann-sign") => true,
        Some(other) => return Err(CliError::Usage(format!("unknown fault '{other}'"))),
    };
    let outcomes = selftest::run_all(fault);
    let mut failed = Vec::new();
    for o in &outcomes {
        writeln!(
            out,
            "{:<4} {:<32} {:>8.3} s  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.seconds,
            o.detail
        )?;
        if !o.passed {
            failed.push(o.name);
        }
    }
    if failed.is_empty() {
        writeln!(out, "all {} suites passed", outcomes.len())?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "failed: {}", failed.join(", "))?;
        Ok(EXIT_NUMERIC)
    }
}

/// Runs the CLI on `args` (including the program name), writing to the
/// given streams, and returns the exit code.
pub fn run_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Wcs(a) => cmd_wcs(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_NUMERIC
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with_io(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
