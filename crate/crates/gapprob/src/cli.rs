//! Command-line surface: argument parsing, configuration layering
//! (flags, then environment, then config file) and report output.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::domain::{IntervalUnion, PrecisionConfig, SourceSpec};
use crate::ensemble_mc::{mc_gap_probability, McConfig};
use crate::error::{Error, Result};
use crate::pde_source::{residual_source_pde, PdeFdConfig};
use crate::pearcey::fredholm::{fredholm_log_det, fredholm_log_det_mp};
use crate::pearcey::pde::{residual_pearcey_pde, residual_pearcey_pde_mp, ChartKind, PearceyFdConfig, PearceyForm};
use crate::pearcey::scaling::scaling_limit_report;
use crate::report::{cell, CsvSweep, Envelope};
use crate::tau::gap_probability;
use crate::tau::identities::{check_identity, FdConfig, IdentityId};

/// Every setting a run can take. Flat so that it maps one-to-one onto the
/// key=value config format.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<usize>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub e: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    /// Comma-separated list of matrix sizes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub double: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
}

impl RunConfig {
    /// Fields set in `self` win; the rest come from `lower`.
    pub fn over(&self, lower: &RunConfig) -> RunConfig {
        let mut out = to_map(lower);
        out.extend(to_map(self));
        from_map(out).expect("merging two valid configs")
    }

    /// Parse a config file: a JSON object, or `key = value` lines with `#` comments.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed).map_err(|e| Error::invalid(format!("config: {e}")));
        }
        let mut map = Map::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("config line {}: expected key=value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            map.insert(k.to_string(), kv_value(k, v));
        }
        from_map(map)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in to_map(self) {
            out.push_str(&format!("{k}={}\n", cell(&v)));
        }
        out
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }
}

const STRING_KEYS: [&str; 10] = ["command", "E", "G", "n", "id", "chart", "form", "output", "format", "grid"];

fn kv_value(key: &str, v: &str) -> Value {
    if STRING_KEYS.contains(&key) {
        return Value::String(v.to_string());
    }
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn to_map(c: &RunConfig) -> Map<String, Value> {
    match serde_json::to_value(c).expect("config serializes") {
        Value::Object(m) => m,
        _ => unreachable!("config is a struct"),
    }
}

fn from_map(m: Map<String, Value>) -> Result<RunConfig> {
    serde_json::from_value(Value::Object(m)).map_err(|e| Error::invalid(format!("config: {e}")))
}

#[derive(Parser, Debug)]
#[command(name = "gapprob", version, about = "Gap probabilities for the external-source ensemble and the Pearcey process")]
pub struct Cli {
    /// Config file (key=value lines or JSON); flags and environment win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Significant decimal digits for extended-precision work.
    #[arg(long, global = true, env = "GAPPROB_DIGITS")]
    pub digits: Option<u32>,
    /// Cap on worker threads.
    #[arg(long, global = true, env = "GAPPROB_THREADS")]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Sweep one parameter: NAME=START:STOP:COUNT or NAME=v1,v2,...; emits CSV.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct SourceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub k1: Option<usize>,
    #[arg(long)]
    pub k2: Option<usize>,
    /// Union of intervals, "lo,hi;lo,hi"; -inf and inf allowed.
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Probability that every eigenvalue lies in E.
    Prob(SourceArgs),
    /// Monte Carlo estimate of the same probability.
    Mc {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check one catalogued identity, or "all".
    CheckIdentity {
        #[arg(long)]
        id: Option<String>,
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Residual of the PDE in (a; E).
    PdeSource {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Residual of the Pearcey PDE in (t; E).
    PearceyPde {
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long = "E", allow_hyphen_values = true)]
        e: Option<String>,
        /// Use double precision instead of --digits.
        #[arg(long)]
        double: bool,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        h_t: Option<f64>,
        #[arg(long)]
        h_x: Option<f64>,
        #[arg(long)]
        levels: Option<usize>,
        /// endpoints or orbit.
        #[arg(long)]
        chart: Option<String>,
        /// printed or corrected.
        #[arg(long)]
        form: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// log det(I - K_t χ_E) and its stability under halving the Gauss order.
    PearceyProb {
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[arg(long = "E", allow_hyphen_values = true)]
        e: Option<String>,
        #[arg(long)]
        order: Option<usize>,
        /// Use double precision instead of --digits.
        #[arg(long)]
        double: bool,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Finite-n log-probabilities against the Pearcey limit.
    Scaling {
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        #[arg(long = "G", allow_hyphen_values = true)]
        g: Option<String>,
        /// Comma-separated even sizes, ascending.
        #[arg(long)]
        n: Option<String>,
    },
}

fn source_into(c: &mut RunConfig, s: SourceArgs) {
    c.a = s.a;
    c.k1 = s.k1;
    c.k2 = s.k2;
    c.e = s.e;
}

impl Cli {
    /// The settings given on the command line and through the environment.
    pub fn run_config(self) -> (RunConfig, Option<PathBuf>) {
        let mut c = RunConfig {
            digits: self.digits,
            threads: self.threads,
            output: self.output,
            format: self.format,
            grid: self.grid,
            ..Default::default()
        };
        let name = match self.command {
            Command::Prob(s) => {
                source_into(&mut c, s);
                "prob"
            }
            Command::Mc { src, samples, seed } => {
                source_into(&mut c, src);
                c.samples = samples;
                c.seed = seed;
                "mc"
            }
            Command::CheckIdentity { id, src, step, levels, tol } => {
                source_into(&mut c, src);
                (c.id, c.step, c.levels, c.tol) = (id, step, levels, tol);
                "check-identity"
            }
            Command::PdeSource { src, step, levels, tol } => {
                source_into(&mut c, src);
                (c.step, c.levels, c.tol) = (step, levels, tol);
                "pde-source"
            }
            Command::PearceyPde { t, e, double, order, h_t, h_x, levels, chart, form, tol } => {
                (c.t, c.e, c.order, c.h_t, c.h_x, c.levels, c.chart, c.form, c.tol) =
                    (t, e, order, h_t, h_x, levels, chart, form, tol);
                c.double = double.then_some(true);
                "pearcey-pde"
            }
            Command::PearceyProb { t, e, order, double, tol } => {
                (c.t, c.e, c.order, c.tol) = (t, e, order, tol);
                c.double = double.then_some(true);
                "pearcey-prob"
            }
            Command::Scaling { s, g, n } => {
                (c.s, c.g, c.n) = (s, g, n);
                "scaling"
            }
        };
        c.command = Some(name.into());
        (c, self.config)
    }
}

/// Rendered report and its verdict.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: Option<bool>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed == Some(false) {
            1
        } else {
            0
        }
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::invalid(format!("missing --{name}")))
}

fn source(c: &RunConfig) -> Result<(SourceSpec, IntervalUnion)> {
    let spec = SourceSpec::new(need(&c.a, "a")?, need(&c.k1, "k1")?, need(&c.k2, "k2")?)?;
    Ok((spec, IntervalUnion::parse(&need(&c.e, "E")?)?))
}

fn precision(c: &RunConfig, default: u32) -> Result<PrecisionConfig> {
    let p = PrecisionConfig::with_digits(c.digits.unwrap_or(default));
    p.validate()?;
    Ok(p)
}

fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::invalid(format!("bad size '{p}'"))))
        .collect()
}

fn parse_chart(s: Option<&str>) -> Result<ChartKind> {
    match s.unwrap_or("endpoints") {
        "endpoints" => Ok(ChartKind::Endpoints),
        "orbit" => Ok(ChartKind::Orbit),
        other => Err(Error::invalid(format!("unknown chart '{other}'"))),
    }
}

fn parse_form(s: Option<&str>) -> Result<PearceyForm> {
    match s.unwrap_or("printed") {
        "printed" => Ok(PearceyForm::Printed),
        "corrected" => Ok(PearceyForm::Corrected),
        other => Err(Error::invalid(format!("unknown form '{other}'"))),
    }
}

/// Smallest observed order accepted for an identity check.
pub const MIN_IDENTITY_ORDER: f64 = 1.8;

/// One evaluation: (anchor, verdict, result, effective config).
fn evaluate(c: &RunConfig) -> Result<(String, Option<bool>, Value, RunConfig)> {
    let command = need(&c.command, "command")?;
    let mut eff = c.clone();
    let out = match command.as_str() {
        "prob" => {
            let (spec, e) = source(c)?;
            let prec = precision(c, 40)?;
            eff.digits = Some(prec.significant_digits);
            let p = gap_probability(&spec, &e, &prec)?;
            ("P(every eigenvalue of A + H lies in E)".into(), None, json!({ "probability": p }))
        }
        "mc" => {
            let (spec, e) = source(c)?;
            let cfg = McConfig { samples: c.samples.unwrap_or(100_000), seed: c.seed.unwrap_or(0) };
            (eff.samples, eff.seed) = (Some(cfg.samples), Some(cfg.seed));
            let est = mc_gap_probability(&spec, &e, &cfg)?;
            ("frequency of {spec(A + H) in E} over sampled matrices".into(), None, serde_json::to_value(est)?)
        }
        "check-identity" => {
            let (spec, e) = source(c)?;
            let prec = precision(c, 40)?;
            let fd = FdConfig { step: c.step, levels: c.levels.unwrap_or(2) };
            let tol = c.tol.unwrap_or(1e-6);
            (eff.digits, eff.levels, eff.tol) = (Some(prec.significant_digits), Some(fd.levels), Some(tol));
            let id = c.id.clone().unwrap_or_else(|| "all".into());
            let ids: Vec<IdentityId> =
                if id == "all" { IdentityId::ALL.to_vec() } else { vec![id.parse::<IdentityId>()?] };
            let mut reports = Vec::new();
            let mut ok = true;
            for id in &ids {
                let r = check_identity(*id, &spec, &e, &fd, &prec)?;
                let pass = r.residual < tol && r.convergence_order.is_none_or(|o| o >= MIN_IDENTITY_ORDER);
                ok &= pass;
                let mut v = serde_json::to_value(&r)?;
                v["passed"] = json!(pass);
                reports.push(v);
            }
            let anchor = if ids.len() == 1 { ids[0].statement().to_string() } else { "identity catalog".into() };
            let result = if reports.len() == 1 { reports.remove(0) } else { Value::Array(reports) };
            (anchor, Some(ok), result)
        }
        "pde-source" => {
            let (spec, e) = source(c)?;
            let prec = precision(c, 40)?;
            let fd = PdeFdConfig { step: c.step, levels: c.levels.unwrap_or(4) };
            let tol = c.tol.unwrap_or(1e-3);
            (eff.digits, eff.levels, eff.tol) = (Some(prec.significant_digits), Some(fd.levels), Some(tol));
            let r = residual_source_pde(&spec, &e, &fd, &prec)?;
            let pass = r.relative_residual < tol && r.decreasing;
            ("quartic PDE for log P in (a; E), built from F, G and B_{-1}".into(), Some(pass), serde_json::to_value(r)?)
        }
        "pearcey-pde" => {
            let t = need(&c.t, "t")?;
            let e = IntervalUnion::parse(&need(&c.e, "E")?)?;
            let double = c.double.unwrap_or(false);
            let fd = PearceyFdConfig {
                h_t: c.h_t,
                h_x: c.h_x,
                levels: c.levels.unwrap_or(4),
                order: c.order.unwrap_or(40),
                chart: parse_chart(c.chart.as_deref())?,
                form: parse_form(c.form.as_deref())?,
            };
            let tol = c.tol.unwrap_or(if double { 5e-2 } else { 1e-3 });
            (eff.levels, eff.order, eff.tol) = (Some(fd.levels), Some(fd.order), Some(tol));
            let r = if double {
                eff.digits = None;
                residual_pearcey_pde(t, &e, &fd)?
            } else {
                let prec = precision(c, 30)?;
                eff.digits = Some(prec.significant_digits);
                residual_pearcey_pde_mp(t, &e, &fd, prec.significant_digits)?
            };
            let pass = r.relative_residual < tol && r.decreasing;
            ("fourth-order Wronskian PDE for log det(I - K_t χ_E)".into(), Some(pass), serde_json::to_value(r)?)
        }
        "pearcey-prob" => {
            let t = need(&c.t, "t")?;
            let e = IntervalUnion::parse(&need(&c.e, "E")?)?;
            let m = c.order.unwrap_or(40);
            let tol = c.tol.unwrap_or(1e-10);
            let double = c.double.unwrap_or(false);
            (eff.order, eff.tol) = (Some(m), Some(tol));
            let half = (m / 2).max(4);
            let (q, qh) = if double {
                eff.digits = None;
                (fredholm_log_det(t, &e, m)?, fredholm_log_det(t, &e, half)?)
            } else {
                let prec = precision(c, 30)?;
                eff.digits = Some(prec.significant_digits);
                let d = prec.significant_digits;
                (fredholm_log_det_mp(t, &e, m, d)?, fredholm_log_det_mp(t, &e, half, d)?)
            };
            let gap = (q - qh).abs();
            let result = json!({ "q": q, "probability": q.exp(), "q_half_order": qh, "half_order": half, "order_gap": gap });
            ("log det(I - K_t χ_E) by Gauss-Legendre Nyström".into(), Some(gap < tol), result)
        }
        "scaling" => {
            let s = need(&c.s, "s")?;
            let g = IntervalUnion::parse(&need(&c.g, "G")?)?;
            let n = parse_sizes(&need(&c.n, "n")?)?;
            let prec = precision(c, 30)?;
            eff.digits = Some(prec.significant_digits);
            let r = scaling_limit_report(s, &g, &n, &prec)?;
            let pass = r.strictly_decreasing && r.slope.is_some_and(|v| v > 0.0);
            ("Q_z at n = 2/z^4 against log det(I - K_s χ_G)".into(), Some(pass), serde_json::to_value(r)?)
        }
        other => return Err(Error::invalid(format!("unknown command '{other}'"))),
    };
    Ok((out.0, out.1, out.2, eff))
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Evaluation { point: "report".into(), reason: e.to_string() }
    }
}

/// Sweep values from NAME=START:STOP:COUNT or NAME=v1,v2,...
pub fn parse_grid(spec: &str) -> Result<(String, Vec<f64>)> {
    let (name, vals) = spec.split_once('=').ok_or_else(|| Error::invalid("grid must be NAME=..."))?;
    let bad = || Error::invalid(format!("bad grid '{spec}'"));
    let mut v: Vec<f64> = if vals.contains(':') {
        let p: Vec<&str> = vals.split(':').collect();
        if p.len() != 3 {
            return Err(bad());
        }
        let (a, b): (f64, f64) = (p[0].trim().parse().map_err(|_| bad())?, p[1].trim().parse().map_err(|_| bad())?);
        let n: usize = p[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        vals.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok((name.trim().to_string(), v))
}

fn set_param(c: &RunConfig, name: &str, value: f64) -> Result<RunConfig> {
    let mut m = to_map(c);
    if STRING_KEYS.contains(&name) || name == "grid" {
        return Err(Error::invalid(format!("cannot sweep '{name}'")));
    }
    let v = if matches!(name, "k1" | "k2" | "samples" | "seed" | "digits" | "order" | "levels") {
        if value.fract() != 0.0 || value < 0.0 {
            return Err(Error::invalid(format!("{name} must be a non-negative integer")));
        }
        json!(value as u64)
    } else {
        json!(value)
    };
    m.insert(name.to_string(), v);
    from_map(m)
}

fn flat_row(result: &Value) -> Vec<(String, String)> {
    match result {
        Value::Object(m) => m.iter().map(|(k, v)| (k.clone(), cell(v))).collect(),
        other => vec![("result".into(), cell(other))],
    }
}

/// Run a fully merged configuration and render its report.
pub fn execute(c: &RunConfig) -> Result<Outcome> {
    let format = c.format.clone().unwrap_or_else(|| if c.grid.is_some() { "csv".into() } else { "json".into() });
    if format != "json" && format != "csv" {
        return Err(Error::invalid(format!("unknown format '{format}'")));
    }
    if let Some(g) = &c.grid {
        let (name, values) = parse_grid(g)?;
        let mut csv = CsvSweep::default();
        let mut passed: Option<bool> = None;
        let mut anchor = String::new();
        for v in values {
            let point = set_param(c, &name, v)?;
            let (a, p, result, eff) = evaluate(&point)?;
            anchor = a;
            if let Some(p) = p {
                passed = Some(passed.unwrap_or(true) && p);
            }
            let mut row = vec![(name.clone(), cell(&json!(v)))];
            row.extend(flat_row(&result));
            if let Some(p) = p {
                row.push(("passed".into(), p.to_string()));
            }
            if csv.columns.is_empty() {
                csv.meta("schema_version", crate::report::SCHEMA_VERSION);
                csv.meta("command", eff.command.clone().unwrap_or_default());
                csv.meta("anchor", &anchor);
                for (k, val) in to_map(&RunConfig { grid: None, ..eff }) {
                    if k != name && k != "command" {
                        csv.meta(&k, cell(&val));
                    }
                }
                csv.columns = row.iter().map(|(k, _)| k.clone()).collect();
            }
            csv.push(row.into_iter().map(|(_, v)| v).collect());
        }
        let _ = anchor;
        return Ok(Outcome { text: csv.render(), passed });
    }
    let (anchor, passed, result, eff) = evaluate(c)?;
    let text = if format == "csv" {
        let mut csv = CsvSweep::default();
        csv.meta("schema_version", crate::report::SCHEMA_VERSION);
        csv.meta("command", eff.command.clone().unwrap_or_default());
        csv.meta("anchor", &anchor);
        for (k, val) in to_map(&eff) {
            if k != "command" {
                csv.meta(&k, cell(&val));
            }
        }
        // scaling reports carry their own table
        if let Some(rows) = result.get("rows").and_then(Value::as_array) {
            for r in rows {
                let row = flat_row(r);
                if csv.columns.is_empty() {
                    csv.columns = row.iter().map(|(k, _)| k.clone()).collect();
                }
                csv.push(row.into_iter().map(|(_, v)| v).collect());
            }
        } else {
            let row = flat_row(&result);
            csv.columns = row.iter().map(|(k, _)| k.clone()).collect();
            csv.push(row.into_iter().map(|(_, v)| v).collect());
        }
        csv.render()
    } else {
        Envelope::new(&eff.command.clone().unwrap_or_default(), &anchor, passed, &eff, &result).to_json()
    };
    Ok(Outcome { text, passed })
}

/// Full entry point; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (flags, path) = cli.run_config();
    let merged = match path.as_deref().map(RunConfig::load).transpose() {
        Ok(Some(file)) => {
            let mut m = flags.over(&file);
            m.command = flags.command.clone();
            m
        }
        Ok(None) => flags,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(n) = merged.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // a second build in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&merged) {
        Ok(out) => {
            let written = match &merged.output {
                Some(p) => std::fs::write(p, &out.text).map_err(|e| e.to_string()),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return 2;
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
