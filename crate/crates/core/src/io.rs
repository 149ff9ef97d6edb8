//! Artifacts: field and sweep CSV tables, versioned JSON, Markdown summaries,
//! SVG heatmaps and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{IdentityReport, MuReport, QSweepRecord};
use crate::field_ops::ScalarField;
use crate::geometry::{make_domain, scale_domain, ShapeSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of sweep tables.
pub const SWEEP_COLUMNS: [&str; 6] = ["q", "Lambda_q", "log_lambda_q", "sup_norm", "x4b_ok", "a1_ok"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FieldHeader {
    schema_version: u32,
    spec: ShapeSpec,
    scale: f64,
    nx: usize,
    ny: usize,
}

/// CSV with one JSON header line (`# {...}`) naming the domain, then
/// `ix,iy,x,y,value` per node. Values use the shortest round-trip decimal
/// form, so reading back is bit-exact.
pub fn field_csv(field: &ScalarField) -> Result<String> {
    let d = &field.domain;
    let header = FieldHeader { schema_version: SCHEMA_VERSION, spec: d.spec().clone(), scale: d.scale(), nx: d.nx, ny: d.ny };
    let mut out = format!("# {}\nix,iy,x,y,value\n", serde_json::to_string(&header)?);
    for (k, v) in field.values.iter().enumerate() {
        let (ix, iy) = d.node_ij(k);
        let [x, y] = d.coords(k);
        writeln!(out, "{ix},{iy},{x},{y},{v}").unwrap();
    }
    Ok(out)
}

pub fn write_field_csv(field: &ScalarField, path: &Path) -> Result<()> {
    fs::write(path, field_csv(field)?)?;
    Ok(())
}

/// Rebuilds the domain from the header and reads the values back.
pub fn parse_field_csv(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))?;
    let json = first.strip_prefix("# ").ok_or_else(|| Error::Parse("missing JSON header line".into()))?;
    let header: FieldHeader = serde_json::from_str(json)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema version {}", header.schema_version)));
    }
    let mut d = make_domain(&header.spec)?;
    if header.scale != 1.0 {
        d = scale_domain(&d, header.scale)?;
    }
    if (d.nx, d.ny) != (header.nx, header.ny) {
        return Err(Error::Parse("header grid size does not match the rebuilt domain".into()));
    }
    match lines.next() {
        Some("ix,iy,x,y,value") => {}
        _ => return Err(Error::Parse("missing column header".into())),
    }
    let mut values = vec![f64::NAN; d.n_nodes()];
    let mut seen = 0;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse(format!("malformed row {}: {line}", lineno + 3));
        if cols.len() != 5 {
            return Err(bad());
        }
        let ix: usize = cols[0].parse().map_err(|_| bad())?;
        let iy: usize = cols[1].parse().map_err(|_| bad())?;
        let v: f64 = cols[4].parse().map_err(|_| bad())?;
        if ix >= d.nx || iy >= d.ny {
            return Err(bad());
        }
        values[d.node(ix, iy)] = v;
        seen += 1;
    }
    if seen != d.n_nodes() || values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse(format!("expected {} node rows, got {seen}", d.n_nodes())));
    }
    ScalarField::new(Arc::new(d), values)
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField> {
    parse_field_csv(&fs::read_to_string(path)?)
}

pub fn sweep_csv(records: &[QSweepRecord]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        writeln!(out, "{},{},{},{},{},{}", r.q, r.lambda_big, r.log_lambda_q, r.sup_norm_uq, r.bound_x4b_ok, r.bound_a1_ok)
            .unwrap();
    }
    out
}

pub fn write_sweep_csv(records: &[QSweepRecord], path: &Path) -> Result<()> {
    fs::write(path, sweep_csv(records))?;
    Ok(())
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with a leading `schema_version` field; `body` must serialize
/// to an object.
pub fn versioned_json<T: Serialize>(body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned { schema_version: SCHEMA_VERSION, body })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(body: &T, path: &Path) -> Result<()> {
    fs::write(path, versioned_json(body)?)?;
    Ok(())
}

pub fn identity_markdown(report: &IdentityReport) -> String {
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let mut out = format!("# Identity checks\n\n{passed} of {} checks pass (p = {}).\n\n", report.checks.len(), report.config.p);
    out.push_str("| check | value | expected | tolerance | result |\n|---|---|---|---|---|\n");
    for c in &report.checks {
        writeln!(
            out,
            "| {} | {:.10} | {:.10} | {:.1e} | {} |",
            c.name,
            c.value,
            c.expected,
            c.tolerance,
            if c.passed { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    out.push('\n');
    for c in &report.checks {
        writeln!(out, "- **{}**: {}", c.name, c.detail).unwrap();
    }
    out
}

pub fn mu_markdown(report: &MuReport) -> String {
    let mut out = String::from("# μ(Ω) by three routes\n\n| route | value |\n|---|---|\n");
    writeln!(out, "| q-sweep limit | {:.8} |", report.mu_sweep).unwrap();
    writeln!(out, "| log quotient | {:.8} |", report.mu_direct).unwrap();
    writeln!(out, "| singular problem | {:.8} |", report.mu_singular).unwrap();
    writeln!(
        out,
        "\nspread {:.3e}, explicit lower bound {:.6}, consistent: {}\n",
        report.spread, report.lower_bound, report.consistent
    )
    .unwrap();
    out.push_str("| q | Λ_q | log λ_q | ‖u_q‖∞ | x4b | a1 |\n|---|---|---|---|---|---|\n");
    for r in &report.records {
        writeln!(
            out,
            "| {} | {:.8} | {:.6} | {:.6e} | {} | {} |",
            r.q, r.lambda_big, r.log_lambda_q, r.sup_norm_uq, r.bound_x4b_ok, r.bound_a1_ok
        )
        .unwrap();
    }
    out
}

/// Piecewise-linear colour map from dark blue through teal to yellow.
fn color(t: f64) -> (u8, u8, u8) {
    const STOPS: [(f64, [f64; 3]); 4] =
        [(0.0, [68.0, 1.0, 84.0]), (0.35, [49.0, 104.0, 142.0]), (0.7, [53.0, 183.0, 121.0]), (1.0, [253.0, 231.0, 37.0])];
    let t = t.clamp(0.0, 1.0);
    let i = STOPS.iter().position(|s| s.0 >= t).unwrap_or(3).max(1);
    let (t0, c0) = STOPS[i - 1];
    let (t1, c1) = STOPS[i];
    let a = (t - t0) / (t1 - t0);
    let mix = |k: usize| (c0[k] + a * (c1[k] - c0[k])).round() as u8;
    (mix(0), mix(1), mix(2))
}

/// Heatmap of a field: one cell per node (block-averaged above 200 cells per
/// side), exterior nodes left blank, with a min/max legend.
pub fn field_svg(field: &ScalarField, title: &str) -> String {
    let d = &field.domain;
    let stride = d.nx.max(d.ny).div_ceil(200);
    let (cw, ch) = (d.nx.div_ceil(stride), d.ny.div_ceil(stride));
    let px = 3usize;
    let lo = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h) = (cw * px, ch * px);
    let legend = 40;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        w + 120,
        h + legend,
        w + 120,
        h + legend
    );
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    let kinds_in = |k: usize| d.kinds[k] != crate::geometry::NodeKind::Exterior;
    for cy in 0..ch {
        for cx in 0..cw {
            let (mut sum, mut n) = (0.0, 0);
            for iy in cy * stride..((cy + 1) * stride).min(d.ny) {
                for ix in cx * stride..((cx + 1) * stride).min(d.nx) {
                    let k = d.node(ix, iy);
                    if kinds_in(k) {
                        sum += field.values[k];
                        n += 1;
                    }
                }
            }
            if n == 0 {
                continue;
            }
            let (r, g, b) = color((sum / n as f64 - lo) / span);
            // rows run bottom to top in the domain
            writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{px}\" height=\"{px}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>",
                cx * px,
                (ch - 1 - cy) * px
            )
            .unwrap();
        }
    }
    let bar_x = w + 20;
    for i in 0..h {
        let (r, g, b) = color(1.0 - i as f64 / h.max(1) as f64);
        writeln!(s, "<rect x=\"{bar_x}\" y=\"{i}\" width=\"20\" height=\"1\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>").unwrap();
    }
    writeln!(s, "<text x=\"{}\" y=\"12\" font-size=\"11\" font-family=\"sans-serif\">max {hi:.4e}</text>", bar_x + 24).unwrap();
    writeln!(s, "<text x=\"{}\" y=\"{h}\" font-size=\"11\" font-family=\"sans-serif\">min {lo:.4e}</text>", bar_x + 24).unwrap();
    writeln!(s, "<text x=\"4\" y=\"{}\" font-size=\"13\" font-family=\"sans-serif\">{}</text>", h + 26, escape(title)).unwrap();
    s.push_str("</svg>\n");
    s
}

pub fn write_field_svg(field: &ScalarField, title: &str, path: &Path) -> Result<()> {
    fs::write(path, field_svg(field, title))?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub outputs: Vec<String>,
    pub passed: bool,
    pub summary: String,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: u64) -> Self {
        Self {
            command: command.into(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            started: now(),
            finished: 0.0,
            outputs: Vec::new(),
            passed: false,
            summary: String::new(),
        }
    }

    pub fn finish(&mut self, passed: bool, summary: impl Into<String>) {
        self.finished = now();
        self.passed = passed;
        self.summary = summary.into();
    }
}

fn now() -> f64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}
