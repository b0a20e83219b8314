//! CSV, JSON and SVG renderings of sweep tables and audit reports.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::AuditReport;
use crate::sweep::{PhaseRow, PhaseTable, SweepConfig};
use crate::VERSION;

pub const TOOL_NAME: &str = "geophase";

pub const CSV_HEADER: &str = "g,m,gamma_composite,gamma_I,gamma_II,gamma_sum,additivity_gap,p1,resultant_I,resultant_II,status";

/// Series drawn in every panel, in legend order: label and dash pattern.
pub const SVG_SERIES: [(&str, &str); 4] = [
    ("composite system", ""),
    ("subsystem I", "10 5"),
    ("subsystem II", "10 4 2 4"),
    ("sum of subsystems", "2 4"),
];

fn io_error(path: &Path, err: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn non_empty(table: &PhaseTable) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::InvalidParameter {
            name: "table",
            reason: "nothing to write: the table has no rows".into(),
        });
    }
    Ok(())
}

/// `%.{digits}g`-style formatting with trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format_significant(v, 12)).unwrap_or_default()
}

pub fn csv_string(table: &PhaseTable) -> Result<String> {
    non_empty(table)?;
    let mut out = String::with_capacity(64 * (table.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let fields = [
            format_significant(r.g, 12),
            r.m.to_string(),
            cell(r.gamma_composite),
            cell(r.gamma_i),
            cell(r.gamma_ii),
            cell(r.gamma_sum),
            cell(r.additivity_gap),
            cell(r.p1),
            cell(r.resultant_i),
            cell(r.resultant_ii),
            r.status.clone(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(table: &PhaseTable, path: &Path) -> Result<()> {
    write_file(path, &csv_string(table)?)
}

/// JSON document: tool metadata, the configuration and the row records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub tool: String,
    pub version: String,
    pub config: SweepConfig,
    pub rows: Vec<PhaseRow>,
}

/// Output destinations are left out of the echo so that identical runs give
/// identical bytes wherever they are written.
fn echoed_config(config: &SweepConfig) -> SweepConfig {
    SweepConfig {
        csv: None,
        json: None,
        svg: None,
        ..config.clone()
    }
}

pub fn json_string(table: &PhaseTable) -> Result<String> {
    non_empty(table)?;
    let doc = TableDocument {
        tool: TOOL_NAME.to_string(),
        version: VERSION.to_string(),
        config: echoed_config(&table.config),
        rows: table.rows.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidParameter {
        name: "table",
        reason: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn emit_json(table: &PhaseTable, path: &Path) -> Result<()> {
    write_file(path, &json_string(table)?)
}

pub fn read_json(path: &Path) -> Result<TableDocument> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_error(path, e))
}

#[derive(Serialize)]
struct AuditDocument<'a> {
    tool: &'a str,
    version: &'a str,
    report: &'a AuditReport,
}

pub fn audit_json_string(report: &AuditReport) -> Result<String> {
    let doc = AuditDocument {
        tool: TOOL_NAME,
        version: VERSION,
        report,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidParameter {
        name: "report",
        reason: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn emit_audit_json(report: &AuditReport, path: &Path) -> Result<()> {
    write_file(path, &audit_json_string(report)?)
}

const SVG_WIDTH: f64 = 1200.0;
const SVG_HEIGHT: f64 = 900.0;

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Panel {
    fn at(index: usize) -> Self {
        let (col, row) = ((index % 2) as f64, (index / 2) as f64);
        Panel {
            x0: 80.0 + col * 580.0,
            y0: 90.0 + row * 400.0,
            w: 480.0,
            h: 320.0,
        }
    }
}

/// Four panels (one per level) of phase against coupling, each with the
/// composite, subsystem I, subsystem II and summed series.
pub fn svg_string(table: &PhaseTable) -> Result<String> {
    non_empty(table)?;
    let (g_lo, g_hi) = table
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.g), hi.max(r.g))
        });
    let span = if g_hi > g_lo { g_hi - g_lo } else { 1.0 };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="14">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="600" y="30" text-anchor="middle" font-size="18">Berry phases at theta = {}, coupling {}</text>"#,
        format_significant(table.config.theta, 6),
        table.config.coupling_form
    );
    for (i, (label, dash)) in SVG_SERIES.iter().enumerate() {
        let x = 200.0 + 220.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="55" x2="{}" y2="55" stroke="black" stroke-width="2"{}/>"#,
            x + 40.0,
            dash_attr(dash)
        );
        let _ = writeln!(s, r#"<text x="{}" y="60">{label}</text>"#, x + 48.0);
    }

    for m in 1..=4 {
        let p = Panel::at(m - 1);
        let map_x = |g: f64| p.x0 + (g - g_lo) / span * p.w;
        let map_y = |phase: f64| p.y0 + (PI - phase) / (2.0 * PI) * p.h;
        let _ = writeln!(s, r#"<g id="panel-m{m}">"#);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="dimgray"/>"#,
            p.x0, p.y0, p.w, p.h
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="lightgray"/>"#,
            p.x0,
            map_y(0.0),
            p.x0 + p.w,
            map_y(0.0)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">m = {m}</text>"#,
            p.x0 + p.w / 2.0,
            p.y0 - 8.0
        );
        for (phase, text) in [(PI, "π"), (0.0, "0"), (-PI, "−π")] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{text}</text>"#,
                p.x0 - 6.0,
                map_y(phase) + 5.0
            );
        }
        for (g, anchor) in [(g_lo, "start"), (g_hi, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="{anchor}">g = {}</text>"#,
                map_x(g),
                p.y0 + p.h + 20.0,
                format_significant(g, 6)
            );
        }
        let rows: Vec<&PhaseRow> = table.rows.iter().filter(|r| r.m == m).collect();
        let series: [fn(&PhaseRow) -> Option<f64>; 4] = [
            |r| r.gamma_composite,
            |r| r.gamma_i,
            |r| r.gamma_ii,
            |r| r.gamma_sum,
        ];
        for ((label, dash), value) in SVG_SERIES.iter().zip(series) {
            let points: Vec<String> = rows
                .iter()
                .filter_map(|r| value(r).map(|v| format!("{:.2},{:.2}", map_x(r.g), map_y(v))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline data-series="{label}" fill="none" stroke="black" stroke-width="1.5"{} points="{}"/>"#,
                dash_attr(dash),
                points.join(" ")
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn dash_attr(dash: &str) -> String {
    if dash.is_empty() {
        String::new()
    } else {
        format!(r#" stroke-dasharray="{dash}""#)
    }
}

pub fn emit_svg(table: &PhaseTable, path: &Path) -> Result<()> {
    write_file(path, &svg_string(table)?)
}
