//! CSV, JSON-lines and plot-data output.
//!
//! All numbers are printed in Rust's shortest round-trip form, so a report
//! determines its output bytes. Missing values print as `NA` (CSV, plot
//! data) or `null` (JSON).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

use super::study::{Row, StudyReport};

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 8] =
    ["sweep_value", "err_exact", "err_tail", "err_bound", "cost_exact", "cost_bound", "d_eps", "runtime_ms"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
    PlotData,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::JsonLines, Format::PlotData];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::JsonLines => "jsonl",
            Format::PlotData => "dat",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::JsonLines),
            "plot" | "plot-data" | "dat" => Ok(Format::PlotData),
            other => Err(invalid(format!("unknown output format '{other}'"))),
        }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn trailer(report: &StudyReport, out: &mut String) {
    if report.summary.truncated {
        out.push_str("# truncated: runtime cap reached\n");
    }
    if let Some(msg) = &report.summary.aborted {
        let _ = writeln!(out, "# aborted: {}", msg.replace('\n', " "));
    }
}

pub fn to_csv(report: &StudyReport) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sweep_value,
            r.err_exact,
            r.err_tail,
            opt(r.err_bound),
            r.cost_exact,
            opt(r.cost_bound),
            opt(r.d_eps),
            opt(r.runtime_ms)
        );
    }
    trailer(report, &mut out);
    out
}

/// One object per row, then `{"summary": …}`.
pub fn to_json_lines(report: &StudyReport) -> String {
    let mut out = String::new();
    for r in &report.rows {
        out.push_str(&serde_json::to_string(r).expect("rows serialize"));
        out.push('\n');
    }
    let summary = serde_json::json!({ "summary": report.summary });
    out.push_str(&summary.to_string());
    out.push('\n');
    out
}

/// Whitespace-separated `log10 x`, `log10 err` and the fitted line at `x`,
/// where `x` is the study's rate abscissa.
pub fn to_plot_data(report: &StudyReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let _ = writeln!(out, "# {} {}", s.problem, s.scheme);
    let _ = writeln!(out, "# log10_{} log10_err log10_fit", s.rate_abscissa);
    match (s.fitted_rate, s.fit_intercept) {
        (Some(rate), Some(c)) => {
            let _ = writeln!(out, "# slope {} intercept {}", -rate, -c / std::f64::consts::LN_10);
        }
        _ => out.push_str("# slope NA\n"),
    }
    let x_of = |r: &Row| if s.rate_abscissa == "cost" { r.cost_exact } else { r.sweep_value };
    for r in &report.rows {
        let x = x_of(r);
        let fit = match (s.fitted_rate, s.fit_intercept) {
            (Some(rate), Some(c)) => ((-c - rate * x.ln()) / std::f64::consts::LN_10).to_string(),
            _ => "NA".into(),
        };
        let _ = writeln!(out, "{} {} {}", x.log10(), r.err_exact.log10(), fit);
    }
    trailer(report, &mut out);
    out
}

pub fn render(report: &StudyReport, format: Format) -> String {
    match format {
        Format::Csv => to_csv(report),
        Format::JsonLines => to_json_lines(report),
        Format::PlotData => to_plot_data(report),
    }
}

/// Writes `dir/name.{csv,jsonl,dat}` and returns the paths.
pub fn emit(report: &StudyReport, dir: &Path, name: &str, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(formats.len());
    for &f in formats {
        let path = dir.join(format!("{name}.{}", f.extension()));
        std::fs::write(&path, render(report, f))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::study::{fit_rate, RowExtra, Summary};

    fn summary() -> Summary {
        Summary {
            problem: "INT_1D",
            scheme: "pg(2)".into(),
            seed: 0,
            target_rate: Some(2.0),
            fitted_rate: None,
            fit_intercept: None,
            rate_abscissa: "n",
            rows: 0,
            truncated: false,
            aborted: None,
            c0: None,
            c1: None,
            calibrated: false,
            l_const: None,
            c2: None,
            c_up: None,
            c_up_product: None,
        }
    }

    fn row(n: f64, err: f64) -> Row {
        Row {
            sweep_value: n,
            err_exact: err,
            err_tail: 0.0,
            err_bound: None,
            cost_exact: n,
            cost_bound: None,
            d_eps: None,
            runtime_ms: None,
            extra: RowExtra::default(),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = StudyReport { rows: vec![], summary: summary() };
        assert_eq!(to_csv(&report), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn rows_and_markers() {
        let mut s = summary();
        s.aborted = Some("sweep value 64: boom".into());
        let report = StudyReport { rows: vec![row(8.0, 0.25)], summary: s };
        let csv = to_csv(&report);
        assert_eq!(csv.lines().nth(1), Some("8,0.25,0,NA,8,NA,NA,NA"));
        assert_eq!(csv.lines().last(), Some("# aborted: sweep value 64: boom"));
        let json = to_json_lines(&report);
        let first: serde_json::Value = serde_json::from_str(json.lines().next().unwrap()).unwrap();
        assert_eq!(first["err_bound"], serde_json::Value::Null);
        assert!(json.lines().last().unwrap().starts_with("{\"summary\""));
    }

    #[test]
    fn plot_slope_is_the_fitted_decay() {
        let rows: Vec<Row> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&n: &f64| row(n, 3.0 * n.powf(-1.7))).collect();
        let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.sweep_value, r.err_exact)).collect();
        let (rate, c) = fit_rate(&samples).unwrap();
        let mut s = summary();
        s.fitted_rate = Some(rate);
        s.fit_intercept = Some(c);
        let plot = to_plot_data(&StudyReport { rows, summary: s });
        let slope: f64 = plot.lines().nth(2).unwrap().split_whitespace().nth(2).unwrap().parse().unwrap();
        assert!((slope + 1.7).abs() < 1e-12);
        // The fitted column reproduces exact power-law data.
        for line in plot.lines().skip(3) {
            let v: Vec<f64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
            assert!((v[1] - v[2]).abs() < 1e-12);
        }
    }
}
