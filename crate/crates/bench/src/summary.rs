//! Per-cell statistics, failure counts and boxplot artifacts.
//!
//! Box statistics are taken on `log10(MSD)` and mapped back, so that the
//! boxes and 1.5·IQR whiskers are those of a log-scale boxplot.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tikhonov_picard::selectors::Method;

use crate::error::Result;
use crate::run::{format_float, RunRecord};
use crate::svg;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const FAILURE_TABLE_FILE: &str = "failures.csv";
pub const BOXPLOT_DIR: &str = "boxplots";

/// Records with MSD above this count as failures.
pub const FAILURE_MSD: f64 = 1.0;

pub const BOXPLOT_HEADER: [&str; 7] = ["method", "median", "q1", "q3", "lo_whisker", "hi_whisker", "outliers"];

#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub lo_whisker: f64,
    pub hi_whisker: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data (`p ∈ [0, 1]`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box statistics of `values` on a log scale. Non-finite and nonpositive
/// values are ignored; `None` if nothing is left.
pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let mut logs: Vec<f64> = values.iter().filter(|v| v.is_finite() && **v > 0.0).map(|v| v.log10()).collect();
    if logs.is_empty() {
        return None;
    }
    logs.sort_by(f64::total_cmp);
    let (q1, med, q3) = (quantile(&logs, 0.25), quantile(&logs, 0.5), quantile(&logs, 0.75));
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || logs.iter().copied().filter(|&v| v >= lo_fence && v <= hi_fence);
    let lo = inside().fold(f64::INFINITY, f64::min);
    let hi = inside().fold(f64::NEG_INFINITY, f64::max);
    let exp = |v: f64| 10f64.powf(v);
    Some(BoxStats {
        count: logs.len(),
        median: exp(med),
        q1: exp(q1),
        q3: exp(q3),
        lo_whisker: exp(lo),
        hi_whisker: exp(hi),
        outliers: logs.iter().copied().filter(|&v| v < lo_fence || v > hi_fence).map(exp).collect(),
    })
}

/// Statistics of one method in one (problem, alpha) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub problem: String,
    pub alpha: f64,
    pub method: Method,
    pub records: usize,
    /// `None` when no record had a usable MSD.
    pub stats: Option<BoxStats>,
    /// Records with MSD above [`FAILURE_MSD`] or not finite.
    pub failures: usize,
    pub median_lambda: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
}

impl Summary {
    /// `(problem, alpha)` pairs in first-seen order.
    pub fn panels(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for c in &self.cells {
            if !out.iter().any(|(p, a)| *p == c.problem && a.to_bits() == c.alpha.to_bits()) {
                out.push((c.problem.clone(), c.alpha));
            }
        }
        out
    }

    pub fn panel(&self, problem: &str, alpha: f64) -> Vec<&CellSummary> {
        self.cells.iter().filter(|c| c.problem == problem && c.alpha.to_bits() == alpha.to_bits()).collect()
    }

    pub fn cell(&self, problem: &str, alpha: f64, method: Method) -> Option<&CellSummary> {
        self.panel(problem, alpha).into_iter().find(|c| c.method == method)
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    quantile(values, 0.5)
}

/// Groups records by (problem, alpha, method). Panels keep the order in which
/// they first appear; methods within a panel follow [`Method::ALL`].
pub fn summarize(records: &[RunRecord]) -> Summary {
    let mut panels: Vec<(String, f64)> = Vec::new();
    for r in records {
        if !panels.iter().any(|(p, a)| *p == r.problem && a.to_bits() == r.alpha.to_bits()) {
            panels.push((r.problem.clone(), r.alpha));
        }
    }
    let mut cells = Vec::new();
    for (problem, alpha) in panels {
        for method in Method::ALL {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.problem == problem && r.alpha.to_bits() == alpha.to_bits() && r.method == method)
                .collect();
            if group.is_empty() {
                continue;
            }
            let msd: Vec<f64> = group.iter().map(|r| r.msd).collect();
            let mut lambdas: Vec<f64> = group.iter().map(|r| r.lambda).collect();
            cells.push(CellSummary {
                problem: problem.clone(),
                alpha,
                method,
                records: group.len(),
                stats: box_stats(&msd),
                failures: msd.iter().filter(|&&v| !(v <= FAILURE_MSD)).count(),
                median_lambda: median(&mut lambdas),
            });
        }
    }
    Summary { cells }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// One row per cell with the box statistics and failure count.
pub fn write_summary_csv<W: Write>(summary: &Summary, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "problem", "alpha", "method", "records", "median", "q1", "q3", "lo_whisker", "hi_whisker", "outliers",
        "failures", "median_lambda",
    ])?;
    for c in &summary.cells {
        let s = c.stats.as_ref();
        out.write_record([
            c.problem.clone(),
            format_float(c.alpha),
            c.method.label().to_string(),
            c.records.to_string(),
            opt_float(s.map(|s| s.median)),
            opt_float(s.map(|s| s.q1)),
            opt_float(s.map(|s| s.q3)),
            opt_float(s.map(|s| s.lo_whisker)),
            opt_float(s.map(|s| s.hi_whisker)),
            s.map_or(0, |s| s.outliers.len()).to_string(),
            c.failures.to_string(),
            format_float(c.median_lambda),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Failure counts with one column per method present in the summary.
pub fn write_failure_table<W: Write>(summary: &Summary, w: W) -> Result<()> {
    let methods: Vec<Method> =
        Method::ALL.into_iter().filter(|m| summary.cells.iter().any(|c| c.method == *m)).collect();
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["problem".to_string(), "alpha".to_string()];
    header.extend(methods.iter().map(|m| m.label().to_string()));
    out.write_record(&header)?;
    for (problem, alpha) in summary.panels() {
        let mut row = vec![problem.clone(), format_float(alpha)];
        for &m in &methods {
            row.push(summary.cell(&problem, alpha, m).map(|c| c.failures.to_string()).unwrap_or_default());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Boxplot rows for the given cells; outliers are `;`-joined.
pub fn write_boxplot_csv<W: Write>(cells: &[&CellSummary], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BOXPLOT_HEADER)?;
    for c in cells {
        let s = c.stats.as_ref();
        let outliers = s
            .map(|s| s.outliers.iter().map(|&v| format_float(v)).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        out.write_record([
            c.method.label().to_string(),
            opt_float(s.map(|s| s.median)),
            opt_float(s.map(|s| s.q1)),
            opt_float(s.map(|s| s.q3)),
            opt_float(s.map(|s| s.lo_whisker)),
            opt_float(s.map(|s| s.hi_whisker)),
            outliers,
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// File stem for a panel, restricted to characters safe in file names.
pub fn panel_stem(problem: &str, alpha: f64) -> String {
    let clean: String =
        problem.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{clean}_alpha_{alpha:e}")
}

/// One CSV (and optionally one SVG) per (problem, alpha) panel in `dir`.
pub fn emit_boxplot_data(summary: &Summary, dir: &Path, with_svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (problem, alpha) in summary.panels() {
        let cells = summary.panel(&problem, alpha);
        let stem = panel_stem(&problem, alpha);
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = BufWriter::new(File::create(&csv_path)?);
        write_boxplot_csv(&cells, &mut w)?;
        w.flush()?;
        written.push(csv_path);
        if with_svg {
            let svg_path = dir.join(format!("{stem}.svg"));
            let title = format!("{problem}, alpha = {alpha:e}");
            fs::write(&svg_path, svg::boxplot(&title, &cells))?;
            written.push(svg_path);
        }
    }
    Ok(written)
}

/// `summary.csv`, `failures.csv` and the `boxplots/` directory under `dir`.
pub fn write_all(summary: &Summary, dir: &Path, with_svg: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(SUMMARY_FILE))?);
    write_summary_csv(summary, &mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join(FAILURE_TABLE_FILE))?);
    write_failure_table(summary, &mut w)?;
    w.flush()?;
    emit_boxplot_data(summary, &dir.join(BOXPLOT_DIR), with_svg)?;
    Ok(())
}
