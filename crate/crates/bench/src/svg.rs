//! Self-contained SVG boxplots on a log10 axis.

use std::fmt::Write;

use crate::summary::{CellSummary, FAILURE_MSD};

const SLOT: f64 = 70.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const PLOT_HEIGHT: f64 = 300.0;
const BOTTOM: f64 = 40.0;
const BOX_HALF: f64 = 20.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Decade range covering every plotted value (and the failure line).
fn decade_range(cells: &[&CellSummary]) -> (i32, i32) {
    let mut lo = FAILURE_MSD.log10();
    let mut hi = lo;
    for s in cells.iter().filter_map(|c| c.stats.as_ref()) {
        for v in [s.lo_whisker, s.hi_whisker].iter().chain(&s.outliers) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
    }
    let (lo, hi) = (lo.floor() as i32, hi.ceil() as i32);
    if lo == hi {
        (lo - 1, hi + 1)
    } else {
        (lo, hi)
    }
}

/// One box per cell, in the given order.
pub fn boxplot(title: &str, cells: &[&CellSummary]) -> String {
    let width = LEFT + RIGHT + SLOT * cells.len().max(1) as f64;
    let height = TOP + PLOT_HEIGHT + BOTTOM;
    let (d_lo, d_hi) = decade_range(cells);
    let y = |v: f64| TOP + PLOT_HEIGHT * (d_hi as f64 - v.log10()) / (d_hi - d_lo) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        width / 2.0,
        escape(title)
    );

    for d in d_lo..=d_hi {
        let yy = y(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/>"##,
            width - RIGHT
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, LEFT - 6.0, yy + 4.0);
    }
    let fail_y = y(FAILURE_MSD);
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{fail_y:.2}" x2="{:.2}" y2="{fail_y:.2}" stroke="#c33" stroke-dasharray="4 3"/>"##,
        width - RIGHT
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">MSD</text>"##,
        TOP + PLOT_HEIGHT / 2.0,
        TOP + PLOT_HEIGHT / 2.0
    );

    for (i, c) in cells.iter().enumerate() {
        let cx = LEFT + SLOT * (i as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + PLOT_HEIGHT + 18.0,
            escape(c.method.label())
        );
        if c.failures > 0 {
            let _ = writeln!(
                s,
                r##"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" fill="#c33">{} &gt; 1</text>"##,
                TOP + PLOT_HEIGHT + 32.0,
                c.failures
            );
        }
        let Some(b) = &c.stats else { continue };
        let (yq1, yq3, ymed) = (y(b.q1), y(b.q3), y(b.median));
        let (ylo, yhi) = (y(b.lo_whisker), y(b.hi_whisker));
        let _ = writeln!(
            s,
            r##"<line x1="{cx:.2}" y1="{yhi:.2}" x2="{cx:.2}" y2="{yq3:.2}" stroke="#333"/><line x1="{cx:.2}" y1="{yq1:.2}" x2="{cx:.2}" y2="{ylo:.2}" stroke="#333"/>"##
        );
        for yw in [ylo, yhi] {
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{yw:.2}" x2="{:.2}" y2="{yw:.2}" stroke="#333"/>"##,
                cx - BOX_HALF / 2.0,
                cx + BOX_HALF / 2.0
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="#cde" stroke="#333"/>"##,
            cx - BOX_HALF,
            2.0 * BOX_HALF,
            (yq1 - yq3).max(0.5)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{ymed:.2}" x2="{:.2}" y2="{ymed:.2}" stroke="#a00" stroke-width="2"/>"##,
            cx - BOX_HALF,
            cx + BOX_HALF
        );
        for &o in &b.outliers {
            let _ = writeln!(s, r##"<circle cx="{cx:.2}" cy="{:.2}" r="2.5" fill="none" stroke="#a00"/>"##, y(o));
        }
    }
    s.push_str("</svg>\n");
    s
}
