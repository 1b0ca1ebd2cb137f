use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::study::{StudyRecord, SummaryRow};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// `method,design,n,replication,estimate`, one line per record.
pub fn records_csv(records: &[StudyRecord]) -> String {
    let mut s = String::from("method,design,n,replication,estimate\n");
    for r in records {
        writeln!(s, "{},{},{},{},{:.16e}", r.method, r.design.name(), r.n, r.replication, r.estimate).unwrap();
    }
    s
}

/// `method,design,n,sd`; an undefined deviation leaves the field empty.
pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut s = String::from("method,design,n,sd\n");
    for r in summary {
        let sd = r.sd.map(|v| format!("{v:.16e}")).unwrap_or_default();
        writeln!(s, "{},{},{},{}", r.method, r.design.name(), r.n, sd).unwrap();
    }
    s
}

/// Log-log line chart of standard deviation against sample size.
pub fn summary_svg(summary: &[SummaryRow]) -> String {
    let mut series: BTreeMap<_, Vec<(f64, f64)>> = BTreeMap::new();
    for r in summary {
        if let Some(sd) = r.sd.filter(|&v| v > 0.0) {
            series.entry(r.method).or_default().push(((r.n as f64).log10(), sd.log10()));
        }
    }
    let pts = series.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (left, right, top, bottom) = (px(x0), px(x1), py(y1), py(y0));
    writeln!(s, r#"<path d="M{left},{top} V{bottom} H{right}" stroke="black" fill="none"/>"#).unwrap();
    for e in x0 as i32..=x1 as i32 {
        let x = px(e as f64);
        writeln!(s, r#"<line x1="{x}" y1="{bottom}" x2="{x}" y2="{}" stroke="black"/>"#, bottom + 5.0).unwrap();
        writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">1e{e}</text>"#, bottom + 20.0).unwrap();
    }
    for e in y0 as i32..=y1 as i32 {
        let y = py(e as f64);
        writeln!(s, r#"<line x1="{}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>"#, left - 5.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e{e}</text>"#, left - 8.0, y + 4.0).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#, (left + right) / 2.0, HEIGHT - 15.0).unwrap();
    writeln!(s, r#"<text x="15" y="{}" transform="rotate(-90 15 {0})" text-anchor="middle">sd</text>"#, (top + bottom) / 2.0)
        .unwrap();
    for (i, (method, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, path.join(" ")).unwrap();
        for &(x, y) in pts {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y)).unwrap();
        }
        let ly = MARGIN + 16.0 * i as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, right - 110.0, right - 90.0)
            .unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{method}</text>"#, right - 85.0, ly + 4.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
