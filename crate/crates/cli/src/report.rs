//! Scatter data shared by the report files, and its SVG rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub participant_id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatter {
    pub x_label: String,
    pub y_label: String,
    pub r: Option<f64>,
    pub mae: Option<f64>,
    pub points: Vec<Point>,
}

/// The parts of any report file that `report` needs.
#[derive(Debug, Deserialize)]
pub struct ReportHead {
    pub kind: String,
    pub scatter: Scatter,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// `[lo, hi]` padded by 5%, widened when all values coincide.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.5 };
    (lo - pad, hi + pad)
}

fn tick_label(v: f64, span: f64) -> String {
    if span >= 20.0 {
        format!("{v:.0}")
    } else if span >= 2.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

pub fn render_svg(title: &str, s: &Scatter) -> CliResult<String> {
    if s.points.len() < 2 {
        return Err(CliError::Data(format!("need ≥ 2 points to plot, report has {}", s.points.len())));
    }
    if s.points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(CliError::Data("report contains non-finite points".into()));
    }
    let (x0, x1) = range(s.points.iter().map(|p| p.x));
    let (y0, y1) = range(s.points.iter().map(|p| p.y));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let (x, y) = (px(xv), py(yv));
        let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{bottom}" x2="{x:.1}" y2="{}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            bottom + 18.0,
            tick_label(xv, x1 - x0)
        );
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y:.1}" x2="{left}" y2="{y:.1}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 8.0,
            y + 4.0,
            tick_label(yv, y1 - y0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&s.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        HEIGHT / 2.0,
        escape(&s.y_label)
    );
    let mut notes = Vec::new();
    if let Some(r) = s.r {
        notes.push(format!("r = {r:.3}"));
    }
    if let Some(m) = s.mae {
        notes.push(format!("MAE = {m:.3}"));
    }
    notes.push(format!("n = {}", s.points.len()));
    for (i, note) in notes.iter().enumerate() {
        let _ = writeln!(svg, r#"<text class="stat" x="{}" y="{}">{note}</text>"#, left + 10.0, top + 14.0 + 16.0 * i as f64);
    }
    for p in &s.points {
        let _ = writeln!(
            svg,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="steelblue" fill-opacity="0.7"><title>{}</title></circle>"#,
            px(p.x),
            py(p.y),
            escape(&p.participant_id)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One-paragraph plain-text summary printed by `report`.
pub fn summary(kind: &str, s: &Scatter) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
    format!(
        "{kind} report: {} points, {} vs {}\nr = {}\nMAE = {}\n",
        s.points.len(),
        s.y_label,
        s.x_label,
        fmt(s.r),
        fmt(s.mae)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scatter(n: usize) -> Scatter {
        Scatter {
            x_label: "score <true>".into(),
            y_label: "EyeScore".into(),
            r: Some(0.12345),
            mae: None,
            points: (0..n)
                .map(|i| Point {
                    participant_id: format!("p{i}"),
                    x: i as f64,
                    y: (i * i) as f64,
                })
                .collect(),
        }
    }

    #[test]
    fn one_marker_per_point() {
        let svg = render_svg("t", &scatter(3)).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("r = 0.123"));
        assert!(svg.contains("score &lt;true&gt;"));
        assert!(!svg.contains("MAE"));
    }

    #[test]
    fn single_point_refused() {
        let e = render_svg("t", &scatter(1)).unwrap_err();
        assert!(e.to_string().contains("need ≥ 2 points"));
    }

    #[test]
    fn flat_data_still_has_a_range() {
        let mut s = scatter(3);
        for p in &mut s.points {
            p.y = 5.0;
        }
        let svg = render_svg("t", &s).unwrap();
        assert!(!svg.contains("NaN"));
    }
}
