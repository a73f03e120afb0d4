//! Minimal standalone SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN: f64 = 56.0;
const MAX_POINTS: usize = 1500;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
        }
    }

    fn thinned(&self) -> Vec<(f64, f64)> {
        let n = self.points.len();
        if n <= MAX_POINTS {
            return self.points.clone();
        }
        let step = n.div_ceil(MAX_POINTS);
        let mut out: Vec<(f64, f64)> = self.points.iter().step_by(step).copied().collect();
        if let Some(&last) = self.points.last() {
            out.push(last);
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Vertically stacked panels, each with a title and one or more series.
pub fn render(panels: &[(String, Vec<Series>)]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, (title, series)) in panels.iter().enumerate() {
        let top = k as f64 * PANEL_HEIGHT;
        let (x0, x1) = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let (y0, y1) = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
        let plot_w = WIDTH - 2.0 * MARGIN;
        let plot_h = PANEL_HEIGHT - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| top + MARGIN + (1.0 - (y - y0) / (y1 - y0)) * plot_h;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            top + MARGIN / 2.0,
            escape(title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##,
            top + MARGIN
        );
        for (value, anchor_y) in [(y1, sy(y1)), (y0, sy(y0))] {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{:.4}</text>"#,
                MARGIN - 4.0,
                anchor_y + 4.0,
                value
            );
        }
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN}" x2="{0}" y1="{1:.1}" y2="{1:.1}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
                WIDTH - MARGIN,
                sy(0.0)
            );
        }
        let base = top + PANEL_HEIGHT - MARGIN + 14.0;
        let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{base}">t = {x0}</text>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{base}" text-anchor="end">t = {x1}</text>"#,
            WIDTH - MARGIN
        );
        for (i, s) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut path = String::new();
            for (x, y) in s.thinned().into_iter().filter(|p| p.1.is_finite()) {
                let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.4" points="{}"/>"#,
                path.trim_end()
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                MARGIN + 8.0,
                top + MARGIN + 14.0 * (i + 1) as f64,
                escape(&s.name)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_standalone_svg() {
        let s = Series::new("a<b", (1..=5000).map(|t| (t as f64, (t as f64).sqrt())).collect());
        let svg = render(&[("V_t".into(), vec![s])]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("a&lt;b"));
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(points.split(' ').count() <= MAX_POINTS + 1);
    }
}
