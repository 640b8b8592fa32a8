//! Minimal line plot emitter.

use std::fmt::Write;

use rgg_lab_core::format::fmt_num;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

impl Plot {
    pub fn render(&self) -> String {
        let tx = |v: f64| if self.log_log { v.ln() } else { v };
        let usable: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&(x, y)| !self.log_log || (x > 0.0 && y > 0.0))
            .map(|(x, y)| (tx(x), tx(y)))
            .collect();
        let (x0, x1) = bounds(usable.iter().map(|p| p.0));
        let (y0, y1) = bounds(usable.iter().map(|p| p.1));
        let px = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (tx(y) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        // axes
        let _ = writeln!(
            out,
            r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
            m = MARGIN,
            t = MARGIN,
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN
        );
        let scale = if self.log_log { " (log)" } else { "" };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}{scale}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {})">{}{scale}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, v) in [(x0, y0), (x1, y1)].into_iter().enumerate() {
            let (xv, yv) = if self.log_log { (v.0.exp(), v.1.exp()) } else { v };
            let xpos = if k == 0 { MARGIN } else { WIDTH - MARGIN };
            let ypos = if k == 0 { HEIGHT - MARGIN } else { MARGIN };
            let _ = writeln!(
                out,
                r#"<text x="{xpos}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
                HEIGHT - MARGIN + 16.0,
                fmt_num(xv)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{ypos}" text-anchor="end" font-size="11">{}</text>"#,
                MARGIN - 4.0,
                fmt_num(yv)
            );
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|&&(x, y)| !self.log_log || (x > 0.0 && y > 0.0))
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (cx, cy) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
                WIDTH - MARGIN - 150.0,
                MARGIN + 16.0 * i as f64,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
