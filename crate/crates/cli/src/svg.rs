//! Deterministic SVG charts: verdict-coloured markers, labelled polylines
//! and a legend on a fixed 900×600 canvas.

use std::fmt::Write;

pub const WIDTH: f64 = 900.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

#[derive(Debug, Clone)]
pub struct Style {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub class: String,
}

#[derive(Debug, Clone)]
pub struct Polyline {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const CLASS_COLORS: [(&str, &str); 8] = [
    ("strongly_linearly_stable", "#1a9850"),
    ("linearly_stable", "#91cf60"),
    ("spectrally_stable_not_linear", "#fee08b"),
    ("hyperbolic", "#d73027"),
    ("unstable", "#fc8d59"),
    ("stable", "#1a9850"),
    ("error", "#7f7f7f"),
    ("outside", "#ffffff"),
];

const CURVE_COLORS: [&str; 4] = ["#08306b", "#6a3d9a", "#b15928", "#000000"];

fn class_color(class: &str) -> &'static str {
    CLASS_COLORS
        .iter()
        .find(|(c, _)| *c == class)
        .map(|(_, col)| *col)
        .unwrap_or("#999999")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let span = (self.x.1 - self.x.0).max(f64::MIN_POSITIVE);
        LEFT + (x - self.x.0) / span * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let span = (self.y.1 - self.y.0).max(f64::MIN_POSITIVE);
        HEIGHT - BOTTOM - (y - self.y.0) / span * (HEIGHT - TOP - BOTTOM)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=5).map(|k| lo + (hi - lo) * k as f64 / 5.0).collect()
}

/// Pure function of its inputs; identical data gives identical bytes.
pub fn emit_svg(markers: &[Marker], curves: &[Polyline], style: &Style) -> String {
    let frame = Frame { x: style.x_range, y: style.y_range };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="30" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&style.title)
    );

    // axes
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<g id="axes" stroke="black" fill="none"><rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/></g>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(s, r#"<g id="ticks" font-family="sans-serif" font-size="12">"#);
    for t in ticks(style.x_range.0, style.x_range.1) {
        let px = frame.px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{t:.3}</text>"#,
            y0 + 5.0,
            y0 + 20.0
        );
    }
    for t in ticks(style.y_range.0, style.y_range.1) {
        let py = frame.py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t:.3}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 25.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="25" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 25 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&style.y_label)
    );

    if markers.is_empty() && curves.is_empty() {
        let _ = writeln!(
            s,
            r##"<text class="warning" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="16" fill="#b00000" text-anchor="middle">warning: no data</text>"##,
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0
        );
    }

    // marker size follows the grid density
    let r = (3.0 - (markers.len() as f64).log10().max(0.0) * 0.5).clamp(1.0, 4.0);
    let mut classes: Vec<&str> = Vec::new();
    let _ = writeln!(s, r#"<g id="markers" stroke="none">"#);
    for m in markers {
        if !classes.contains(&m.class.as_str()) {
            classes.push(&m.class);
        }
        let _ = writeln!(
            s,
            r#"<circle class="{}" cx="{:.2}" cy="{:.2}" r="{r:.2}" fill="{}"/>"#,
            escape(&m.class),
            frame.px(m.x),
            frame.py(m.y),
            class_color(&m.class)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="curves" fill="none" stroke-width="2">"#);
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c.points.iter().map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="curve" data-label="{}" stroke="{}" points="{}"/>"#,
            escape(&c.label),
            CURVE_COLORS[i % CURVE_COLORS.len()],
            pts.join(" ")
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="legend" font-family="sans-serif" font-size="12">"#);
    let lx = WIDTH - RIGHT + 20.0;
    let mut ly = TOP + 10.0;
    for class in &classes {
        let _ = writeln!(
            s,
            r#"<circle cx="{lx:.2}" cy="{ly:.2}" r="5" fill="{}" stroke="black" stroke-width="0.5"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            class_color(class),
            lx + 12.0,
            ly + 4.0,
            escape(class)
        );
        ly += 20.0;
    }
    for (i, c) in curves.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx - 6.0,
            lx + 6.0,
            CURVE_COLORS[i % CURVE_COLORS.len()],
            lx + 12.0,
            ly + 4.0,
            escape(&c.label)
        );
        ly += 20.0;
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
