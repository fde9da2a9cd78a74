//! Dependency-free SVG plots with byte-stable output.

use crate::spatial::PlanarCoord;
use std::fmt::Write;

/// Score gradient, 0 → 100.
pub const GRADIENT: [&str; 5] = ["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"];
pub const NOISE_COLOR: &str = "#bdbdbd";
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const PAD: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    ScoreMap,
    UmapScatter,
    ClusterBars,
    Radar,
}

impl std::str::FromStr for PlotKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "score_map" => Ok(PlotKind::ScoreMap),
            "umap_scatter" => Ok(PlotKind::UmapScatter),
            "cluster_bars" => Ok(PlotKind::ClusterBars),
            "radar" => Ok(PlotKind::Radar),
            other => Err(format!("unknown plot kind {other:?}")),
        }
    }
}

fn hex(c: &str) -> [u8; 3] {
    let v = u32::from_str_radix(&c[1..], 16).expect("palette colors are hex");
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

/// Linear interpolation along [`GRADIENT`]; scores are clamped to [0, 100].
pub fn score_color(score: f64) -> String {
    let t = if score.is_nan() { 0.0 } else { score.clamp(0.0, 100.0) / 100.0 };
    let seg = t * (GRADIENT.len() - 1) as f64;
    let i = (seg.floor() as usize).min(GRADIENT.len() - 2);
    let f = seg - i as f64;
    let (a, b) = (hex(GRADIENT[i]), hex(GRADIENT[i + 1]));
    let mix = |k: usize| (a[k] as f64 + (b[k] as f64 - a[k] as f64) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

pub fn cluster_color(label: i64) -> &'static str {
    if label < 0 {
        NOISE_COLOR
    } else {
        PALETTE[label as usize % PALETTE.len()]
    }
}

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
    s
}

/// Maps data bounds into the plot area, preserving aspect ratio.
struct Frame {
    min: (f64, f64),
    height: f64,
    scale: f64,
    off: (f64, f64),
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (x, y) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let (w, h) = ((hi.0 - lo.0).max(1e-9), (hi.1 - lo.1).max(1e-9));
        let (aw, ah) = (WIDTH - 2.0 * PAD - 140.0, HEIGHT - 2.0 * PAD - 20.0);
        let scale = (aw / w).min(ah / h);
        let off = (PAD + (aw - w * scale) / 2.0, PAD + 20.0 + (ah - h * scale) / 2.0);
        Self { min: lo, height: h, scale, off }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (self.off.0 + (x - self.min.0) * self.scale, self.off.1 + (self.height - (y - self.min.1)) * self.scale)
    }
}

fn legend(s: &mut String, entries: &[(String, String)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = PAD + 30.0 + i as f64 * 18.0;
        let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#, WIDTH - 130.0, y);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#, WIDTH - 112.0, y + 10.0, escape(label));
    }
}

/// Bridges colored by score over a light street underlay.
pub fn score_map(title: &str, streets: &[(PlanarCoord, PlanarCoord)], bridges: &[(PlanarCoord, f64)]) -> String {
    let frame = Frame::fit(
        streets.iter().flat_map(|(a, b)| [(a.x, a.y), (b.x, b.y)]).chain(bridges.iter().map(|(p, _)| (p.x, p.y))),
    );
    let mut s = open(title);
    let _ = writeln!(s, r##"<g stroke="#d9d9d9" stroke-width="1">"##);
    for (a, b) in streets {
        let ((x1, y1), (x2, y2)) = (frame.map(a.x, a.y), frame.map(b.x, b.y));
        let _ = writeln!(s, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    let _ = writeln!(s, "</g>");
    for (p, score) in bridges {
        let (x, y) = frame.map(p.x, p.y);
        let _ = writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="{}" stroke="#000000" stroke-width="0.5"/>"##,
            score_color(*score)
        );
    }
    let stops: Vec<(String, String)> =
        (0..GRADIENT.len()).map(|i| (format!("{}", i * 25), GRADIENT[i].to_string())).collect();
    legend(&mut s, &stops);
    s.push_str("</svg>\n");
    s
}

/// Embedding scatter; `classes[i]` indexes `legend_labels`, or is negative
/// for noise.
pub fn umap_scatter(title: &str, points: &[[f64; 2]], classes: &[i64], legend_labels: &[String], by_cluster: bool) -> String {
    let frame = Frame::fit(points.iter().map(|p| (p[0], p[1])));
    let color = |c: i64| if by_cluster { cluster_color(c).to_string() } else if c < 0 { NOISE_COLOR.to_string() } else { PALETTE[c as usize % PALETTE.len()].to_string() };
    let mut s = open(title);
    for (p, &c) in points.iter().zip(classes) {
        let (x, y) = frame.map(p[0], p[1]);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}" fill-opacity="0.85"/>"#, color(c));
    }
    let mut entries: Vec<(String, String)> =
        legend_labels.iter().enumerate().map(|(i, l)| (l.clone(), color(i as i64))).collect();
    if classes.iter().any(|&c| c < 0) {
        entries.push(("noise".into(), NOISE_COLOR.into()));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

pub fn cluster_bars(title: &str, sizes: &[usize], noise: usize) -> String {
    let mut bars: Vec<(String, usize, &str)> =
        sizes.iter().enumerate().map(|(i, &n)| (i.to_string(), n, cluster_color(i as i64))).collect();
    if noise > 0 {
        bars.push(("noise".into(), noise, NOISE_COLOR));
    }
    let mut s = open(title);
    let max = bars.iter().map(|b| b.1).max().unwrap_or(1).max(1) as f64;
    let (x0, y0) = (PAD + 20.0, HEIGHT - PAD);
    let bw = (WIDTH - 2.0 * PAD - 40.0) / bars.len().max(1) as f64;
    let plot_h = HEIGHT - 2.0 * PAD - 40.0;
    let _ = writeln!(s, r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#000000"/>"##, WIDTH - PAD);
    for (i, (label, n, color)) in bars.iter().enumerate() {
        let h = *n as f64 / max * plot_h;
        let x = x0 + i as f64 * bw + bw * 0.1;
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{color}"/>"#, y0 - h, bw * 0.8);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{n}</text>"#, x + bw * 0.4, y0 - h - 4.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#, x + bw * 0.4, y0 + 14.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

/// Z-score radar; values are clamped to [-3, 3].
pub fn radar(title: &str, axes: &[String], series: &[(String, Vec<f64>, &str)]) -> String {
    let mut s = open(title);
    let (cx, cy, r) = (WIDTH / 2.0 - 60.0, HEIGHT / 2.0 + 10.0, 220.0);
    let k = axes.len().max(1);
    let at = |i: usize, v: f64| {
        let a = std::f64::consts::TAU * i as f64 / k as f64 - std::f64::consts::FRAC_PI_2;
        let rr = r * (v.clamp(-3.0, 3.0) + 3.0) / 6.0;
        (cx + rr * a.cos(), cy + rr * a.sin())
    };
    for ring in [-3.0, -1.5, 0.0, 1.5, 3.0] {
        let pts: Vec<String> = (0..k).map(|i| { let (x, y) = at(i, ring); format!("{x:.2},{y:.2}") }).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#cccccc"/>"##, pts.join(" "));
    }
    for (i, name) in axes.iter().enumerate() {
        let (x, y) = at(i, 3.0);
        let _ = writeln!(s, r##"<line x1="{cx:.2}" y1="{cy:.2}" x2="{x:.2}" y2="{y:.2}" stroke="#cccccc"/>"##);
        let (lx, ly) = at(i, 3.6);
        let _ = writeln!(s, r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" font-size="11">{}</text>"#, escape(name));
    }
    for (_, vals, color) in series {
        let pts: Vec<String> = vals.iter().enumerate().map(|(i, &v)| { let (x, y) = at(i, v); format!("{x:.2},{y:.2}") }).collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
    }
    let entries: Vec<(String, String)> = series.iter().map(|(l, _, c)| (l.clone(), c.to_string())).collect();
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}
