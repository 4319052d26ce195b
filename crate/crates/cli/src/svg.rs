//! Minimal static SVG line charts.

use std::fmt::Write;

use sentivol_core::artifact::Metadata;

const PANEL_W: f64 = 380.0;
const PANEL_H: f64 = 250.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 40.0;
const TITLE_H: f64 = 30.0;
const FOOTER_H: f64 = 22.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical marker lines at these x values.
    pub markers: Vec<f64>,
}

impl Panel {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }
}

fn bounds(panel: &Panel) -> ((f64, f64), (f64, f64)) {
    let pts = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    let widen = |lo: f64, hi: f64| {
        if hi - lo > 0.0 {
            (lo, hi)
        } else {
            let d = lo.abs().max(1.0) * 0.05;
            (lo - d, hi + d)
        }
    };
    let (y0, y1) = widen(y0, y1);
    let pad = 0.05 * (y1 - y0);
    (widen(x0, x1), (y0 - pad, y1 + pad))
}

fn draw_panel(out: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let ((x0, x1), (y0, y1)) = bounds(panel);
    let pw = PANEL_W - MARGIN_L - MARGIN_R;
    let ph = PANEL_H - MARGIN_T - MARGIN_B;
    let left = ox + MARGIN_L;
    let top = oy + MARGIN_T;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        oy + 18.0,
        esc(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{left:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#bbb" stroke-dasharray="3,3"/>"##,
            sy(0.0),
            left + pw
        );
    }
    for m in &panel.markers {
        if *m >= x0 && *m <= x1 {
            let _ = writeln!(
                out,
                r##"<line x1="{0:.2}" y1="{top:.2}" x2="{0:.2}" y2="{1:.2}" stroke="#888" stroke-dasharray="5,3"/>"##,
                sx(*m),
                top + ph
            );
        }
    }
    for (v, anchor, x, y) in [
        (x0, "start", left, top + ph + 14.0),
        (x1, "end", left + pw, top + ph + 14.0),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="10" text-anchor="{anchor}">{}</text>"#,
            tick(v)
        );
    }
    for (v, y) in [(y0, top + ph), (y1, top + 9.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" font-size="10" text-anchor="end">{}</text>"#,
            left - 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        top + ph + 30.0,
        esc(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{0:.2}" y="{1:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {0:.2} {1:.2})">{2}</text>"#,
        ox + 14.0,
        top + ph / 2.0,
        esc(&panel.y_label)
    );
    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (x, y) in s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
        {
            let _ = write!(d, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="6,3""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.3"{dash}/>"#,
            d.trim_end()
        );
        if panel.series.len() > 1 {
            let ly = top + 12.0 + 13.0 * i as f64;
            let lx = left + pw - 110.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
                ly - 3.5,
                lx + 16.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{ly:.2}" font-size="10">{}</text>"#,
                lx + 20.0,
                esc(&s.label)
            );
        }
    }
}

/// Panels laid out row-major in `cols` columns, metadata as a leading comment.
pub fn figure(title: &str, panels: &[Panel], cols: usize, meta: &Metadata) -> String {
    render(title, panels, cols, meta, None)
}

/// Like [`figure`] with a one-line footer under the panels.
pub fn figure_with_note(
    title: &str,
    panels: &[Panel],
    cols: usize,
    meta: &Metadata,
    note: &str,
) -> String {
    render(title, panels, cols, meta, Some(note))
}

fn render(
    title: &str,
    panels: &[Panel],
    cols: usize,
    meta: &Metadata,
    note: Option<&str>,
) -> String {
    let cols = cols.clamp(1, panels.len().max(1));
    let rows = panels.len().div_ceil(cols).max(1);
    let w = PANEL_W * cols as f64;
    let body_h = TITLE_H + PANEL_H * rows as f64;
    let h = body_h + if note.is_some() { FOOTER_H } else { 0.0 };
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n");
    for (k, v) in meta.entries() {
        let _ = writeln!(out, "{k}: {}", v.replace("--", "- -"));
    }
    out.push_str("-->\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" font-size="15" font-weight="bold" text-anchor="middle">{}</text>"#,
        w / 2.0,
        esc(title)
    );
    for (i, p) in panels.iter().enumerate() {
        let ox = PANEL_W * (i % cols) as f64;
        let oy = TITLE_H + PANEL_H * (i / cols) as f64;
        draw_panel(&mut out, p, ox, oy);
    }
    if let Some(n) = note {
        let _ = writeln!(
            out,
            r##"<text x="8" y="{:.2}" font-size="11" fill="#555">{}</text>"##,
            body_h + 15.0,
            esc(n)
        );
    }
    out.push_str("</svg>\n");
    out
}
