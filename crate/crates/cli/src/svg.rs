//! Minimal self-contained SVG charts: lines, shaded bands, scatter points
//! and point-interval plots arranged in a grid of panels.

use std::fmt::Write as _;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
pub enum Layer {
    Line {
        x: Vec<f64>,
        y: Vec<f64>,
        color: String,
        dashed: bool,
        label: Option<String>,
    },
    Band {
        x: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        color: String,
        opacity: f64,
        label: Option<String>,
    },
    Points {
        x: Vec<f64>,
        y: Vec<f64>,
        color: String,
        label: Option<String>,
    },
    /// Vertical segments `lower..upper` with a marker at `center`.
    Intervals {
        x: Vec<f64>,
        center: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        color: String,
        label: Option<String>,
    },
    HLine {
        y: f64,
        color: String,
    },
}

impl Layer {
    pub fn line(x: &[f64], y: &[f64], color: &str) -> Self {
        Layer::Line {
            x: x.to_vec(),
            y: y.to_vec(),
            color: color.into(),
            dashed: false,
            label: None,
        }
    }

    pub fn dashed(x: &[f64], y: &[f64], color: &str) -> Self {
        Layer::Line {
            x: x.to_vec(),
            y: y.to_vec(),
            color: color.into(),
            dashed: true,
            label: None,
        }
    }

    pub fn band(x: &[f64], lower: &[f64], upper: &[f64], color: &str, opacity: f64) -> Self {
        Layer::Band {
            x: x.to_vec(),
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            color: color.into(),
            opacity,
            label: None,
        }
    }

    pub fn points(x: &[f64], y: &[f64], color: &str) -> Self {
        Layer::Points {
            x: x.to_vec(),
            y: y.to_vec(),
            color: color.into(),
            label: None,
        }
    }

    pub fn labeled(mut self, text: impl Into<String>) -> Self {
        match &mut self {
            Layer::Line { label, .. }
            | Layer::Band { label, .. }
            | Layer::Points { label, .. }
            | Layer::Intervals { label, .. } => *label = Some(text.into()),
            Layer::HLine { .. } => {}
        }
        self
    }

    fn label(&self) -> Option<(&str, &str, f64)> {
        match self {
            Layer::Band {
                label,
                color,
                opacity,
                ..
            } => label.as_deref().map(|l| (l, color.as_str(), *opacity)),
            Layer::Line { label, color, .. }
            | Layer::Points { label, color, .. }
            | Layer::Intervals { label, color, .. } => {
                label.as_deref().map(|l| (l, color.as_str(), 1.0))
            }
            Layer::HLine { .. } => None,
        }
    }

    fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Layer::Line { x, y, .. } | Layer::Points { x, y, .. } => (x.clone(), y.clone()),
            Layer::Band {
                x, lower, upper, ..
            } => (x.clone(), lower.iter().chain(upper).copied().collect()),
            Layer::Intervals {
                x, lower, upper, ..
            } => (x.clone(), lower.iter().chain(upper).copied().collect()),
            Layer::HLine { y, .. } => (vec![], vec![*y]),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub layers: Vec<Layer>,
    /// Categorical tick labels replacing the numeric x axis.
    pub x_ticks: Option<Vec<(f64, String)>>,
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
            ..Self::default()
        }
    }

    pub fn with(mut self, layer: Layer) -> Self {
        self.layers.push(layer);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub panels: Vec<Panel>,
    pub columns: usize,
    pub panel_width: f64,
    pub panel_height: f64,
    /// Written into a `<metadata>` element when set.
    pub timestamp: Option<String>,
}

impl Figure {
    pub fn new(title: impl Into<String>, panels: Vec<Panel>, columns: usize) -> Self {
        Self {
            title: title.into(),
            panels,
            columns: columns.max(1),
            panel_width: 420.0,
            panel_height: 300.0,
            timestamp: None,
        }
    }

    pub fn render(&self) -> String {
        let cols = self.columns.min(self.panels.len().max(1));
        let nrows = self.panels.len().div_ceil(cols).max(1);
        let top = 36.0;
        let width = cols as f64 * self.panel_width;
        let height = top + nrows as f64 * self.panel_height;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="Helvetica, Arial, sans-serif" font-size="11">"#,
            w = num(width),
            h = num(height)
        );
        if let Some(ts) = &self.timestamp {
            let _ = writeln!(s, "<metadata>generated {}</metadata>", escape(ts));
        }
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15" font-weight="bold">{}</text>"#,
            num(width / 2.0),
            escape(&self.title)
        );
        for (i, p) in self.panels.iter().enumerate() {
            let ox = (i % cols) as f64 * self.panel_width;
            let oy = top + (i / cols) as f64 * self.panel_height;
            render_panel(&mut s, p, ox, oy, self.panel_width, self.panel_height);
        }
        s.push_str("</svg>\n");
        s
    }
}

fn num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10()).ceil() as usize
    };
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0".to_string()
    } else {
        s
    }
}

/// Round tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi - lo > 1e-12 * (lo.abs() + hi.abs()).max(1e-300) {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    };
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let n = ((end - start) / step).round() as usize;
    let ticks = (0..=n).map(|i| start + i as f64 * step).collect();
    (start, end, ticks)
}

fn finite(v: &[f64]) -> impl Iterator<Item = f64> + '_ {
    v.iter().copied().filter(|x| x.is_finite())
}

fn render_panel(s: &mut String, p: &Panel, ox: f64, oy: f64, w: f64, h: f64) {
    let (ml, mr, mt, mb) = (58.0, 14.0, 24.0, 40.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let (x0, y0) = (ox + ml, oy + mt);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for l in &p.layers {
        let (x, y) = l.extent();
        xs.extend(finite(&x));
        ys.extend(finite(&y));
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (xlo, xhi) = if xs.is_empty() {
        (0.0, 1.0)
    } else {
        (min(&xs), max(&xs))
    };
    let (ylo, yhi) = if ys.is_empty() {
        (0.0, 1.0)
    } else {
        (min(&ys), max(&ys))
    };
    let (xlo, xhi, xticks) = match &p.x_ticks {
        Some(t) => (xlo - 0.5, xhi + 0.5, t.iter().map(|(v, _)| *v).collect()),
        None if xhi > xlo => (
            xlo,
            xhi,
            nice_ticks(xlo, xhi, 6)
                .2
                .into_iter()
                .filter(|t| *t >= xlo && *t <= xhi)
                .collect(),
        ),
        None => nice_ticks(xlo, xhi, 6),
    };
    let (ylo, yhi, yticks) = nice_ticks(ylo, yhi, 5);
    let sx = |v: f64| x0 + (v - xlo) / (xhi - xlo) * pw;
    let sy = |v: f64| y0 + ph - (v - ylo) / (yhi - ylo) * ph;

    let _ = writeln!(s, "<g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12" font-weight="bold">{}</text>"#,
        num(x0 + pw / 2.0),
        num(oy + 16.0),
        escape(&p.title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        num(x0),
        num(y0),
        num(pw),
        num(ph)
    );
    let ystep = if yticks.len() > 1 {
        yticks[1] - yticks[0]
    } else {
        1.0
    };
    for t in &yticks {
        let y = sy(*t);
        let _ = writeln!(
            s,
            r##"<line x1="{a}" y1="{y}" x2="{b}" y2="{y}" stroke="#e5e5e5"/><text x="{c}" y="{d}" text-anchor="end">{l}</text>"##,
            a = num(x0),
            b = num(x0 + pw),
            y = num(y),
            c = num(x0 - 4.0),
            d = num(y + 4.0),
            l = tick_label(*t, ystep)
        );
    }
    let xstep = if xticks.len() > 1 {
        xticks[1] - xticks[0]
    } else {
        1.0
    };
    for (i, t) in xticks.iter().enumerate() {
        let x = sx(*t);
        let label = match &p.x_ticks {
            Some(lbl) => lbl[i].1.clone(),
            None => tick_label(*t, xstep),
        };
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{a}" x2="{x}" y2="{b}" stroke="#444"/><text x="{x}" y="{c}" text-anchor="middle">{l}</text>"##,
            x = num(x),
            a = num(y0 + ph),
            b = num(y0 + ph + 4.0),
            c = num(y0 + ph + 16.0),
            l = escape(&label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(x0 + pw / 2.0),
        num(y0 + ph + 32.0),
        escape(&p.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate({},{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        num(ox + 14.0),
        num(y0 + ph / 2.0),
        escape(&p.y_label)
    );

    for l in &p.layers {
        match l {
            Layer::Band {
                x,
                lower,
                upper,
                color,
                opacity,
                ..
            } => {
                let mut pts: Vec<String> = x
                    .iter()
                    .zip(upper)
                    .map(|(a, b)| format!("{},{}", num(sx(*a)), num(sy(*b))))
                    .collect();
                pts.extend(
                    x.iter()
                        .zip(lower)
                        .rev()
                        .map(|(a, b)| format!("{},{}", num(sx(*a)), num(sy(*b)))),
                );
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="{}" stroke="none"/>"#,
                    pts.join(" "),
                    num(*opacity)
                );
            }
            Layer::Line {
                x,
                y,
                color,
                dashed,
                ..
            } => {
                let pts: Vec<String> = x
                    .iter()
                    .zip(y)
                    .filter(|(_, b)| b.is_finite())
                    .map(|(a, b)| format!("{},{}", num(sx(*a)), num(sy(*b))))
                    .collect();
                let dash = if *dashed {
                    r#" stroke-dasharray="5,4""#
                } else {
                    ""
                };
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                    pts.join(" ")
                );
            }
            Layer::Points { x, y, color, .. } => {
                for (a, b) in x.iter().zip(y) {
                    if a.is_finite() && b.is_finite() {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{}" cy="{}" r="2.6" fill="{color}" fill-opacity="0.75"/>"#,
                            num(sx(*a)),
                            num(sy(*b))
                        );
                    }
                }
            }
            Layer::Intervals {
                x,
                center,
                lower,
                upper,
                color,
                ..
            } => {
                for i in 0..x.len() {
                    let cx = num(sx(x[i]));
                    let _ = writeln!(
                        s,
                        r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="{color}" stroke-width="1.6"/><circle cx="{cx}" cy="{}" r="3.2" fill="{color}"/>"#,
                        num(sy(lower[i])),
                        num(sy(upper[i])),
                        num(sy(center[i]))
                    );
                }
            }
            Layer::HLine { y, color } => {
                let _ = writeln!(
                    s,
                    r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-dasharray="3,3"/>"#,
                    num(x0),
                    num(x0 + pw),
                    y = num(sy(*y))
                );
            }
        }
    }

    let mut ly = y0 + 12.0;
    for (text, color, opacity) in p.layers.iter().filter_map(Layer::label) {
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}" fill-opacity="{}"/><text x="{}" y="{}">{}</text>"#,
            num(x0 + 8.0),
            num(ly - 9.0),
            num(opacity.clamp(0.0, 1.0)),
            num(x0 + 22.0),
            num(ly),
            escape(text)
        );
        ly += 14.0;
    }
    let _ = writeln!(s, "</g>");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        let (lo, hi, t) = nice_ticks(0.13, 0.92, 5);
        assert!(lo <= 0.13 && hi >= 0.92);
        assert_eq!(t.first().copied(), Some(lo));
        assert!(t.len() >= 4 && t.len() <= 8, "{t:?}");
    }

    #[test]
    fn constant_series_still_gets_a_range() {
        let (lo, hi, _) = nice_ticks(2.0, 2.0, 5);
        assert!(lo < 2.0 && hi > 2.0);
    }

    #[test]
    fn render_is_deterministic_and_well_formed() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let p = Panel::new("t<1>", "x", "y")
            .with(Layer::band(&x, &x, &y, PALETTE[0], 0.2).labeled("band"))
            .with(Layer::line(&x, &y, PALETTE[1]))
            .with(Layer::HLine {
                y: 3.0,
                color: "#000".into(),
            });
        let f = Figure::new("fig", vec![p.clone(), p], 2);
        let a = f.render();
        assert_eq!(a, f.render());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("t&lt;1&gt;"));
        assert!(!a.contains("<metadata>"));
        let stamped = Figure {
            timestamp: Some("2024-01-01T00:00:00Z".into()),
            ..f
        };
        assert!(stamped
            .render()
            .contains("<metadata>generated 2024-01-01T00:00:00Z</metadata>"));
    }
}
