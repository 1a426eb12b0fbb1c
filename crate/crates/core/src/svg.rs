//! Minimal self-contained SVG scatter/line charts (no external assets).

/// One labelled series of (x, y) points, drawn as circles joined by a line.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Any CSS color.
    pub color: String,
}

/// Chart configuration.
#[derive(Debug, Clone)]
pub struct ChartConfig {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Suppress the generation-time comment so output bytes are a pure
    /// function of the data.
    pub omit_timestamp: bool,
    /// RFC3339-ish stamp written when `omit_timestamp` is false.
    pub timestamp: Option<String>,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig {
            title: String::new(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_x: false,
            log_y: false,
            omit_timestamp: true,
            timestamp: None,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

/// Renders the chart. Points with non-finite (or non-positive, on log axes)
/// coordinates are skipped.
pub fn render_chart(series: &[Series], cfg: &ChartConfig) -> String {
    let tx = |v: f64| if cfg.log_x { v.log10() } else { v };
    let ty = |v: f64| if cfg.log_y { v.log10() } else { v };
    let usable = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if usable(x, cfg.log_x) && usable(y, cfg.log_y) {
                xs.push(tx(x));
                ys.push(ty(y));
            }
        }
    }
    let (x0, x1) = padded_range(&xs);
    let (y0, y1) = padded_range(&ys);
    let px = |x: f64| MARGIN_L + (tx(x) - x0) / (x1 - x0) * (W - MARGIN_L - MARGIN_R);
    let py = |y: f64| H - MARGIN_B - (ty(y) - y0) / (y1 - y0) * (H - MARGIN_T - MARGIN_B);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    if !cfg.omit_timestamp {
        out.push_str(&format!(
            "<!-- generated {} -->\n",
            cfg.timestamp.as_deref().unwrap_or("at an unspecified time")
        ));
    }
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN_B,
        W - MARGIN_R,
        H - MARGIN_B
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN_B
    ));

    // Tick labels at the extremes.
    let fmt_tick = |v: f64, log: bool| {
        let raw = if log { 10f64.powf(v) } else { v };
        format!("{raw:.4}")
    };
    out.push_str(&format!(
        "<text x=\"{MARGIN_L}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        H - MARGIN_B + 16.0,
        fmt_tick(x0, cfg.log_x)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        W - MARGIN_R,
        H - MARGIN_B + 16.0,
        fmt_tick(x1, cfg.log_x)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        MARGIN_L - 6.0,
        H - MARGIN_B,
        fmt_tick(y0, cfg.log_y)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        MARGIN_L - 6.0,
        MARGIN_T + 4.0,
        fmt_tick(y1, cfg.log_y)
    ));

    // Axis labels and title.
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + W - MARGIN_R) / 2.0,
        H - 12.0,
        escape(&cfg.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (MARGIN_T + H - MARGIN_B) / 2.0,
        (MARGIN_T + H - MARGIN_B) / 2.0,
        escape(&cfg.y_label)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(&cfg.title)
    ));

    for (si, s) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|&&(x, y)| usable(x, cfg.log_x) && usable(y, cfg.log_y))
            .map(|&(x, y)| (px(x), py(y)))
            .collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{x:.2},{y:.2}")).collect();
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                s.color,
                path.join(" ")
            ));
        }
        for &(x, y) in &pts {
            out.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3.5\" fill=\"{}\"/>\n",
                s.color
            ));
        }
        // Legend entry.
        let ly = MARGIN_T + 16.0 * si as f64;
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n",
            W - MARGIN_R - 130.0,
            ly,
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            W - MARGIN_R - 120.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
