//! Minimal deterministic SVG charts for report emission.
//!
//! Hand-rolled on purpose: fixed layout, fixed-precision coordinates, no
//! timestamps, so rerunning a pipeline reproduces every plot byte for
//! byte.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 18.0;
const MARGIN_TOP: f64 = 34.0;
const MARGIN_BOTTOM: f64 = 46.0;

const AXIS: &str = "#444444";
const GRID: &str = "#dddddd";
const MUTED: &str = "#555555";
const REF_LINE: &str = "#777777";

const PALETTE: [&str; 6] = [
    "#d62728", "#1f77b4", "#2c2c2c", "#2ca02c", "#9467bd", "#ff7f0e",
];

#[derive(Debug, Clone)]
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

#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference line (e.g. a significance threshold).
    pub hline: Option<(f64, String)>,
}

#[derive(Debug, Clone)]
pub struct BarGroup {
    pub label: String,
    pub values: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub groups: Vec<BarGroup>,
    pub hline: Option<(f64, String)>,
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn axis_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn line(out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, color: &str, width: f64, dashed: bool) {
    let dash = if dashed {
        " stroke-dasharray=\"6 3\""
    } else {
        ""
    };
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"{width}\"{dash}/>",
        fmt2(x1),
        fmt2(y1),
        fmt2(x2),
        fmt2(y2),
    );
}

fn text(out: &mut String, x: f64, y: f64, anchor: &str, size: u32, fill: &str, extra: &str, body: &str) {
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"{size}\" fill=\"{fill}\"{extra}>{}</text>",
        fmt2(x),
        fmt2(y),
        escape(body),
    );
}

fn svg_header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">",
    );
    text(out, WIDTH / 2.0, 20.0, "middle", 14, "black", "", title);
}

fn draw_axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_ticks: bool) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    line(out, x0, y0, x1, y0, AXIS, 1.0, false);
    line(out, x0, y0, x0, y1, AXIS, 1.0, false);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let vy = frame.y_lo + t * (frame.y_hi - frame.y_lo);
        let py = frame.y(vy);
        line(out, x0, py, x1, py, GRID, 0.5, false);
        text(out, x0 - 6.0, py + 3.0, "end", 10, "black", "", &fmt2(vy));
        if x_ticks {
            let vx = frame.x_lo + t * (frame.x_hi - frame.x_lo);
            let px = frame.x(vx);
            text(out, px, y0 + 16.0, "middle", 10, "black", "", &fmt2(vx));
        }
    }
    text(out, (x0 + x1) / 2.0, HEIGHT - 10.0, "middle", 11, "black", "", x_label);
    let rotate = format!(
        " transform=\"rotate(-90 16 {})\"",
        fmt2((y0 + y1) / 2.0)
    );
    text(out, 16.0, (y0 + y1) / 2.0, "middle", 11, "black", &rotate, y_label);
}

fn draw_legend(out: &mut String, labels: &[(String, &str)]) {
    let mut x = MARGIN_LEFT + 8.0;
    for (label, color) in labels {
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>",
            fmt2(x),
            fmt2(MARGIN_TOP + 2.0),
        );
        text(out, x + 13.0, MARGIN_TOP + 11.0, "start", 10, "black", "", label);
        x += 14.0 + 7.0 * label.len() as f64 + 14.0;
    }
}

fn escape(body: &str) -> String {
    body.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw_hline(out: &mut String, frame: &Frame, value: f64, label: &str) {
    let py = frame.y(value);
    line(
        out,
        MARGIN_LEFT,
        py,
        WIDTH - MARGIN_RIGHT,
        py,
        REF_LINE,
        1.0,
        true,
    );
    text(
        out,
        WIDTH - MARGIN_RIGHT - 4.0,
        py - 4.0,
        "end",
        9,
        MUTED,
        "",
        label,
    );
}

impl LineChart {
    pub fn render(&self) -> String {
        let mut out = String::new();
        svg_header(&mut out, &self.title);
        let (x_lo, x_hi) = axis_bounds(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0)),
        );
        let (mut y_lo, mut y_hi) = axis_bounds(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
        );
        if let Some((h, _)) = self.hline {
            let span = (y_hi - y_lo).max(1e-9);
            y_lo = y_lo.min(h - 0.05 * span);
            y_hi = y_hi.max(h + 0.05 * span);
        }
        let frame = Frame {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        };
        draw_axes(&mut out, &frame, &self.x_label, &self.y_label, true);
        if let Some((h, label)) = &self.hline {
            draw_hline(&mut out, &frame, *h, label);
        }

        let mut legend = Vec::new();
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            legend.push((series.label.clone(), color));
            let mut path = String::new();
            for (j, &(x, y)) in series.points.iter().enumerate() {
                let cmd = if j == 0 { 'M' } else { 'L' };
                let _ = write!(path, "{cmd}{} {} ", fmt2(frame.x(x)), fmt2(frame.y(y)));
            }
            let dash = if series.dashed {
                " stroke-dasharray=\"5 4\""
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
                path.trim_end(),
            );
        }
        draw_legend(&mut out, &legend);
        out.push_str("</svg>\n");
        out
    }
}

impl BarChart {
    pub fn render(&self) -> String {
        let mut out = String::new();
        svg_header(&mut out, &self.title);
        let values = self
            .groups
            .iter()
            .flat_map(|g| g.values.iter().map(|v| v.1))
            .chain(self.hline.iter().map(|h| h.0))
            .chain(std::iter::once(0.0));
        let (y_lo, y_hi) = axis_bounds(values);
        let frame = Frame {
            x_lo: 0.0,
            x_hi: 1.0,
            y_lo,
            y_hi,
        };
        let x0 = MARGIN_LEFT;
        let x1 = WIDTH - MARGIN_RIGHT;
        let y_base = frame.y(0.0f64.clamp(y_lo, y_hi));
        draw_axes(&mut out, &frame, "", &self.y_label, false);

        let n_groups = self.groups.len().max(1);
        let group_width = (x1 - x0) / n_groups as f64;
        let mut legend: Vec<(String, &str)> = Vec::new();
        for (gi, group) in self.groups.iter().enumerate() {
            let gx = x0 + gi as f64 * group_width;
            let n_bars = group.values.len().max(1);
            let bar_width = 0.8 * group_width / n_bars as f64;
            for (bi, (label, value)) in group.values.iter().enumerate() {
                let color = PALETTE[bi % PALETTE.len()];
                if legend.iter().all(|(l, _)| l != label) {
                    legend.push((label.clone(), color));
                }
                let bx = gx + 0.1 * group_width + bi as f64 * bar_width;
                let vy = frame.y(*value);
                let (top, height) = if vy <= y_base {
                    (vy, y_base - vy)
                } else {
                    (y_base, vy - y_base)
                };
                let _ = writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>",
                    fmt2(bx),
                    fmt2(top),
                    fmt2(bar_width * 0.92),
                    fmt2(height),
                );
            }
            text(
                &mut out,
                gx + group_width / 2.0,
                HEIGHT - MARGIN_BOTTOM + 16.0,
                "middle",
                10,
                "black",
                "",
                &group.label,
            );
        }

        if let Some((h, label)) = &self.hline {
            draw_hline(&mut out, &frame, *h, label);
        }
        draw_legend(&mut out, &legend);
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_is_deterministic() {
        let chart = LineChart {
            title: "demo".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                Series::new("a", vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.25)]),
                Series::new("b", vec![(0.0, 0.2), (2.0, 0.9)]).dashed(),
            ],
            hline: Some((0.8, "limit".into())),
        };
        assert_eq!(chart.render(), chart.render());
        assert!(chart.render().starts_with("<svg"));
        assert!(chart.render().contains("stroke-dasharray"));
    }

    #[test]
    fn bar_chart_handles_escaping_and_reference_line() {
        let chart = BarChart {
            title: "a < b".into(),
            y_label: "ratio".into(),
            groups: vec![BarGroup {
                label: "g".into(),
                values: vec![("x".into(), 2.0), ("y".into(), 0.5)],
            }],
            hline: Some((1.0, "null".into())),
        };
        let svg = chart.render();
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
