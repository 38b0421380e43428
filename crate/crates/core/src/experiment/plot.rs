//! Self-contained SVG line charts of metrics columns against epoch.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    /// File-name suffix.
    pub name: String,
    pub title: String,
    pub y_label: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl ChartSpec {
    pub fn new(name: &str, title: &str, y_label: &str, columns: &[&str]) -> Self {
        ChartSpec {
            name: name.into(),
            title: title.into(),
            y_label: y_label.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
        }
    }

    /// Pulls `epoch` and the requested columns out of a metrics CSV. Empty
    /// cells are skipped.
    pub fn series_from_csv(&self, text: &str) -> Result<Vec<Series>> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let position = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let x_col = position("epoch")?;
        let cols = self.columns.iter().map(|c| position(c)).collect::<Result<Vec<_>>>()?;
        let mut series: Vec<Series> = self
            .columns
            .iter()
            .map(|c| Series {
                label: c.clone(),
                points: Vec::new(),
            })
            .collect();
        let mut rows = 0;
        for (n, record) in reader.records().enumerate() {
            let line = n + 2;
            let record = record.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            let number = |i: usize| {
                record[i].parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{}` is not a number", &record[i]),
                })
            };
            let x = number(x_col)?;
            for (s, &c) in series.iter_mut().zip(&cols) {
                if !record[c].is_empty() {
                    s.points.push((x, number(c)?));
                }
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::InvalidArgument("metrics file has no rows to plot".into()));
        }
        Ok(series)
    }

    pub fn render_csv(&self, text: &str) -> Result<String> {
        let series = self.series_from_csv(text)?;
        Ok(self.render(&series))
    }

    pub fn render(&self, series: &[Series]) -> String {
        let all = || series.iter().flat_map(|s| s.points.iter());
        let (x_lo, x_hi) = padded_range(all().map(|p| p.0));
        let (y_lo, y_hi) = padded_range(all().map(|p| p.1));
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );
        let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
        let _ = writeln!(
            svg,
            r#"<path d="M{x0} {MARGIN_TOP} L{x0} {y0} L{} {y0}" fill="none" stroke="black"/>"#,
            x0 + plot_w
        );
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let (xv, yv) = (x_lo + t * (x_hi - x_lo), y_lo + t * (y_hi - y_lo));
            let (px, py) = (sx(xv), sy(yv));
            let _ = writeln!(svg, r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(
                svg,
                r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 18.0,
                tick_label(xv)
            );
            let _ = writeln!(svg, r##"<line x1="{x0}" y1="{py}" x2="{}" y2="{py}" stroke="#dddddd"/>"##, x0 + plot_w);
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                py + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">epoch</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let points: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline data-series="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                escape(&s.label),
                points.join(" ")
            );
            let ly = MARGIN_TOP + 10.0 + 18.0 * i as f64;
            let lx = WIDTH - MARGIN_RIGHT + 15.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
