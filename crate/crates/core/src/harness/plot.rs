use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::read_columns;

/// What to draw from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub log_x: bool,
    pub log_y: bool,
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    pub fn new(x: &str, y: &str) -> Self {
        PlotSpec {
            x: x.to_string(),
            y: y.to_string(),
            log_x: false,
            log_y: false,
            title: format!("{y} against {x}"),
            width: 640,
            height: 420,
        }
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }
}

const MARGIN: f64 = 56.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn axis_label(name: &str, log: bool) -> String {
    if log {
        format!("ln |{name}|")
    } else {
        name.to_string()
    }
}

/// Scatter plot as an SVG 1.1 document.
pub fn render_svg(spec: &PlotSpec, xs: &[f64], ys: &[f64]) -> Result<String> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let x = if spec.log_x { x.abs().ln() } else { x };
            let y = if spec.log_y { y.abs().ln() } else { y };
            (x, y)
        })
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if pts.is_empty() {
        return Err(Error::Data("nothing to plot".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 == x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 == y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (w, h) = (spec.width as f64, spec.height as f64);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (w - 2.0 * MARGIN);
    let py = |y: f64| h - MARGIN - (y - y0) / (y1 - y0) * (h - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(s, r#"<g id="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}"/>"#,
        h - MARGIN,
        w - MARGIN,
        h - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}"/>"#,
        h - MARGIN
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (tx, ty) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}"/>"#,
            px(tx),
            h - MARGIN,
            h - MARGIN + 5.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}"/>"#,
            MARGIN - 5.0,
            py(ty),
            MARGIN
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<g id="ticks" font-family="sans-serif" font-size="10">"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (tx, ty) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{:.3}</text>"#,
            px(tx),
            h - MARGIN + 18.0,
            tx
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#,
            MARGIN - 8.0,
            py(ty) + 3.0,
            ty
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        w / 2.0,
        h - 12.0,
        escape(&axis_label(&spec.x, spec.log_x))
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {0})">{1}</text>"#,
        h / 2.0,
        escape(&axis_label(&spec.y, spec.log_y))
    );
    let _ = writeln!(s, r##"<g id="points" fill="#1f5fa8">"##);
    for &(x, y) in &pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
            px(x),
            py(y)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

pub fn plot_csv(path: &Path, spec: &PlotSpec) -> Result<String> {
    let (xs, ys) = read_columns(path, &spec.x, &spec.y)?;
    if xs.is_empty() {
        return Err(Error::Data(format!(
            "{} has no usable rows",
            path.display()
        )));
    }
    render_svg(spec, &xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let xs = [1e3, 1e4, 1e5];
        let ys = [3.0, -7.5, 20.0];
        let svg = render_svg(&PlotSpec::new("t", "delta").log_log(), &xs, &ys).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"version="1.1""#));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("ln |delta|"));
        assert_eq!(svg.matches("<g").count(), svg.matches("</g>").count());
        assert!(render_svg(&PlotSpec::new("t", "y"), &[], &[]).is_err());
    }
}
