//! Tables, CSV text and self-contained SVG plots.

use std::fmt::Write as _;

/// Column-major numeric table; the first column is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(x_header: &str, x: Vec<f64>) -> Self {
        Table {
            headers: vec![x_header.to_string()],
            columns: vec![x],
        }
    }

    pub fn push(&mut self, header: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns[0].len(), "column length mismatch");
        self.headers.push(header.into());
        self.columns.push(values);
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    /// Header row then one line per row, 17 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for i in 0..self.rows() {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:.16e}", col[i]);
            }
            out.push('\n');
        }
        out
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
];

/// Roughly five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plots every non-abscissa column against the first one. `labels` replace
/// the CSV headers in the legend.
pub fn table_to_svg(table: &Table, title: &str, labels: &[String]) -> String {
    let x = &table.columns[0];
    let (xmin, xmax) = (x[0], x[x.len() - 1]);
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for col in &table.columns[1..] {
        for &v in col {
            if v.is_finite() {
                ymin = ymin.min(v);
                ymax = ymax.max(v);
            }
        }
    }
    if !(ymin < ymax) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    let (ymin, ymax) = (ymin - pad, ymax + pad);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - xmin) / (xmax - xmin) * pw;
    let sy = |v: f64| TOP + (ymax - v) / (ymax - ymin) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"##,
        WIDTH / 2.0,
        escape(title)
    );
    // axes frame and ticks
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444" stroke-width="1"/>"##
    );
    for t in ticks(xmin, xmax) {
        let px = sx(t);
        let _ = writeln!(
            s,
            "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>",
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph + 19.0,
            tick_label(t)
        );
    }
    for t in ticks(ymin, ymax) {
        let py = sy(t);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{LEFT:.2}\" y2=\"{py:.2}\" stroke=\"#444\"/>",
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#ddd\"/>",
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 8.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(&table.headers[0])
    );
    // curves
    for (j, col) in table.columns[1..].iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let width = if j == 0 { 2.0 } else { 1.5 };
        let mut pts = String::new();
        for (xi, yi) in x.iter().zip(col) {
            if yi.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(*xi), sy(*yi));
            }
        }
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"##,
            pts.trim_end()
        );
    }
    // legend
    let lx = LEFT + pw - 150.0;
    let ly = TOP + 12.0;
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="140" height="{:.2}" fill="white" fill-opacity="0.85" stroke="#888"/>"##,
        lx - 8.0,
        ly - 10.0,
        18.0 * (table.columns.len() - 1) as f64 + 6.0
    );
    for j in 0..table.columns.len() - 1 {
        let color = COLORS[j % COLORS.len()];
        let label = labels.get(j).cloned().unwrap_or_else(|| table.headers[j + 1].clone());
        let y = ly + 18.0 * j as f64;
        let _ = writeln!(
            s,
            r##"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"##,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}">{}</text>"##,
            lx + 30.0,
            y + 4.0,
            escape(&label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("z", vec![0.0, 0.5, 1.0]);
        t.push("f", vec![1.0, 2.0, 0.1]);
        t.push("w=5", vec![1.0, 1.5, 0.25]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "z,f,w=5");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0");
        assert_eq!(lines.len(), 4);
        assert!(!csv.contains('\r'));
        // 17 significant digits round-trip
        let v: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.1);
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let labels = vec!["f".to_string(), "S_w, w=5".to_string()];
        let svg = table_to_svg(&sample(), "test", &labels);
        assert!(svg.contains(r##"version="1.1""##));
        assert!(svg.contains(r##"viewBox="0 0 800 600""##));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">f</text>") && svg.contains(">S_w, w=5</text>"));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(-4.0, 4.0), vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert_eq!(ticks(0.0, 8.0), vec![0.0, 2.0, 4.0, 6.0, 8.0]);
    }
}
