//! CSV tables and minimal SVG line plots.

use std::fmt::Write as _;

/// A CSV table. The first line is a comment carrying the config hash and
/// the units of the columns; the second is the column header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub units: String,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip form, so equal values always print identically.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl Table {
    pub fn new(header: &[&str], units: impl Into<String>) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            units: units.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# config_hash={config_hash} units: {}", self.units);
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Line plot with axes, ticks at the extremes, and a legend. With
/// `log_y`, non-positive values are dropped.
pub fn line_plot(title: &str, series: &[Series], log_y: bool) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.x.iter()
                .zip(s.y)
                .filter(|(_, &y)| y.is_finite() && (!log_y || y > 0.0))
                .map(|(&x, &y)| (x, ty(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let label_y = |y: f64| {
        if log_y {
            format!("1e{y:.0}")
        } else {
            format!("{y:.3}")
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#,
        w / 2.0
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{pad},{} {pad},{} {},{}" fill="none" stroke="black"/>"#,
        pad,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="{}" text-anchor="middle">{}</text>"#,
        h - pad + 18.0,
        fmt_tick(x0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        w - pad,
        h - pad + 18.0,
        fmt_tick(x1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        pad - 6.0,
        h - pad,
        label_y(y0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        pad - 6.0,
        pad + 4.0,
        label_y(y1)
    );
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = p
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        let ly = pad + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            w - pad - 90.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["k", "err"], "k: step; err: suboptimality");
        t.push_f64(&[0.0, 0.5]);
        t.push_f64(&[1.0, 1e-300]);
        assert_eq!(
            t.to_csv("abc"),
            "# config_hash=abc units: k: step; err: suboptimality\nk,err\n0.0,0.5\n1.0,1e-300\n"
        );
    }

    #[test]
    fn svg_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 0.1, 0.0];
        let svg = line_plot(
            "t",
            &[Series {
                label: "a",
                x: &x,
                y: &y,
            }],
            true,
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
