//! Static line plots drawn from a CSV table already on disk.

use std::fmt::Write as _;
use std::path::Path;

use super::csv::{self, Table};
use super::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1e-300) {
        return (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0));
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Every column after the first plotted against the first.
pub fn render(table: &Table, title: &str) -> String {
    let (x0, x1) = bounds(table.rows.iter().filter_map(|r| r.first().copied()));
    let (y0, y1) = bounds(table.rows.iter().flat_map(|r| r.iter().skip(1).copied()));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(table.header.first().map_or("", |s| s.as_str()))
    );
    for (label, v, y) in [("min", y0, HEIGHT - MARGIN), ("max", y1, MARGIN)] {
        let _ = writeln!(
            out,
            r#"<text x="5" y="{y}" font-family="sans-serif" font-size="10">{label} {v:.4e}</text>"#
        );
    }
    for (j, name) in table.header.iter().enumerate().skip(1) {
        let color = COLORS[(j - 1) % COLORS.len()];
        let points: Vec<String> = table
            .rows
            .iter()
            .filter(|r| r[0].is_finite() && r[j].is_finite())
            .map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(r[j])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}" font-family="sans-serif" font-size="12">{}</text>"#,
            WIDTH - MARGIN + 5.0,
            MARGIN + 15.0 * j as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Read `csv_path` back and write the plot next to it with an `.svg` extension.
pub fn write_from_csv(csv_path: &Path) -> Result<(), CliError> {
    let table = csv::read(csv_path)?;
    let title = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let svg_path = csv_path.with_extension("svg");
    std::fs::write(&svg_path, render(&table, title)).map_err(|source| CliError::Io {
        path: svg_path,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series() {
        let t = Table::from_columns(&["depth_m", "a", "b<c"], &[&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]]);
        let svg = render(&t, "demo");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_and_flat_tables() {
        let t = Table::from_columns(&["x", "y"], &[&[], &[]]);
        assert!(render(&t, "").contains("<polyline"));
        assert_eq!(bounds([2.0, 2.0].into_iter()), (1.0, 3.0));
        assert_eq!(bounds([f64::NAN].into_iter()), (0.0, 1.0));
    }
}
