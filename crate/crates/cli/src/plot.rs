//! Minimal SVG scatter plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::report::{write_text, Report, Series};
use crate::CliError;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(series: &Series) -> String {
    let all = series.points.iter().chain(&series.fit);
    let (x0, x1) = bounds(all.clone().map(|p| p[0]));
    let (y0, y1) = bounds(all.map(|p| p[1]));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#, H - PAD, W - PAD);
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="{anchor}">{v:.4}</text>"#,
            sx(v),
            H - PAD + 14.0
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{v:.4}</text>"#,
            PAD - 4.0,
            sy(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 10.0,
        escape(&series.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&series.y_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(&series.name)
    );
    if series.fit.len() >= 2 {
        let pts: Vec<String> = series.fit.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
        let _ =
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="crimson" stroke-width="1.5"/>"#, pts.join(" "));
    }
    for p in &series.points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, sx(p[0]), sy(p[1]));
    }
    s.push_str("</svg>\n");
    s
}

/// One SVG per non-empty series, named `<id>-<series>.svg`. Empty series are
/// skipped with a warning.
pub fn emit_plots(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for series in &report.series {
        if series.points.is_empty() {
            log::warn!("series {} has no points; no plot written", series.name);
            continue;
        }
        let path = dir.join(format!("{}-{}.svg", report.id, series.name));
        write_text(&path, &render_svg(series))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, n: usize) -> Series {
        Series {
            name: name.into(),
            x_label: "√log n".into(),
            y_label: "q_n".into(),
            points: (0..n).map(|i| [i as f64, (i * i) as f64]).collect(),
            fit: vec![[0.0, 0.0], [3.0, 9.0]],
        }
    }

    #[test]
    fn svg_has_one_marker_per_point_and_a_fit_line() {
        let svg = render_svg(&series("growth", 4));
        assert_eq!(svg.matches("<circle").count(), 4);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_series_are_skipped_and_names_are_stable() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            id: "x".into(),
            kind: "sweep".into(),
            inputs_digest: String::new(),
            tables: vec![],
            checks: vec![],
            series: vec![series("a", 3), series("empty", 0), series("b", 2)],
            wall_clock_s: 0.0,
        };
        let files = emit_plots(&report, dir.path()).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["x-a.svg", "x-b.svg"]);
    }
}
