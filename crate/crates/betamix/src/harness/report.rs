//! Experiment reports: CSV with a trailing slope comment row, a
//! self-contained SVG log-log scatter, and a verdict summary. Emission is
//! deterministic byte for byte given a deterministic report.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numkit::LineFit;

/// Outcome of comparing the fitted slope against theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Fewer than two rows: nothing to fit.
    InsufficientData,
    /// Wall-clock budget cut the sweep short.
    Incomplete,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::InsufficientData => "insufficient data",
            Verdict::Incomplete => "incomplete",
        }
    }
}

/// Rate-experiment results: rows over the sweep variable, fitted and theory
/// slopes, and the verdict at the configured tolerance.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Experiment label, e.g. `approx-continuous`.
    pub kind: String,
    /// Column names; the first column is the sweep variable.
    pub columns: Vec<String>,
    /// Rows sorted by the sweep variable.
    pub rows: Vec<Vec<f64>>,
    /// Least-squares log-log fit of the second column against the first.
    pub fitted: Option<LineFit<f64>>,
    /// Theory slope the fit is compared against.
    pub theory_slope: f64,
    /// Slope tolerance of the verdict.
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Free-form annotations (e.g. faster-than-theory convergence).
    pub annotations: Vec<String>,
}

/// Pure verdict rule: pass when the fitted slope is within tolerance of
/// theory or faster (more negative); annotate rather than fail on
/// faster-than-theory convergence. Worst-case bounds stay valid when the
/// observed rate beats them.
pub fn verdict_from(fitted: Option<f64>, theory: f64, tolerance: f64, complete: bool) -> (Verdict, Vec<String>) {
    if !complete {
        return (Verdict::Incomplete, vec!["sweep cut short by the wall-clock budget".into()]);
    }
    match fitted {
        None => (Verdict::InsufficientData, Vec::new()),
        Some(s) => {
            if s <= theory + tolerance {
                let mut notes = Vec::new();
                if s < theory - tolerance {
                    notes.push(format!(
                        "fitted slope {s:.4} is faster than theory {theory:.4}; worst-case bound still holds"
                    ));
                }
                (Verdict::Pass, notes)
            } else {
                (Verdict::Fail, Vec::new())
            }
        }
    }
}

impl ExperimentReport {
    pub fn fitted_slope(&self) -> Option<f64> {
        self.fitted.as_ref().map(|f| f.slope)
    }

    /// CSV: column header, numeric rows, then a `# slopes ...` comment row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        match &self.fitted {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "# slopes,fitted={:.12e},stderr={:.12e},theory={:.12e}",
                    f.slope, f.slope_stderr, self.theory_slope
                );
            }
            None => {
                let _ = writeln!(out, "# slopes,fitted=nan,stderr=nan,theory={:.12e}", self.theory_slope);
            }
        }
        out
    }

    /// Parse the [`Self::to_csv`] schema back into (columns, rows, fitted slope).
    pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>, Option<f64>)> {
        let bad = |d: String| Error::Parse { what: "report csv".into(), detail: d };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        let mut fitted = None;
        for line in lines {
            if let Some(rest) = line.strip_prefix("# slopes,") {
                for field in rest.split(',') {
                    if let Some(v) = field.strip_prefix("fitted=") {
                        fitted = v.parse::<f64>().ok().filter(|v| v.is_finite());
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| bad(format!("row {line:?}: {e}")))?);
        }
        Ok((columns, rows, fitted))
    }

    /// Verdict summary text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.kind);
        let _ = writeln!(out, "rows: {}", self.rows.len());
        match &self.fitted {
            Some(f) => {
                let _ = writeln!(out, "fitted slope: {:.6} (stderr {:.6})", f.slope, f.slope_stderr);
            }
            None => {
                let _ = writeln!(out, "fitted slope: n/a");
            }
        }
        let _ = writeln!(out, "theory slope: {:.6}", self.theory_slope);
        let _ = writeln!(out, "tolerance: {:.6}", self.tolerance);
        let _ = writeln!(out, "verdict: {}", self.verdict.label());
        for a in &self.annotations {
            let _ = writeln!(out, "note: {a}");
        }
        out
    }

    /// Self-contained SVG log-log scatter of column 1 vs column 0 with the
    /// fitted and theory lines. None when there are fewer than two rows.
    pub fn to_svg(&self) -> Option<String> {
        if self.rows.len() < 2 || self.columns.len() < 2 {
            return None;
        }
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.len() >= 2 && r[0] > 0.0 && r[1] > 0.0)
            .map(|r| (r[0].log10(), r[1].log10()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let (w, h, margin) = (640.0, 480.0, 60.0);
        let (xmin, xmax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (ymin, ymax) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let (xspan, yspan) = ((xmax - xmin).max(1e-9), (ymax - ymin).max(1e-9));
        let sx = |x: f64| margin + (x - xmin) / xspan * (w - 2.0 * margin);
        let sy = |y: f64| h - margin - (y - ymin) / yspan * (h - 2.0 * margin);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<line x1=\"{m}\" y1=\"{y}\" x2=\"{x}\" y2=\"{y}\" stroke=\"black\"/>",
            m = margin,
            x = w - margin,
            y = h - margin
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{y}\" stroke=\"black\"/>",
            m = margin,
            y = h - margin
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"13\">log10 {}</text>",
            w / 2.0 - 40.0,
            h - 18.0,
            xml_escape(&self.columns[0])
        );
        let _ = writeln!(
            svg,
            "<text x=\"14\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 14 {})\">log10 {}</text>",
            h / 2.0,
            h / 2.0,
            xml_escape(&self.columns[1])
        );
        // fitted and theory lines anchored at the first point
        if let Some(f) = &self.fitted {
            let ln10 = std::f64::consts::LN_10;
            let y_at = |slope: f64, x: f64| {
                let (x0, y0) = pts[0];
                y0 + slope * (x - x0) * ln10 / ln10
            };
            for (slope, color) in [(f.slope, "#d62728"), (self.theory_slope, "#1f77b4")] {
                let _ = writeln!(
                    svg,
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-dasharray=\"{}\"/>",
                    sx(xmin),
                    sy(y_at(slope, xmin)),
                    sx(xmax),
                    sy(y_at(slope, xmax)),
                    if color == "#1f77b4" { "6 3" } else { "none" },
                );
            }
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"30\" font-size=\"12\" fill=\"#d62728\">fitted {:.3}</text>",
                margin, f.slope
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"46\" font-size=\"12\" fill=\"#1f77b4\">theory {:.3}</text>",
                margin, self.theory_slope
            );
        }
        for &(x, y) in &pts {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"black\"/>",
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(svg, "</svg>");
        Some(svg)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `report.csv`, `report.txt` and (when plottable) `report.svg` into
/// the directory. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), detail: e.to_string() })?;
    let mut written = Vec::new();
    let write = |name: &str, contents: &str| -> Result<std::path::PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Error::Io { path: path.display().to_string(), detail: e.to_string() })?;
        Ok(path)
    };
    written.push(write("report.csv", &report.to_csv())?);
    written.push(write("report.txt", &report.to_text())?);
    if let Some(svg) = report.to_svg() {
        written.push(write("report.svg", &svg)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let rows = vec![
            vec![100.0, 1e-2, 1e-4],
            vec![200.0, 5e-3, 2.6e-5],
            vec![400.0, 2.5e-3, 6e-6],
        ];
        let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let fitted = crate::numkit::fit_loglog(&xs, &ys).unwrap();
        let (verdict, annotations) = verdict_from(Some(fitted.slope), -1.0, 0.25, true);
        ExperimentReport {
            kind: "approx-continuous".into(),
            columns: vec!["alpha".into(), "sup_err".into(), "kl".into()],
            rows,
            fitted: Some(fitted),
            theory_slope: -1.0,
            tolerance: 0.25,
            verdict,
            annotations,
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = sample_report();
        let csv = r.to_csv();
        let (cols, rows, fitted) = ExperimentReport::parse_csv(&csv).unwrap();
        assert_eq!(cols, r.columns);
        assert_eq!(rows.len(), r.rows.len());
        for (a, b) in rows.iter().flatten().zip(r.rows.iter().flatten()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert!((fitted.unwrap() - r.fitted_slope().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn emission_is_deterministic_and_empty_report_has_no_svg() {
        let r = sample_report();
        assert_eq!(r.to_csv(), r.to_csv());
        assert_eq!(r.to_svg(), r.to_svg());
        assert!(r.to_svg().is_some());

        let empty = ExperimentReport {
            kind: "x".into(),
            columns: vec!["alpha".into(), "err".into()],
            rows: vec![],
            fitted: None,
            theory_slope: -1.0,
            tolerance: 0.1,
            verdict: Verdict::InsufficientData,
            annotations: vec![],
        };
        assert!(empty.to_svg().is_none());
        assert!(empty.to_csv().starts_with("alpha,err\n"));
        assert!(empty.to_text().contains("insufficient data"));
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict_from(Some(-1.1), -1.0, 0.2, true).0, Verdict::Pass);
        assert_eq!(verdict_from(Some(-0.7), -1.0, 0.2, true).0, Verdict::Fail);
        // faster than theory: pass with annotation
        let (v, notes) = verdict_from(Some(-2.0), -1.0, 0.2, true);
        assert_eq!(v, Verdict::Pass);
        assert!(!notes.is_empty());
        assert_eq!(verdict_from(None, -1.0, 0.2, true).0, Verdict::InsufficientData);
        assert_eq!(verdict_from(Some(-1.0), -1.0, 0.2, false).0, Verdict::Incomplete);
    }

    #[test]
    fn emit_writes_files() {
        let dir = std::env::temp_dir().join(format!("betamix-report-test-{}", std::process::id()));
        let r = sample_report();
        let paths = emit_report(&r, &dir).unwrap();
        assert_eq!(paths.len(), 3);
        let csv1 = std::fs::read(&paths[0]).unwrap();
        emit_report(&r, &dir).unwrap();
        let csv2 = std::fs::read(&paths[0]).unwrap();
        assert_eq!(csv1, csv2);
        std::fs::remove_dir_all(&dir).ok();
    }
}
