//! Static SVG summaries of a result set.
//!
//! Two chart kinds: one bar chart of total spectral efficiency across all
//! scenarios, and one per-stream SIR profile per scenario. The output is
//! plain hand-assembled SVG with fixed-precision coordinates, so a given
//! result set always produces byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::scenario::{ScenarioError, ScenarioResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Display ceiling for infinite SIRs in the profile charts, dB.
const SIR_DISPLAY_CAP_DB: f64 = 80.0;

/// Write the summary chart plus one SIR profile per result into `dir`,
/// returning the created paths. Requires a nonempty result set.
pub fn emit_plots(results: &[ScenarioResult], dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    if results.is_empty() {
        return Err(ScenarioError::Config(
            "cannot plot an empty result set".into(),
        ));
    }
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(results.len() + 1);

    let summary = dir.join("total_se.svg");
    write_file(&summary, &total_se_chart(results))?;
    written.push(summary);

    for r in results {
        let path = dir.join(format!("sir_{}.svg", sanitize(&r.name)));
        write_file(&path, &sir_profile_chart(r))?;
        written.push(path);
    }
    Ok(written)
}

fn write_file(path: &Path, content: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, content).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Filesystem-safe scenario name: alphanumerics and dashes survive, block
/// markers (`*`) become `s`, anything else becomes `_`.
fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else if c == '*' {
                's'
            } else {
                '_'
            }
        })
        .collect()
}

/// Bar chart of total spectral efficiency per scenario.
pub fn total_se_chart(results: &[ScenarioResult]) -> String {
    let max_se = results.iter().map(|r| r.total_se).fold(1.0f64, f64::max);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let slot = plot_w / results.len() as f64;
    let bar_w = (slot * 0.7).min(60.0);

    let mut svg = svg_open("Total spectral efficiency, bits/s/Hz");
    axes(&mut svg, max_se, "bits/s/Hz");
    for (i, r) in results.iter().enumerate() {
        let h = plot_h * r.total_se / max_se;
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let y = MARGIN_TOP + plot_h - h;
        let _ = writeln!(
            svg,
            r##"  <rect x="{x:.2}" y="{y:.2}" width="{bar_w:.2}" height="{h:.2}" fill="#3572b0"/>"##,
        );
        let cx = x + bar_w / 2.0;
        let label_y = MARGIN_TOP + plot_h + 16.0;
        let _ = writeln!(
            svg,
            r#"  <text x="{cx:.2}" y="{label_y:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            escape(&r.name)
        );
        let value_y = y - 4.0;
        let _ = writeln!(
            svg,
            r#"  <text x="{cx:.2}" y="{value_y:.2}" font-size="10" text-anchor="middle">{:.0}</text>"#,
            r.total_se
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Per-stream SIR profile of one result, dB scale, infinite SIRs drawn at
/// the display ceiling.
pub fn sir_profile_chart(result: &ScenarioResult) -> String {
    let db: Vec<f64> = result
        .sir
        .iter()
        .map(|&s| {
            if s.is_infinite() {
                SIR_DISPLAY_CAP_DB
            } else if s <= 0.0 {
                0.0
            } else {
                (10.0 * s.log10()).clamp(0.0, SIR_DISPLAY_CAP_DB)
            }
        })
        .collect();
    let max_db = db.iter().cloned().fold(10.0f64, f64::max);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let mut svg = svg_open(&format!(
        "Per-stream SIR, scenario {} ({} streams)",
        escape(&result.name),
        result.n_u
    ));
    axes(&mut svg, max_db, "SIR, dB");
    let n = db.len().max(1);
    let slot = plot_w / n as f64;
    let bar_w = (slot * 0.8).max(1.0);
    for (i, &v) in db.iter().enumerate() {
        let h = plot_h * v / max_db;
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let y = MARGIN_TOP + plot_h - h;
        let _ = writeln!(
            svg,
            r##"  <rect x="{x:.2}" y="{y:.2}" width="{bar_w:.2}" height="{h:.2}" fill="#b03535"/>"##,
        );
    }
    let label_y = MARGIN_TOP + plot_h + 16.0;
    let mid = MARGIN_LEFT + plot_w / 2.0;
    let _ = writeln!(
        svg,
        r#"  <text x="{mid:.2}" y="{label_y:.2}" font-size="11" text-anchor="middle">stream index</text>"#,
    );
    svg.push_str("</svg>\n");
    svg
}

fn svg_open(title: &str) -> String {
    let mut svg = String::with_capacity(4096);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#,
    );
    let _ = writeln!(
        svg,
        r#"  <rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#,
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{:.2}" y="24" font-size="14" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    );
    svg
}

fn axes(svg: &mut String, max_value: f64, y_label: &str) {
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let x1 = WIDTH - MARGIN_RIGHT;
    let _ = writeln!(
        svg,
        r#"  <line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="black"/>"#,
    );
    let _ = writeln!(
        svg,
        r#"  <line x1="{x0:.2}" y1="{:.2}" x2="{x0:.2}" y2="{y0:.2}" stroke="black"/>"#,
        MARGIN_TOP
    );
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let y = MARGIN_TOP + plot_h * (1.0 - frac);
        let value = max_value * frac;
        let _ = writeln!(
            svg,
            r#"  <line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#,
            x0 - 4.0
        );
        let _ = writeln!(
            svg,
            r#"  <text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{value:.1}</text>"#,
            x0 - 7.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"  <text x="14" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {:.2})">{y_label}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
