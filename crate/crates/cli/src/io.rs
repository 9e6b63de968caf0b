//! Artifact reading and writing: data CSV ingestion with row-precise errors,
//! deterministic output files, metadata sidecars, and minimal SVG renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use percount::CountSeries;

use crate::config::RunConfig;
use crate::AppError;

/// Read a count series CSV. Header must contain `t` and a count column
/// (`count` or `x`); a `season` column, when present, is cross-checked
/// against ((t−1) mod T) + 1.
pub fn read_counts(path: &str, period: u32) -> Result<CountSeries, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("cannot read data file {path}: {e}")))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| AppError::Data(format!("{path}: empty file")))?;
    let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    let t_col = cols
        .iter()
        .position(|c| *c == "t")
        .ok_or_else(|| AppError::Data(format!("{path}: header needs a 't' column")))?;
    let x_col = cols
        .iter()
        .position(|c| *c == "count" || *c == "x")
        .ok_or_else(|| AppError::Data(format!("{path}: header needs a 'count' (or 'x') column")))?;
    let season_col = cols.iter().position(|c| *c == "season");

    let mut counts = Vec::new();
    for (line_idx, line) in lines {
        let row = line_idx + 1; // 1-based, header is row 1
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        let get = |col: usize| -> Result<&str, AppError> {
            fields.get(col).copied().ok_or_else(|| {
                AppError::Data(format!("{path} row {row}: missing column {}", col + 1))
            })
        };
        let t: usize = get(t_col)?
            .parse()
            .map_err(|_| AppError::Data(format!("{path} row {row}: 't' is not an integer")))?;
        if t != counts.len() + 1 {
            return Err(AppError::Data(format!(
                "{path} row {row}: expected t={}, found t={t}",
                counts.len() + 1
            )));
        }
        let x: u32 = get(x_col)?.parse().map_err(|_| {
            AppError::Data(format!("{path} row {row}: count is not a nonnegative integer"))
        })?;
        if let Some(sc) = season_col {
            let season: u32 = get(sc)?.parse().map_err(|_| {
                AppError::Data(format!("{path} row {row}: season is not an integer"))
            })?;
            let expected = percount::season_of(t, period);
            if season != expected {
                return Err(AppError::Data(format!(
                    "{path} row {row}: season {season} disagrees with ((t-1) mod {period})+1 = {expected}"
                )));
            }
        }
        counts.push(x);
    }
    CountSeries::new(counts, period)
        .map_err(|e| AppError::Data(format!("{path}: {e}")))
}

/// Write a file and its metadata sidecar (`<file>.meta.toml`) carrying the
/// tool version, the subcommand, and the fully resolved configuration.
/// No timestamps anywhere: reruns are byte-identical.
pub fn write_artifact(
    out_dir: &str,
    name: &str,
    contents: &str,
    subcommand: &str,
    resolved: &RunConfig,
) -> Result<PathBuf, AppError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Config(format!("cannot create {out_dir}: {e}")))?;
    let path = Path::new(out_dir).join(name);
    std::fs::write(&path, contents)
        .map_err(|e| AppError::Config(format!("cannot write {}: {e}", path.display())))?;

    let mut meta = String::new();
    let _ = writeln!(meta, "tool = \"percount\"");
    let _ = writeln!(meta, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(meta, "subcommand = \"{subcommand}\"");
    let _ = writeln!(meta, "artifact = \"{name}\"");
    let _ = writeln!(meta);
    let _ = writeln!(meta, "[resolved_config]");
    let body = toml::to_string(resolved)
        .map_err(|e| AppError::Config(format!("cannot serialize config: {e}")))?;
    // nest the resolved config one level down
    let nested = body
        .lines()
        .map(|line| {
            if let Some(rest) = line.strip_prefix("[[") {
                format!("[[resolved_config.{rest}")
            } else if let Some(rest) = line.strip_prefix('[') {
                format!("[resolved_config.{rest}")
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    meta.push_str(&nested);
    meta.push('\n');

    let meta_path = Path::new(out_dir).join(format!("{name}.meta.toml"));
    std::fs::write(&meta_path, meta)
        .map_err(|e| AppError::Config(format!("cannot write {}: {e}", meta_path.display())))?;
    Ok(path)
}

/// Format a float for CSV: shortest round-trip form, locale-independent.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Minimal SVG bar chart for PIT bin masses.
pub fn svg_bars(masses: &[f64], reference: f64) -> String {
    let width = 640.0;
    let height = 360.0;
    let margin = 40.0;
    let n = masses.len() as f64;
    let max = masses.iter().cloned().fold(reference, f64::max) * 1.25;
    let bar_w = (width - 2.0 * margin) / n;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    for (i, &m) in masses.iter().enumerate() {
        let h = (m / max) * (height - 2.0 * margin);
        let x = margin + i as f64 * bar_w;
        let y = height - margin - h;
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" \
             fill=\"steelblue\" stroke=\"white\"/>",
            x,
            bar_w * 0.92
        );
    }
    // reference line for the uniform mass
    let ref_y = height - margin - (reference / max) * (height - 2.0 * margin);
    let _ = writeln!(
        s,
        "<line x1=\"{margin}\" y1=\"{ref_y:.2}\" x2=\"{:.2}\" y2=\"{ref_y:.2}\" \
         stroke=\"crimson\" stroke-dasharray=\"6 4\"/>",
        width - margin
    );
    let _ = writeln!(
        s,
        "<line x1=\"{margin}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        height - margin,
        width - margin,
        height - margin
    );
    s.push_str("</svg>\n");
    s
}

/// Minimal SVG line plot for residual sequences.
pub fn svg_line(values: &[f64]) -> String {
    let width = 800.0;
    let height = 300.0;
    let margin = 30.0;
    let n = values.len().max(2) as f64;
    let vmax = values.iter().cloned().fold(1.0_f64, |a, b| a.max(b.abs())) * 1.1;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        s,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
    let zero_y = height / 2.0;
    let _ = writeln!(
        s,
        "<line x1=\"{margin}\" y1=\"{zero_y}\" x2=\"{:.2}\" y2=\"{zero_y}\" stroke=\"gray\"/>",
        width - margin
    );
    let mut points = String::new();
    for (i, &v) in values.iter().enumerate() {
        let x = margin + (i as f64 / (n - 1.0)) * (width - 2.0 * margin);
        let y = zero_y - (v / vmax) * (height / 2.0 - margin);
        let _ = write!(points, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(
        s,
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"{}\"/>",
        points.trim_end()
    );
    s.push_str("</svg>\n");
    s
}
