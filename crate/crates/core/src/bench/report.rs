//! Aggregation over episodes and report files.
//!
//! `emit_report` writes `metrics.csv`, `summary.json` and one grouped bar
//! chart per metric (`<metric>.svg`). Wall-clock timing is kept out of these
//! files so that reruns reproduce them byte for byte; see [`emit_timing`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltlf::rules::{SAFE_DISTANCE, ZIPPER};
use crate::planner::Variant;

use super::episode::{EpisodeOutcome, EpisodeResult};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no episodes to aggregate")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

/// Rates for one (variant, budget) cell. Rates are percentages of
/// `episodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: Variant,
    pub budget: usize,
    pub episodes: usize,
    pub collisions: usize,
    pub successes: usize,
    pub timeouts: usize,
    pub zip_violation_episodes: usize,
    pub sd_violation_episodes: usize,
    pub collision_rate: f64,
    pub success_rate: f64,
    pub zip_violation_rate: f64,
    pub sd_violation_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
}

fn rate(n: usize, total: usize) -> f64 {
    100.0 * n as f64 / total as f64
}

/// Per-(variant, budget) rates. Rows are ordered by variant, then budget,
/// independent of the order of `results`.
pub fn aggregate(results: &[EpisodeResult]) -> Result<BenchmarkReport, ReportError> {
    if results.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut cells: BTreeMap<(Variant, usize), Vec<&EpisodeResult>> = BTreeMap::new();
    for r in results {
        cells.entry((r.variant, r.budget)).or_default().push(r);
    }
    let rows = cells
        .into_iter()
        .map(|((variant, budget), eps)| {
            let n = eps.len();
            let count = |f: &dyn Fn(&EpisodeResult) -> bool| eps.iter().filter(|e| f(e)).count();
            let collisions = count(&|e| e.outcome == EpisodeOutcome::Collision);
            let successes = count(&|e| e.outcome == EpisodeOutcome::Success);
            let timeouts = count(&|e| e.outcome == EpisodeOutcome::Timeout);
            let zip = count(&|e| e.violated(ZIPPER));
            let sd = count(&|e| e.violated(SAFE_DISTANCE));
            ReportRow {
                variant,
                budget,
                episodes: n,
                collisions,
                successes,
                timeouts,
                zip_violation_episodes: zip,
                sd_violation_episodes: sd,
                collision_rate: rate(collisions, n),
                success_rate: rate(successes, n),
                zip_violation_rate: rate(zip, n),
                sd_violation_rate: rate(sd, n),
            }
        })
        .collect();
    Ok(BenchmarkReport { rows })
}

impl BenchmarkReport {
    pub fn row(&self, variant: Variant, budget: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.budget == budget)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Reads one percentage off a report row.
pub type Metric = fn(&ReportRow) -> f64;

/// Chartable metrics: file stem, axis title and accessor.
pub const METRICS: [(&str, &str, Metric); 4] = [
    ("collision", "Collision (%)", |r| r.collision_rate),
    ("success", "Success (%)", |r| r.success_rate),
    ("zipper", "Zipper violation (%)", |r| r.zip_violation_rate),
    ("safe_distance", "Safe distance violation (%)", |r| {
        r.sd_violation_rate
    }),
];

const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1",
];

/// Grouped bar chart: one group per variant, one bar per budget. The value
/// axis always spans 0 to 100 %.
pub fn bar_chart(report: &BenchmarkReport, title: &str, value: fn(&ReportRow) -> f64) -> String {
    let variants: Vec<Variant> = {
        let mut v: Vec<Variant> = report.rows.iter().map(|r| r.variant).collect();
        v.dedup();
        v
    };
    let budgets: Vec<usize> = {
        let mut b: Vec<usize> = report.rows.iter().map(|r| r.budget).collect();
        b.sort_unstable();
        b.dedup();
        b
    };
    let (left, right, top, bottom) = (60.0, 20.0, 30.0, 70.0);
    let group_w = 30.0 * budgets.len().max(1) as f64 + 20.0;
    let width = left + right + group_w * variants.len().max(1) as f64;
    let height = 320.0;
    let plot_h = height - top - bottom;
    let y = |pct: f64| top + plot_h * (1.0 - pct / 100.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{title}</text>"#,
        width / 2.0
    );
    for tick in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let ty = y(tick);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{ty}" x2="{}" y2="{ty}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{tick}</text>"##,
            width - right,
            left - 6.0,
            ty + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
        y(0.0)
    );
    for (g, variant) in variants.iter().enumerate() {
        let gx = left + group_w * g as f64 + 10.0;
        for (b, budget) in budgets.iter().enumerate() {
            let Some(row) = report.row(*variant, *budget) else {
                continue;
            };
            let v = value(row).clamp(0.0, 100.0);
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="26" height="{}" fill="{}"><title>{} / {}: {:.1}%</title></rect>"#,
                gx + 30.0 * b as f64,
                y(v),
                y(0.0) - y(v),
                PALETTE[b % PALETTE.len()],
                variant.name(),
                budget,
                v
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            gx + (group_w - 20.0) / 2.0,
            y(0.0) + 16.0,
            variant.name()
        );
    }
    for (b, budget) in budgets.iter().enumerate() {
        let lx = left + 90.0 * b as f64;
        let ly = height - 20.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{ly}">{budget} it.</text>"#,
            ly - 9.0,
            PALETTE[b % PALETTE.len()],
            lx + 14.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, contents: &str) -> Result<(), ReportError> {
    std::fs::write(&path, contents).map_err(|source| ReportError::Io { path, source })
}

/// Writes the metrics table, summary and charts into `dir` (created if
/// missing). Returns the written paths.
pub fn emit_report(report: &BenchmarkReport, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let csv_path = dir.join("metrics.csv");
    let csv_err = |source| ReportError::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    for row in &report.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: csv_path.clone(),
        source,
    })?;
    written.push(csv_path.clone());

    let json_path = dir.join("summary.json");
    write(json_path.clone(), &(report.to_json() + "\n"))?;
    written.push(json_path);

    for (stem, title, value) in METRICS {
        let p = dir.join(format!("{stem}.svg"));
        write(p.clone(), &bar_chart(report, title, value))?;
        written.push(p);
    }
    Ok(written)
}

/// Wall-clock statistics of one (variant, budget) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub variant: Variant,
    pub budget: usize,
    pub episodes: usize,
    pub total_seconds: f64,
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

/// Timing per cell from `(result, seconds)` pairs.
pub fn aggregate_timing(timed: &[(&EpisodeResult, f64)]) -> Vec<TimingRow> {
    let mut cells: BTreeMap<(Variant, usize), Vec<f64>> = BTreeMap::new();
    for (r, secs) in timed {
        cells.entry((r.variant, r.budget)).or_default().push(*secs);
    }
    cells
        .into_iter()
        .map(|((variant, budget), t)| {
            let total: f64 = t.iter().sum();
            TimingRow {
                variant,
                budget,
                episodes: t.len(),
                total_seconds: total,
                mean_seconds: total / t.len() as f64,
                max_seconds: t.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect()
}

/// Writes `timing.csv` into `dir`.
pub fn emit_timing(rows: &[TimingRow], dir: &Path) -> Result<PathBuf, ReportError> {
    let path = dir.join("timing.csv");
    let csv_err = |source| ReportError::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
