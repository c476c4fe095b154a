//! File emitters: field CSV, 16-bit PGM heatmaps, trajectory and sampling
//! tables, and the JSON run metadata.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::beables::{AsymptoticReport, BeableField};
use crate::boundary::FinalOutcome;
use crate::error::{Error, Result};
use crate::oracle::OracleDiff;
use crate::raytrace::Trajectory;
use crate::scenario::{Branch, GridSpec};

/// 17 significant digits, so every f64 round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_csv(field: &BeableField) -> String {
    let mut out = String::with_capacity(field.samples.len() * 128);
    out.push_str("t,x,total");
    for s in &field.sources {
        out.push(',');
        out.push_str(&s.to_string());
    }
    out.push_str(",nConsistent\n");
    for p in &field.samples {
        out.push_str(&fmt_f64(p.y.t));
        out.push(',');
        out.push_str(&fmt_f64(p.y.x));
        out.push(',');
        out.push_str(&fmt_f64(p.total));
        for c in &p.contributions {
            out.push(',');
            out.push_str(&fmt_f64(c.value));
        }
        out.push(',');
        out.push_str(&p.n_consistent().to_string());
        out.push('\n');
    }
    out
}

/// Binary 16-bit PGM of `values` (row-major, `t` ascending) with the
/// latest time on the top row, min-max normalized.
pub fn pgm16(values: &[f64], grid: &GridSpec) -> Vec<u8> {
    let (w, h) = (grid.nx, grid.nt);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(2 * w * h);
    for k in (0..h).rev() {
        for j in 0..w {
            let v = values[k * w + j];
            let level = if span > 0.0 {
                ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn trajectories_csv(trajectories: &[Trajectory]) -> String {
    let mut out = String::from("photonId,branch,tStart,xStart,dir\n");
    for tr in trajectories {
        for s in &tr.segments {
            let dir: i8 = s.dir.into();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                tr.photon,
                tr.branch,
                fmt_f64(s.t_start),
                fmt_f64(s.x_start),
                dir
            ));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub seed: u64,
    pub branch: String,
    pub weight: f64,
}

pub fn samples_csv(rows: &[SampleRow]) -> String {
    let mut out = String::from("seed,branch,weight\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.seed, r.branch, fmt_f64(r.weight)));
    }
    out
}

pub fn frequency_csv(branches: &[Branch], rows: &[SampleRow]) -> String {
    let n = rows.len().max(1) as f64;
    let mut out = String::from("branch,weight,count,frequency\n");
    for b in branches {
        let count = rows.iter().filter(|r| r.branch == b.label).count();
        out.push_str(&format!(
            "{},{},{},{}\n",
            b.label,
            fmt_f64(b.weight),
            count,
            fmt_f64(count as f64 / n)
        ));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchSummary {
    pub label: String,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub final_time: f64,
    pub outcome_branch: String,
    pub outcome_weight: f64,
    pub branches: Vec<BranchSummary>,
    pub grid: GridSpec,
    /// Number of grid points by size of their consistent set.
    pub consistent_set_sizes: BTreeMap<usize, usize>,
    /// Grid points where a photon is shown with only part of its energy.
    pub partial_photon_points: usize,
    pub notes: Vec<String>,
}

impl RunMetadata {
    pub fn new(
        scenario: &str,
        seed: u64,
        final_time: f64,
        outcome: &FinalOutcome,
        branches: &[Branch],
        field: &BeableField,
    ) -> Self {
        let mut sizes = BTreeMap::new();
        for p in &field.samples {
            *sizes.entry(p.n_consistent()).or_insert(0) += 1;
        }
        let partial = field.partial_photon_points();
        let mut notes = Vec::new();
        if partial > 0 {
            notes.push(
                "some photon rays carry only a Born fraction of the photon energy: the final datum \
                 that would resolve them is lightlike to every point of the ray"
                    .to_string(),
            );
        }
        RunMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            scenario: scenario.to_string(),
            seed,
            final_time,
            outcome_branch: outcome.branch.label.clone(),
            outcome_weight: outcome.weight,
            branches: branches
                .iter()
                .map(|b| BranchSummary {
                    label: b.label.clone(),
                    weight: b.weight,
                })
                .collect(),
            grid: field.grid,
            consistent_set_sizes: sizes,
            partial_photon_points: partial,
            notes,
        }
    }
}

pub fn sweep_report(report: &AsymptoticReport, branch: &str) -> String {
    let times: Vec<String> = report.final_times.iter().map(|t| t.to_string()).collect();
    let mut out = format!(
        "branch,{branch}\nfinal_times,{}\nmax_deviation,{}\nmax_system_deviation,{}\nmax_photon_deviation,{}\n",
        times.join(";"),
        fmt_f64(report.max_deviation),
        fmt_f64(report.max_system_deviation),
        fmt_f64(report.max_photon_deviation),
    );
    if let Some((y, a, b)) = report.worst {
        out.push_str(&format!(
            "worst_event,{},{}\nworst_pair,{a};{b}\n",
            fmt_f64(y.t),
            fmt_f64(y.x)
        ));
    }
    out
}

pub fn oracle_report(diff: &OracleDiff) -> String {
    let mut out = format!(
        "model,{:?}\noutcome,{}\nprobes,{}\nmax_deviation,{}\n",
        diff.model,
        diff.params.outcome,
        diff.probes,
        fmt_f64(diff.max_deviation)
    );
    if let Some(w) = diff.worst {
        out.push_str(&format!(
            "worst_probe,{:?},{},{},{},{}\n",
            w.kind,
            fmt_f64(w.y.t),
            fmt_f64(w.y.x),
            fmt_f64(w.engine),
            fmt_f64(w.oracle)
        ));
    }
    out
}

/// Writes `contents` to `dir/name`, creating `dir` as needed.
pub fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(contents.as_ref())
        .map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
