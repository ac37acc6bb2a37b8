use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{RunReport, Trajectory};
use crate::barycentric::BARYCENTRIC_CSV_HEADER;
use crate::drift_walk::DRIFT_CSV_HEADER;
use crate::error::{Result, WalkError};
use crate::statistics::{HistogramBin, PathSummary};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| WalkError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| WalkError::io(path, e))
}

pub fn write_summary_json(path: &Path, report: &RunReport) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| WalkError::io(path, e.into()))?;
    writeln!(w).map_err(|e| WalkError::io(path, e))?;
    finish(path, w)
}

/// One line of `paths.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_index: u64,
    pub seed: u64,
    pub slope_x: Option<f64>,
    pub slope_maxy: Option<f64>,
    pub slope_gamma: Option<f64>,
    pub max_zeta: Option<f64>,
    pub zeta_bound: Option<f64>,
    pub residual: Option<f64>,
}

impl From<&PathSummary> for PathRecord {
    fn from(s: &PathSummary) -> Self {
        Self {
            path_index: s.path_index,
            seed: s.seed,
            slope_x: s.slope_x.map(|r| r.slope),
            slope_maxy: s.slope_max_y.map(|r| r.slope),
            slope_gamma: s.slope_gamma_sum.map(|r| r.slope),
            max_zeta: s.max_zeta,
            zeta_bound: s.zeta_bound,
            residual: s.decomposition_residual,
        }
    }
}

pub fn write_paths_jsonl<'a>(path: &Path, summaries: impl IntoIterator<Item = &'a PathSummary>) -> Result<()> {
    let mut w = create(path)?;
    for s in summaries {
        serde_json::to_writer(&mut w, &PathRecord::from(s)).map_err(|e| WalkError::io(path, e.into()))?;
        writeln!(w).map_err(|e| WalkError::io(path, e))?;
    }
    finish(path, w)
}

pub fn write_histogram_csv(path: &Path, bins: &[HistogramBin]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| WalkError::io(path, e);
    writeln!(w, "bin_lo,bin_hi,count").map_err(io)?;
    for b in bins {
        writeln!(w, "{},{},{}", b.bin_lo, b.bin_hi, b.count).map_err(io)?;
    }
    finish(path, w)
}

/// Header plus one line per checkpoint row.
pub fn write_trajectory<W: Write>(w: &mut W, trajectory: &Trajectory) -> std::io::Result<()> {
    match trajectory {
        Trajectory::Drift(rows) => {
            writeln!(w, "{DRIFT_CSV_HEADER}")?;
            for r in rows {
                writeln!(w, "{}", r.csv_line())?;
            }
        }
        Trajectory::Barycentric(rows) => {
            writeln!(w, "{BARYCENTRIC_CSV_HEADER}")?;
            for r in rows {
                writeln!(w, "{}", r.csv_line())?;
            }
        }
    }
    Ok(())
}

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = create(path)?;
    write_trajectory(&mut w, trajectory).map_err(|e| WalkError::io(path, e))?;
    finish(path, w)
}

/// Numeric CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable> {
    let file = File::open(path).map_err(|e| WalkError::io(path, e))?;
    let parse_err = |line: usize, message: String| WalkError::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?
        .map_err(|e| WalkError::io(path, e))?;
    let headers: Vec<String> = header.trim().split(',').map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| WalkError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .trim()
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(i + 2, e.to_string()))?;
        if row.len() != headers.len() {
            return Err(parse_err(
                i + 2,
                format!("expected {} fields, found {}", headers.len(), row.len()),
            ));
        }
        rows.push(row);
    }
    Ok(TrajectoryTable { headers, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "n,X,absY\n1,0.1,NaN\n10,3.3333333333333335,2\n").unwrap();
        let t = read_trajectory_csv(&path).unwrap();
        assert_eq!(t.column("X").unwrap(), vec![0.1, 3.3333333333333335]);
        assert!(t.column("absY").unwrap()[0].is_nan());
        assert_eq!(t.column("missing"), None);
    }

    #[test]
    fn malformed_csv_is_reported_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "n,X\n1,2\n3\n").unwrap();
        let err = read_trajectory_csv(&path).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
