//! Ensemble orchestration and persistence.
//!
//! Paths are independent: path `i` uses `RngStream::new(master_seed, i)` and
//! nothing else. A fixed pool of workers pulls path indices from an atomic
//! counter; results are sorted by index before merging, so every emitted
//! byte is independent of the thread count.

mod config;
mod output;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

pub use config::{RunConfig, DEFAULT_CHECKPOINTS};
pub use output::{
    read_trajectory_csv, write_histogram_csv, write_paths_jsonl, write_summary_json, write_trajectory,
    write_trajectory_csv, PathRecord, TrajectoryTable,
};

use crate::barycentric::{simulate_barycentric_path, BarycentricRow};
use crate::drift_walk::{simulate_drift_path, DriftRow};
use crate::error::{Result, WalkError};
use crate::model::Process;
use crate::rng::RngStream;
use crate::statistics::{log_checkpoints, merge_summaries, BinSpec, EnsembleSummary, PathSummary};

/// Env var consulted for `threads` when neither flag nor config sets it.
pub const THREADS_ENV: &str = "WALKLAB_THREADS";

#[derive(Debug, Clone)]
pub enum Trajectory {
    Drift(Vec<DriftRow>),
    Barycentric(Vec<BarycentricRow>),
}

#[derive(Debug, Clone)]
pub struct PathRun {
    pub summary: PathSummary,
    pub trajectory: Option<Trajectory>,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub master_seed: u64,
    #[serde(flatten)]
    pub summary: EnsembleSummary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutputOptions {
    pub save_trajectories: bool,
}

/// Simulate path `index` of the configured ensemble.
pub fn run_path(config: &RunConfig, index: u64, keep_trajectory: bool) -> Result<PathRun> {
    let checkpoints = log_checkpoints(config.steps, config.checkpoints);
    run_path_at(config, index, &checkpoints, keep_trajectory)
}

/// [`run_path`] with explicit, strictly increasing checkpoint times in
/// `[1, steps]`.
pub fn run_path_at(config: &RunConfig, index: u64, checkpoints: &[u64], keep_trajectory: bool) -> Result<PathRun> {
    config.validate()?;
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.iter().any(|&c| c == 0 || c > config.steps) {
        return Err(WalkError::Config(
            "checkpoints must be strictly increasing within [1, steps]".into(),
        ));
    }
    let window = config.effective_fit_window();
    let mut stream = RngStream::new(config.master_seed, index);
    match config.model.process() {
        Process::Drift(variant) => {
            let params = variant.params(config.alpha, config.beta, config.gamma, config.rho)?;
            let path = simulate_drift_path(
                &params,
                variant,
                config.x0,
                config.y0,
                config.steps,
                &mut stream,
                checkpoints,
                window,
            )?;
            Ok(PathRun {
                summary: path.summary,
                trajectory: keep_trajectory.then_some(Trajectory::Drift(path.rows)),
            })
        }
        Process::Barycentric(variant) => {
            let path = simulate_barycentric_path(variant, config.steps, &mut stream, checkpoints, window)?;
            Ok(PathRun {
                summary: path.summary,
                trajectory: keep_trajectory.then_some(Trajectory::Barycentric(path.rows)),
            })
        }
    }
}

pub fn resolve_threads(requested: usize) -> usize {
    if requested > 0 {
        return requested;
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Simulate every path of the ensemble, returned in ascending index order.
pub fn run_paths(config: &RunConfig, keep_trajectories: bool) -> Result<Vec<PathRun>> {
    config.validate()?;
    let total = config.paths;
    let workers = resolve_threads(config.threads).min(total as usize).max(1);
    let next = AtomicU64::new(0);
    let abort = AtomicBool::new(false);

    let worker = || {
        let mut done: Vec<(u64, Result<PathRun>)> = Vec::new();
        while !abort.load(Ordering::Relaxed) {
            let i = next.fetch_add(1, Ordering::Relaxed);
            if i >= total {
                break;
            }
            let r = run_path(config, i, keep_trajectories);
            if r.is_err() {
                abort.store(true, Ordering::Relaxed);
            }
            done.push((i, r));
        }
        done
    };

    let mut results: Vec<(u64, Result<PathRun>)> = if workers == 1 {
        worker()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|_| scope.spawn(worker)).collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("path worker panicked"))
                .collect()
        })
    };
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

pub fn summarize(config: &RunConfig, runs: &[PathRun]) -> Result<RunReport> {
    let summaries = runs.iter().map(|r| r.summary.clone()).collect();
    Ok(RunReport {
        config_hash: config.config_hash(),
        master_seed: config.master_seed,
        summary: merge_summaries(summaries, &BinSpec::default())?,
    })
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub report: RunReport,
    pub paths: Vec<PathRun>,
}

/// Simulate, merge, and write `summary.json`, `paths.jsonl`, `hist.csv` and
/// optionally `traj_<i>.csv` under `config.out_dir`.
pub fn run_ensemble(config: &RunConfig, options: OutputOptions) -> Result<EnsembleRun> {
    let paths = run_paths(config, options.save_trajectories)?;
    let report = summarize(config, &paths)?;
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| WalkError::io(dir, e))?;
    write_summary_json(&dir.join("summary.json"), &report)?;
    write_paths_jsonl(&dir.join("paths.jsonl"), paths.iter().map(|p| &p.summary))?;
    write_histogram_csv(&dir.join("hist.csv"), &report.summary.slope_histogram)?;
    if options.save_trajectories {
        for p in &paths {
            if let Some(t) = &p.trajectory {
                write_trajectory_csv(&dir.join(format!("traj_{}.csv", p.summary.path_index)), t)?;
            }
        }
    }
    Ok(EnsembleRun { report, paths })
}
