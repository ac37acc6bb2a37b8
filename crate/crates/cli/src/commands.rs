use std::io::Write;

use walklab_core::drift_walk::{law, DriftVariant, DriftWalkState, DELTA};
use walklab_core::exponents::{
    chi, chi_ladder, confinement_constant, is_superdiffusive, theta_iterate, DEFAULT_THETA_MAX_ITER, DEFAULT_THETA_TOL,
};
use walklab_core::harness::{
    read_trajectory_csv, run_ensemble, run_path_at, write_trajectory, write_trajectory_csv, OutputOptions, RunConfig,
    THREADS_ENV,
};
use walklab_core::statistics::{log_checkpoints, loglog_slope, PathSummary, RegressionResult};
use walklab_core::{FitWindow, ModelKind, ModelParams};

use crate::{AnalyzeArgs, DriftParamArgs, EnsembleArgs, ExponentsArgs, Failure, SimulateArgs, VerifyLawArgs};

type CmdResult = Result<(), Failure>;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn slope(r: Option<RegressionResult>) -> String {
    opt(r.map(|r| r.slope))
}

impl DriftParamArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = self.alpha {
            config.alpha = v;
        }
        if let Some(v) = self.beta {
            config.beta = v;
        }
        if let Some(v) = self.gamma {
            config.gamma = v;
        }
        if let Some(v) = self.rho {
            config.rho = v;
        }
    }
}

fn print_path_summary(out: &mut impl Write, s: &PathSummary) -> std::io::Result<()> {
    writeln!(out, "model={}", s.model)?;
    writeln!(out, "steps={}", s.steps)?;
    writeln!(out, "slope_x={}", slope(s.slope_x))?;
    writeln!(out, "slope_max_y={}", slope(s.slope_max_y))?;
    if s.model.is_drift() {
        writeln!(out, "slope_gamma_sum={}", slope(s.slope_gamma_sum))?;
        writeln!(out, "slope_xi={}", slope(s.slope_xi))?;
        writeln!(out, "max_zeta={}", opt(s.max_zeta))?;
        writeln!(out, "zeta_bound={}", opt(s.zeta_bound))?;
        writeln!(out, "decomposition_residual={}", opt(s.decomposition_residual))?;
    } else {
        writeln!(out, "cone_violations={}", s.cone_violations)?;
        writeln!(out, "max_step_norm_error={}", opt(s.max_step_norm_error))?;
        writeln!(out, "flagged_abs_y={}", s.flagged_abs_y_count)?;
    }
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> CmdResult {
    let mut config = RunConfig {
        model: a.model,
        steps: a.steps,
        paths: 1,
        x0: a.x0,
        y0: a.y0,
        fit_window: a.fit_window,
        ..RunConfig::default()
    };
    if let Some(seed) = a.master_seed {
        config.master_seed = seed;
    }
    a.params.apply(&mut config);
    let checkpoints: Vec<u64> = match a.checkpoints {
        Some(c) => log_checkpoints(config.steps, c),
        None => (1..=config.steps).collect(),
    };
    let run = run_path_at(&config, a.path_index, &checkpoints, true)?;
    let trajectory = run.trajectory.as_ref().expect("trajectory requested");
    let io_err = |e: std::io::Error| Failure::Input(e.to_string());
    match &a.out {
        Some(path) => {
            write_trajectory_csv(path, trajectory)?;
            let mut out = std::io::stdout().lock();
            print_path_summary(&mut out, &run.summary).map_err(io_err)?;
            writeln!(out, "trajectory={}", path.display()).map_err(io_err)?;
        }
        None => {
            let mut out = std::io::BufWriter::new(std::io::stdout().lock());
            write_trajectory(&mut out, trajectory).map_err(io_err)?;
            out.flush().map_err(io_err)?;
            print_path_summary(&mut std::io::stderr().lock(), &run.summary).map_err(io_err)?;
        }
    }
    Ok(())
}

fn env_threads() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Input(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        _ => Ok(None),
    }
}

pub fn ensemble(a: EnsembleArgs) -> CmdResult {
    let mut config = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.model {
        config.model = v;
    }
    a.params.apply(&mut config);
    if let Some(v) = a.steps {
        config.steps = v;
    }
    if let Some(v) = a.paths {
        config.paths = v;
    }
    if let Some(v) = a.master_seed {
        config.master_seed = v;
    }
    if let Some(v) = a.x0 {
        config.x0 = v;
    }
    if let Some(v) = a.y0 {
        config.y0 = v;
    }
    if let Some(v) = a.checkpoints {
        config.checkpoints = v;
    }
    if a.fit_window.is_some() {
        config.fit_window = a.fit_window;
    }
    if let Some(v) = a.out_dir {
        config.out_dir = v;
    }
    match a.threads {
        Some(t) => config.threads = t,
        None if config.threads == 0 => {
            if let Some(t) = env_threads()? {
                config.threads = t;
            }
        }
        None => {}
    }

    let run = run_ensemble(
        &config,
        OutputOptions {
            save_trajectories: a.save_trajectories,
        },
    )?;
    let s = &run.report.summary;
    println!("model={}", s.model);
    println!("config_hash={}", run.report.config_hash);
    println!("n_paths={}", s.n_paths);
    println!("steps={}", s.steps);
    if let Some(w) = s.fit_window {
        println!("fit_window={}:{}", w.lo, w.hi);
    }
    println!("slope_mean={}", opt(s.slope_mean));
    println!("slope_stddev={}", opt(s.slope_stddev));
    println!("chi_predicted={}", opt(s.chi_predicted));
    println!("max_y_slope_mean={}", opt(s.max_y_slope_mean));
    if s.model.is_drift() {
        println!("gamma_sum_slope_mean={}", opt(s.gamma_sum_slope_mean));
        println!("max_zeta_ratio={}", opt(s.max_zeta_ratio));
        println!("max_decomposition_residual={}", opt(s.max_decomposition_residual));
    } else {
        println!("cone_violations={}", s.cone_violations_total);
        println!("max_step_norm_error={}", opt(s.max_step_norm_error));
    }
    println!("out_dir={}", config.out_dir.display());
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> CmdResult {
    let table = read_trajectory_csv(&a.input)?;
    let ns = table
        .column("n")
        .ok_or_else(|| Failure::Input(format!("{}: no 'n' column", a.input.display())))?;
    let name = match &a.column {
        Some(c) => c.clone(),
        None => ["X", "x"]
            .into_iter()
            .find(|c| table.headers.iter().any(|h| h == c))
            .ok_or_else(|| Failure::Input(format!("{}: no 'X' or 'x' column; pass --column", a.input.display())))?
            .to_string(),
    };
    let values = table
        .column(&name)
        .ok_or_else(|| Failure::Input(format!("{}: no '{name}' column", a.input.display())))?;
    let window = a.fit_window.unwrap_or_else(|| {
        let top = ns.iter().cloned().fold(0.0, f64::max) as u64;
        FitWindow::new(1000.min((top / 100).max(1)), top.max(1))
    });
    let samples: Vec<(f64, f64)> = ns.into_iter().zip(values).collect();
    let fit = loglog_slope(&samples, window)?;
    println!("column={name}");
    println!("fit_window={}:{}", window.lo, window.hi);
    println!("slope={}", fit.slope);
    println!("intercept={}", fit.intercept);
    println!("n_points={}", fit.n_points);
    println!("skipped={}", fit.skipped);
    Ok(())
}

pub fn exponents(a: ExponentsArgs) -> CmdResult {
    let params = ModelParams::new(a.alpha, a.beta, a.gamma, a.rho, a.b, DELTA)?;
    let c = chi(&params);
    println!("chi={c}");
    println!("superdiffusive={}", is_superdiffusive(&params));
    println!("confinement_constant={}", confinement_constant(&params));
    if a.alpha > -1.0 && a.alpha < 0.0 {
        let ladder: Vec<String> = (1..=5)
            .filter_map(|k| chi_ladder(&params, k).ok())
            .map(|v| v.to_string())
            .collect();
        if !ladder.is_empty() {
            println!("chi_ladder={}", ladder.join(","));
        }
    }
    let nu = a.nu.unwrap_or(4f64.max(2.0 + a.alpha));
    let theta0 = a.theta0.unwrap_or(nu * c + 10.0);
    println!("nu={nu}");
    match theta_iterate(theta0, nu, &params, DEFAULT_THETA_TOL, DEFAULT_THETA_MAX_ITER) {
        Ok(it) => {
            let shown: Vec<String> = it.sequence.iter().take(12).map(|v| v.to_string()).collect();
            let more = if it.sequence.len() > 12 { ",..." } else { "" };
            println!("theta_limit={}", it.limit);
            println!("theta_iterations={}", it.iterations());
            println!("theta_trace={}{more}", shown.join(","));
            println!("theta_last={}", it.last());
        }
        Err(e) => println!("theta_trace=unavailable ({e})"),
    }
    Ok(())
}

pub fn verify_law(a: VerifyLawArgs) -> CmdResult {
    let variant = match a.model {
        ModelKind::Lattice => DriftVariant::Lattice,
        ModelKind::LatticeVerbatim => DriftVariant::Verbatim,
        other => {
            return Err(Failure::Input(format!(
                "verify-law needs a drift model (lattice or lattice-verbatim), got {other}"
            )))
        }
    };
    let params = variant.params(a.alpha, a.beta, a.gamma, a.rho)?;
    let state = DriftWalkState::new(a.n, a.x, a.y)?;
    let l = law(variant, &params, &state)?;

    println!("model={}", a.model);
    println!("state=({},{},{})", a.n, a.x, a.y);
    println!("kappa={}", l.kappa());
    println!("dx,dy,prob");
    for o in l.outcomes() {
        println!("{},{},{}", o.dx, o.dy, o.prob);
    }

    let mut failed = Vec::new();
    let mut check = |name: &str, value: f64, ok: bool| {
        println!("check {name}={value} {}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failed.push(name.to_string());
        }
    };
    check(
        "sum_prob",
        l.total_probability(),
        (l.total_probability() - 1.0).abs() <= 1e-12,
    );
    check("mean_dy", l.mean_dy(), l.mean_dy().abs() <= 1e-12);
    if a.x >= 1.0 {
        let k = l.kappa();
        check("mean_dx", l.mean_dx(), (l.mean_dx() - k).abs() <= 1e-12 * k.max(1.0));
    } else {
        println!("check mean_dx={} skipped (x < 1)", l.mean_dx());
    }
    let p = l.prob_abs_dy_at_least(DELTA);
    check("prob_abs_dy_ge_delta", p, p >= 0.5 - 1e-12);
    let jump = l.max_innovation_norm();
    check("max_innovation", jump, jump <= variant.innovation_bound() + 1e-12);
    println!("innovation_bound={}", variant.innovation_bound());

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("law checks failed: {}", failed.join(", "))))
    }
}
