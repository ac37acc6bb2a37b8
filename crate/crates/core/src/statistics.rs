//! Estimators and ensemble aggregation.
//!
//! Per path, the simulators feed online accumulators ([`GammaSum`],
//! [`RunningMax`]) and record observables at log-spaced checkpoints; the
//! growth exponents are then read off as least-squares slopes in log-log
//! coordinates ([`loglog_slope`]). [`merge_summaries`] folds the per-path
//! [`PathSummary`] records into an [`EnsembleSummary`].
//!
//! Estimator choices: natural logs, regression over the checkpointed samples
//! (equal weight per decade rather than per step), zero samples skipped, and
//! population standard deviation across paths.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::exponents::ModelParams;
use crate::model::ModelKind;
use crate::numeric::pow;

/// Inclusive time window `[lo, hi]` for a regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: u64,
    pub hi: u64,
}

impl FitWindow {
    pub fn new(lo: u64, hi: u64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn contains(&self, m: f64) -> bool {
        m >= self.lo as f64 && m <= self.hi as f64
    }

    /// Split at the geometric midpoint into a lower and upper half.
    pub fn halves(&self) -> (FitWindow, FitWindow) {
        let mid = ((self.lo.max(1) as f64) * (self.hi as f64)).sqrt().round() as u64;
        (FitWindow::new(self.lo, mid), FitWindow::new(mid, self.hi))
    }
}

impl std::str::FromStr for FitWindow {
    type Err = WalkError;

    /// Parses `lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || WalkError::Config(format!("fit window must look like LO:HI, got '{s}'"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo = parse_count(lo).ok_or_else(bad)?;
        let hi = parse_count(hi).ok_or_else(bad)?;
        if lo > hi {
            return Err(WalkError::Config(format!("fit window lo {lo} exceeds hi {hi}")));
        }
        Ok(FitWindow::new(lo, hi))
    }
}

/// Integer or integral scientific notation such as `1e5`.
pub fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let v: f64 = s.parse().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64).then_some(v as u64)
}

/// Up to `count` distinct integer times in `[1, steps]`, log-spaced, always
/// including both endpoints.
pub fn log_checkpoints(steps: u64, count: usize) -> Vec<u64> {
    if steps == 0 {
        return Vec::new();
    }
    if count <= 1 || steps == 1 {
        return vec![steps];
    }
    let top = (steps as f64).ln();
    let mut out: Vec<u64> = (0..count)
        .map(|i| (top * i as f64 / (count - 1) as f64).exp().round() as u64)
        .map(|t| t.clamp(1, steps))
        .collect();
    out.dedup();
    *out.last_mut().expect("count >= 2") = steps;
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub n_points: usize,
    /// In-window samples dropped because they were zero, negative or flagged.
    pub skipped: usize,
    pub window: FitWindow,
}

/// Ordinary least squares of `ln s` on `ln m` over samples with `m` in the
/// window and `s > 0`.
pub fn loglog_slope(samples: &[(f64, f64)], window: FitWindow) -> Result<RegressionResult> {
    let mut skipped = 0;
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(m, _)| window.contains(*m))
        .filter_map(|&(m, s)| {
            if s > 0.0 && s.is_finite() && m >= 1.0 {
                Some((m.ln(), s.ln()))
            } else {
                skipped += 1;
                None
            }
        })
        .collect();
    let insufficient = || WalkError::InsufficientData {
        usable: points.len(),
        lo: window.lo as f64,
        hi: window.hi as f64,
    };
    if points.len() < 2 {
        return Err(insufficient());
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x - mean_x;
        (sxx + dx * dx, sxy + dx * (y - mean_y))
    });
    if sxx <= 0.0 {
        return Err(insufficient());
    }
    let slope = sxy / sxx;
    Ok(RegressionResult {
        slope,
        intercept: mean_y - slope * mean_x,
        n_points: points.len(),
        skipped,
        window,
    })
}

/// Online path sum `sum_{m=start}^{n} m^-beta s_m^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSum {
    beta: f64,
    gamma: f64,
    next_index: u64,
    total: f64,
}

impl GammaSum {
    pub fn new(beta: f64, gamma: f64) -> Self {
        Self::starting_at(beta, gamma, 1)
    }

    /// Accumulator whose first pushed sample carries index `start`.
    pub fn starting_at(beta: f64, gamma: f64, start: u64) -> Self {
        Self {
            beta,
            gamma,
            next_index: start.max(1),
            total: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, s: f64) {
        let m = self.next_index as f64;
        self.total += pow(s, self.gamma) / pow(m, self.beta);
        self.next_index += 1;
    }

    pub fn value(&self) -> f64 {
        self.total
    }

    /// Index of the most recently pushed sample (0 if none yet).
    pub fn index(&self) -> u64 {
        self.next_index - 1
    }
}

/// `Gamma_n(beta, gamma)` at each checkpoint, for `s = (s_1, s_2, ...)`.
pub fn gamma_path_sum(s: &[f64], beta: f64, gamma: f64, checkpoints: &[u64]) -> Vec<f64> {
    let mut acc = GammaSum::new(beta, gamma);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut cps = checkpoints.iter().peekable();
    for &v in s {
        acc.push(v);
        while cps.next_if(|&&c| c == acc.index()).is_some() {
            out.push(acc.value());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningMax {
    current: f64,
}

impl Default for RunningMax {
    fn default() -> Self {
        Self {
            current: f64::NEG_INFINITY,
        }
    }
}

impl RunningMax {
    #[inline]
    pub fn push(&mut self, v: f64) -> f64 {
        if v > self.current {
            self.current = v;
        }
        self.current
    }

    pub fn value(&self) -> f64 {
        self.current
    }
}

/// Prefix maxima of `s`.
pub fn running_max(s: &[f64]) -> Vec<f64> {
    let mut acc = RunningMax::default();
    s.iter().map(|&v| acc.push(v)).collect()
}

/// Final state of one simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FinalState {
    Drift {
        n: u64,
        x: f64,
        y: f64,
    },
    Barycentric {
        n: u64,
        w: [f64; 2],
        g: [f64; 2],
        beta: f64,
    },
}

/// Per-trajectory statistics. Fields that only make sense for one family of
/// models are `None` for the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub path_index: u64,
    pub seed: u64,
    pub model: ModelKind,
    pub params: Option<ModelParams>,
    pub steps: u64,
    pub final_state: FinalState,
    pub slope_x: Option<RegressionResult>,
    /// Slopes of `ln X` over the lower and upper halves of the fit window.
    pub slope_x_halves: Option<(f64, f64)>,
    pub slope_max_y: Option<RegressionResult>,
    /// `ln Gamma_n(beta, gamma)` over `|Y|`, with the model's own beta, gamma.
    pub slope_gamma_sum: Option<RegressionResult>,
    /// `ln(1 + max_{m<=n} |Xi_m|)`.
    pub slope_xi: Option<RegressionResult>,
    pub max_zeta: Option<f64>,
    pub zeta_bound: Option<f64>,
    pub decomposition_residual: Option<f64>,
    pub flagged_abs_y_count: u64,
    /// `|Y_n|` at each checkpoint; NaN where the value was flagged.
    pub checkpoint_abs_y: Vec<f64>,
    pub checkpoints: Vec<u64>,
    /// Largest `| ||W_{n+1} - W_n|| - 1 |` seen (barycentric only).
    pub max_step_norm_error: Option<f64>,
    /// Steps whose increment entered the excluded cone (barycentric only).
    pub cone_violations: u64,
    pub antipodal_fallbacks: u64,
    pub final_direction: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
}

/// Fixed-width histogram layout; extended by whole bins when samples fall
/// outside `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for BinSpec {
    fn default() -> Self {
        Self {
            lo: 0.5,
            hi: 1.0,
            bins: 40,
        }
    }
}

pub fn histogram(values: &[f64], bin_spec: &BinSpec) -> Vec<HistogramBin> {
    let width = (bin_spec.hi - bin_spec.lo) / bin_spec.bins as f64;
    let index = |v: f64| {
        let i = ((v - bin_spec.lo) / width).floor() as i64;
        // The right edge of the nominal range belongs to the last bin.
        if v == bin_spec.hi {
            bin_spec.bins as i64 - 1
        } else {
            i
        }
    };
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let first = finite.iter().map(|&v| index(v)).min().unwrap_or(0).min(0);
    let last = finite
        .iter()
        .map(|&v| index(v))
        .max()
        .unwrap_or(0)
        .max(bin_spec.bins as i64 - 1);
    let mut bins: Vec<HistogramBin> = (first..=last)
        .map(|i| HistogramBin {
            bin_lo: bin_spec.lo + i as f64 * width,
            bin_hi: bin_spec.lo + (i + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for v in finite {
        bins[(index(v) - first) as usize].count += 1;
    }
    bins
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub n: u64,
    /// Monte Carlo estimate of `E |Y_n|^gamma`.
    pub estimate: f64,
    /// `estimate / n^(gamma / 2)`.
    pub ratio: f64,
}

/// Average `|Y_n|^gamma` across paths at each checkpoint and normalise by
/// `n^(gamma/2)`. NaN entries (flagged samples) are left out of the average.
pub fn moment_band_check(y_paths: &[Vec<f64>], gamma: f64, checkpoints: &[u64]) -> Vec<MomentPoint> {
    checkpoints
        .iter()
        .enumerate()
        .filter_map(|(k, &n)| {
            let (sum, count) = y_paths
                .iter()
                .filter_map(|p| p.get(k).copied())
                .filter(|v| !v.is_nan())
                .fold((0.0, 0usize), |(s, c), v| (s + pow(v.abs(), gamma), c + 1));
            (count > 0).then(|| {
                let estimate = sum / count as f64;
                MomentPoint {
                    n,
                    estimate,
                    ratio: estimate / pow(n as f64, gamma / 2.0),
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSensitivity {
    pub lower: FitWindow,
    pub upper: FitWindow,
    pub lower_slope_mean: f64,
    pub upper_slope_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub model: ModelKind,
    pub params: Option<ModelParams>,
    pub n_paths: usize,
    pub steps: u64,
    pub fit_window: Option<FitWindow>,
    /// Paths that produced a `ln X` slope (all of them unless the window is
    /// too short).
    pub n_fitted: usize,
    pub slope_mean: Option<f64>,
    pub slope_stddev: Option<f64>,
    pub slope_histogram: Vec<HistogramBin>,
    pub chi_predicted: Option<f64>,
    pub window_sensitivity: Option<WindowSensitivity>,
    pub max_y_slope_mean: Option<f64>,
    pub gamma_sum_slope_mean: Option<f64>,
    pub xi_slope_mean: Option<f64>,
    pub moment_gamma: f64,
    pub moment_curve: Vec<MomentPoint>,
    pub max_zeta_ratio: Option<f64>,
    pub max_decomposition_residual: Option<f64>,
    pub flagged_abs_y_total: u64,
    pub cone_violations_total: u64,
    pub max_step_norm_error: Option<f64>,
    pub antipodal_fallbacks_total: u64,
}

/// Mean and population standard deviation.
pub fn mean_and_stddev(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    mean_and_stddev(&v).map(|(m, _)| m)
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Exponent whose moments `moment_curve` tracks: the model's gamma for the
/// drift walk, 1 for the barycentric walk.
pub fn moment_gamma(model: ModelKind, params: Option<&ModelParams>) -> f64 {
    match (model.is_drift(), params) {
        (true, Some(p)) => p.gamma,
        _ => 1.0,
    }
}

/// Fold per-path summaries into one ensemble summary. Input order does not
/// matter: paths are sorted by index first.
pub fn merge_summaries(mut paths: Vec<PathSummary>, bins: &BinSpec) -> Result<EnsembleSummary> {
    paths.sort_by_key(|p| p.path_index);
    let first = paths
        .first()
        .ok_or_else(|| WalkError::Merge("no path summaries".into()))?
        .clone();
    for p in &paths[1..] {
        if p.model != first.model
            || p.params != first.params
            || p.steps != first.steps
            || p.checkpoints != first.checkpoints
        {
            return Err(WalkError::Merge(format!(
                "path {} was run with different model, parameters, steps or checkpoints than path {}",
                p.path_index, first.path_index
            )));
        }
    }
    for pair in paths.windows(2) {
        if pair[0].path_index == pair[1].path_index {
            return Err(WalkError::Merge(format!("duplicate path index {}", pair[0].path_index)));
        }
    }

    let slopes: Vec<f64> = paths.iter().filter_map(|p| p.slope_x.map(|r| r.slope)).collect();
    let stats = mean_and_stddev(&slopes);
    let fit_window = paths.iter().find_map(|p| p.slope_x.map(|r| r.window));

    let window_sensitivity = fit_window.and_then(|w| {
        let halves: Vec<(f64, f64)> = paths.iter().filter_map(|p| p.slope_x_halves).collect();
        let (lower, upper) = w.halves();
        Some(WindowSensitivity {
            lower,
            upper,
            lower_slope_mean: mean_of(halves.iter().map(|h| h.0))?,
            upper_slope_mean: mean_of(halves.iter().map(|h| h.1))?,
        })
    });

    let chi_predicted = match (first.model.is_drift(), first.params.as_ref()) {
        (true, Some(p)) => Some(crate::exponents::chi(p)),
        // The conjectured Flory exponent.
        (false, _) => Some(0.75),
        _ => None,
    };

    let gamma = moment_gamma(first.model, first.params.as_ref());
    let y_paths: Vec<Vec<f64>> = paths.iter().map(|p| p.checkpoint_abs_y.clone()).collect();

    Ok(EnsembleSummary {
        model: first.model,
        params: first.params,
        n_paths: paths.len(),
        steps: first.steps,
        fit_window,
        n_fitted: slopes.len(),
        slope_mean: stats.map(|s| s.0),
        slope_stddev: stats.map(|s| s.1),
        slope_histogram: histogram(&slopes, bins),
        chi_predicted,
        window_sensitivity,
        max_y_slope_mean: mean_of(paths.iter().filter_map(|p| p.slope_max_y.map(|r| r.slope))),
        gamma_sum_slope_mean: mean_of(paths.iter().filter_map(|p| p.slope_gamma_sum.map(|r| r.slope))),
        xi_slope_mean: mean_of(paths.iter().filter_map(|p| p.slope_xi.map(|r| r.slope))),
        moment_gamma: gamma,
        moment_curve: moment_band_check(&y_paths, gamma, &first.checkpoints),
        max_zeta_ratio: max_of(paths.iter().filter_map(|p| Some(p.max_zeta? / p.zeta_bound?))),
        max_decomposition_residual: max_of(paths.iter().filter_map(|p| p.decomposition_residual)),
        flagged_abs_y_total: paths.iter().map(|p| p.flagged_abs_y_count).sum(),
        cone_violations_total: paths.iter().map(|p| p.cone_violations).sum(),
        max_step_norm_error: max_of(paths.iter().filter_map(|p| p.max_step_norm_error)),
        antipodal_fallbacks_total: paths.iter().map(|p| p.antipodal_fallbacks).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn w(lo: u64, hi: u64) -> FitWindow {
        FitWindow::new(lo, hi)
    }

    #[test]
    fn exact_power_law_slope() {
        let s: Vec<(f64, f64)> = [10.0f64, 100.0, 1000.0].iter().map(|&m| (m, m.powf(0.75))).collect();
        let r = loglog_slope(&s, w(1, 1000)).unwrap();
        assert!((r.slope - 0.75).abs() < 1e-12);
        assert_eq!(r.n_points, 3);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let s: Vec<(f64, f64)> = (1..=50).map(|m| (m as f64, 3.5)).collect();
        assert!(loglog_slope(&s, w(1, 50)).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn three_point_slope_by_normal_equations() {
        // log2 coordinates: x = {0,1,2}, y = {0,1,3}; cov/var = 1.5.
        let s = [(1.0, 1.0), (2.0, 2.0), (4.0, 8.0)];
        let r = loglog_slope(&s, w(1, 4)).unwrap();
        assert!((r.slope - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_and_out_of_window_samples_skipped() {
        let s = [(1.0, 0.0), (2.0, 2.0), (4.0, 4.0), (8.0, 800.0)];
        let r = loglog_slope(&s, w(1, 4)).unwrap();
        assert_eq!(r.n_points, 2);
        assert_eq!(r.skipped, 1);
        assert!((r.slope - 1.0).abs() < 1e-12);
        let err = loglog_slope(&[(1.0, 0.0), (2.0, 3.0)], w(1, 4)).unwrap_err();
        assert!(matches!(err, WalkError::InsufficientData { usable: 1, .. }));
        assert!(loglog_slope(&[(5.0, 1.0), (5.0, 2.0)], w(1, 10)).is_err());
    }

    #[test]
    fn gamma_sums() {
        let ones = vec![1.0; 7];
        assert_eq!(gamma_path_sum(&ones, 0.0, 2.3, &[7]), vec![7.0]);
        assert_eq!(
            gamma_path_sum(&[1.0, 2.0, 3.0, 4.0], 0.0, 1.0, &[2, 4]),
            vec![3.0, 10.0]
        );
        let h = gamma_path_sum(&[5.0, 6.0, 7.0], 1.0, 0.0, &[3]);
        assert!((h[0] - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn running_maxima() {
        assert_eq!(running_max(&[1.0, 3.0, 2.0]), vec![1.0, 3.0, 3.0]);
        assert_eq!(running_max(&[1.0, 2.0, 5.0]), vec![1.0, 2.0, 5.0]);
        assert_eq!(running_max(&[4.0, 4.0, 4.0]), vec![4.0, 4.0, 4.0]);
    }

    #[test]
    fn checkpoints_are_log_spaced_and_bounded() {
        let c = log_checkpoints(100_000, 512);
        assert_eq!(c[0], 1);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.windows(2).all(|p| p[0] < p[1]));
        assert!(c.len() > 300 && c.len() <= 512);
        assert_eq!(log_checkpoints(1, 512), vec![1]);
        assert_eq!(log_checkpoints(3, 512), vec![1, 2, 3]);
    }

    #[test]
    fn window_parsing() {
        assert_eq!("1000:100000".parse::<FitWindow>().unwrap(), w(1000, 100_000));
        assert_eq!("1e3:1e5".parse::<FitWindow>().unwrap(), w(1000, 100_000));
        assert!("10".parse::<FitWindow>().is_err());
        assert!("10:5".parse::<FitWindow>().is_err());
    }

    #[test]
    fn histogram_extends_to_cover_outliers() {
        let bin_spec = BinSpec::default();
        let h = histogram(&[0.75, 1.0, 0.2, 1.3], &bin_spec);
        assert_eq!(h.iter().map(|b| b.count).sum::<u64>(), 4);
        assert!(h.first().unwrap().bin_lo <= 0.2);
        assert!(h.last().unwrap().bin_hi > 1.3);
        let nominal = histogram(&[0.75], &bin_spec);
        assert_eq!(nominal.len(), 40);
        assert_eq!(nominal.iter().map(|b| b.count).sum::<u64>(), 1);
    }

    #[test]
    fn rademacher_second_moment_oracle() {
        // Y_n a sum of independent +-1 signs: E Y_n^2 = n exactly.
        let paths = 4000;
        let n = 400u64;
        let mut ys = Vec::with_capacity(paths);
        let mut ratios = Vec::with_capacity(paths);
        for i in 0..paths {
            let mut rng = RngStream::new(11, i as u64);
            let mut y = 0.0f64;
            for _ in 0..n {
                y += if rng.uniform_unit() < 0.5 { 1.0 } else { -1.0 };
            }
            ys.push(vec![y.abs()]);
            ratios.push(y * y / n as f64);
        }
        let curve = moment_band_check(&ys, 2.0, &[n]);
        let (_, sd) = mean_and_stddev(&ratios).unwrap();
        let sigma = sd / (paths as f64).sqrt();
        assert!((curve[0].ratio - 1.0).abs() <= 3.0 * sigma, "{curve:?} sigma {sigma}");
        assert_eq!(moment_band_check(&ys, 0.0, &[n])[0].ratio, 1.0);
    }

    fn dummy_path(index: u64, slope: f64) -> PathSummary {
        PathSummary {
            path_index: index,
            seed: 1,
            model: ModelKind::Lattice,
            params: Some(ModelParams::new(1.0, 0.0, 1.0, 1.0, 2f64.sqrt(), 0.5).unwrap()),
            steps: 10,
            final_state: FinalState::Drift { n: 10, x: 1.0, y: 0.0 },
            slope_x: Some(RegressionResult {
                slope,
                intercept: 0.0,
                n_points: 2,
                skipped: 0,
                window: w(1, 10),
            }),
            slope_x_halves: Some((slope, slope)),
            slope_max_y: None,
            slope_gamma_sum: None,
            slope_xi: None,
            max_zeta: Some(1.0),
            zeta_bound: Some(2.0),
            decomposition_residual: Some(0.0),
            flagged_abs_y_count: 0,
            checkpoint_abs_y: vec![1.0, index as f64],
            checkpoints: vec![1, 10],
            max_step_norm_error: None,
            cone_violations: 0,
            antipodal_fallbacks: 0,
            final_direction: None,
        }
    }

    #[test]
    fn merge_single_and_pair() {
        let one = merge_summaries(vec![dummy_path(0, 0.7)], &BinSpec::default()).unwrap();
        assert_eq!(one.slope_mean, Some(0.7));
        assert_eq!(one.slope_stddev, Some(0.0));

        let two = merge_summaries(vec![dummy_path(0, 0.7), dummy_path(1, 0.8)], &BinSpec::default()).unwrap();
        assert!((two.slope_mean.unwrap() - 0.75).abs() < 1e-15);
        assert!((two.slope_stddev.unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(two.slope_histogram.iter().map(|b| b.count).sum::<u64>(), 2);
        assert_eq!(two.chi_predicted, Some(0.75));
        assert_eq!(two.max_zeta_ratio, Some(0.5));
    }

    #[test]
    fn merge_rejects_mixed_parameters() {
        let mut other = dummy_path(1, 0.8);
        other.params = Some(ModelParams::new(0.5, 0.0, 0.0, 1.0, 2f64.sqrt(), 0.5).unwrap());
        assert!(matches!(
            merge_summaries(vec![dummy_path(0, 0.7), other], &BinSpec::default()),
            Err(WalkError::Merge(_))
        ));
        assert!(merge_summaries(vec![dummy_path(3, 0.7), dummy_path(3, 0.7)], &BinSpec::default()).is_err());
        assert!(merge_summaries(Vec::new(), &BinSpec::default()).is_err());
    }

    proptest! {
        #[test]
        fn slope_is_scale_equivariant(
            ys in proptest::collection::vec(0.01f64..1e3, 3..40),
            c in 1e-3f64..1e3,
        ) {
            let s: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect();
            let scaled: Vec<(f64, f64)> = s.iter().map(|&(m, y)| (m, c * y)).collect();
            let a = loglog_slope(&s, w(1, 1000)).unwrap();
            let b = loglog_slope(&scaled, w(1, 1000)).unwrap();
            prop_assert!((a.slope - b.slope).abs() <= 1e-12);
            prop_assert!((b.intercept - a.intercept - c.ln()).abs() <= 1e-9);
        }

        #[test]
        fn gamma_sum_monotone_and_additive(
            s in proptest::collection::vec(0.0f64..50.0, 2..200),
            beta in -1.0f64..3.0,
            gamma in 0.0f64..3.0,
            split in 1usize..199,
        ) {
            let split = split.min(s.len() - 1);
            let cps: Vec<u64> = (1..=s.len() as u64).collect();
            let sums = gamma_path_sum(&s, beta, gamma, &cps);
            prop_assert!(sums.windows(2).all(|p| p[1] >= p[0]));
            let mut head = GammaSum::new(beta, gamma);
            s[..split].iter().for_each(|&v| head.push(v));
            let mut tail = GammaSum::starting_at(beta, gamma, split as u64 + 1);
            s[split..].iter().for_each(|&v| tail.push(v));
            let total = *sums.last().unwrap();
            prop_assert!((head.value() + tail.value() - total).abs() <= 1e-9 * total.max(1.0));
        }

        #[test]
        fn merge_is_order_independent(
            slopes in proptest::collection::vec(0.4f64..1.1, 1..30),
            seed in any::<u64>(),
        ) {
            let paths: Vec<PathSummary> = slopes.iter().enumerate()
                .map(|(i, &s)| dummy_path(i as u64, s)).collect();
            let mut shuffled = paths.clone();
            let mut rng = RngStream::new(seed, 0);
            for i in (1..shuffled.len()).rev() {
                let j = (rng.uniform_unit() * (i + 1) as f64) as usize;
                shuffled.swap(i, j);
            }
            let a = merge_summaries(paths, &BinSpec::default()).unwrap();
            let b = merge_summaries(shuffled, &BinSpec::default()).unwrap();
            prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        }
    }
}
