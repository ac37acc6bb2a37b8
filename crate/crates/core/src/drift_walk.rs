//! The planar drift process `Z_n = (X_n, Y_n)`.
//!
//! `X` receives the drift `kappa_n(Z_n) = rho |Y_n|^gamma / ((1 + X_n)^alpha (1 + n)^beta)`
//! plus a bounded innovation; `Y` is a martingale with bounded, uniformly
//! elliptic increments. Two increment laws are provided:
//!
//! * [`DriftVariant::Verbatim`]: the four-outcome law where horizontal and
//!   vertical moves are exclusive. Vertical moves shift `X` by exactly
//!   `kappa`, so `X` leaves the integers as soon as `kappa` is fractional.
//! * [`DriftVariant::Lattice`]: `dx` rounds `kappa` up or down at random with
//!   mean `kappa`, and `dy = +-1` independently. `Z` stays on `Z+ x Z`.
//!
//! Laws are enumerated explicitly ([`TransitionLaw`]) and sampled by inverse
//! CDF in listed order from one uniform draw, so trajectories are a pure
//! function of the stream.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::exponents::{confinement_constant, ModelParams};
use crate::model::ModelKind;
use crate::numeric::{pow, two_sum, DoubleDouble};
use crate::rng::RngStream;
use crate::statistics::{loglog_slope, FinalState, FitWindow, GammaSum, PathSummary, RegressionResult, RunningMax};

/// Runs abort once `X` passes this.
pub const OVERFLOW_LIMIT: f64 = 1e300;

/// Ellipticity constant shared by both laws.
pub const DELTA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftVariant {
    Verbatim,
    Lattice,
}

impl DriftVariant {
    /// Bound `B` on the innovation norm `||(xi1, xi2)||`.
    pub fn innovation_bound(self) -> f64 {
        match self {
            DriftVariant::Verbatim => 1.0,
            DriftVariant::Lattice => std::f64::consts::SQRT_2,
        }
    }

    /// Full parameter set for this law.
    pub fn params(self, alpha: f64, beta: f64, gamma: f64, rho: f64) -> Result<ModelParams> {
        ModelParams::new(alpha, beta, gamma, rho, self.innovation_bound(), DELTA)
    }

    pub fn model_kind(self) -> ModelKind {
        match self {
            DriftVariant::Verbatim => ModelKind::LatticeVerbatim,
            DriftVariant::Lattice => ModelKind::Lattice,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftWalkState {
    pub n: u64,
    pub x: f64,
    pub y: f64,
}

impl DriftWalkState {
    pub fn new(n: u64, x: f64, y: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(WalkError::Domain(format!(
                "state needs finite x >= 0 and finite y, got ({x}, {y})"
            )));
        }
        Ok(Self { n, x, y })
    }
}

/// `rho |y|^gamma / ((1 + x)^alpha (1 + n)^beta)`.
#[inline]
pub fn kappa(params: &ModelParams, n: u64, x: f64, y: f64) -> f64 {
    params.rho * pow(y.abs(), params.gamma) / (pow(1.0 + x, params.alpha) * pow(1.0 + n as f64, params.beta))
}

/// `max(B, |y|)^gamma / ((1 + n)^beta (1 + x)^(1 + alpha))`.
#[inline]
pub fn zeta(params: &ModelParams, n: u64, x: f64, y: f64) -> f64 {
    pow(params.b.max(y.abs()), params.gamma) / (pow(1.0 + n as f64, params.beta) * pow(1.0 + x, 1.0 + params.alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub dx: f64,
    pub dy: f64,
    pub prob: f64,
}

/// Finite increment law at one state. Zero-probability branches are omitted;
/// the remaining outcomes keep their declared order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionLaw {
    kappa: f64,
    outcomes: [Outcome; 4],
    len: usize,
}

impl TransitionLaw {
    fn from_branches(kappa: f64, branches: [Outcome; 4]) -> Self {
        let mut outcomes = [Outcome {
            dx: 0.0,
            dy: 0.0,
            prob: 0.0,
        }; 4];
        let mut len = 0;
        for o in branches.into_iter().filter(|o| o.prob > 0.0) {
            outcomes[len] = o;
            len += 1;
        }
        Self { kappa, outcomes, len }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes[..self.len]
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes().iter().map(|o| o.prob).sum()
    }

    pub fn mean_dx(&self) -> f64 {
        self.outcomes().iter().map(|o| o.prob * o.dx).sum()
    }

    pub fn mean_dy(&self) -> f64 {
        self.outcomes().iter().map(|o| o.prob * o.dy).sum()
    }

    /// `E[xi1] = E[dx] - kappa`.
    pub fn mean_xi1(&self) -> f64 {
        self.outcomes().iter().map(|o| o.prob * (o.dx - self.kappa)).sum()
    }

    pub fn prob_abs_dy_at_least(&self, delta: f64) -> f64 {
        self.outcomes()
            .iter()
            .filter(|o| o.dy.abs() >= delta)
            .map(|o| o.prob)
            .sum()
    }

    /// Largest `||(dx - kappa, dy)||` over the support.
    pub fn max_innovation_norm(&self) -> f64 {
        self.outcomes()
            .iter()
            .map(|o| (o.dx - self.kappa).hypot(o.dy))
            .fold(0.0, f64::max)
    }

    /// Inverse-CDF lookup of `u in [0, 1)` over the listed outcomes.
    #[inline]
    pub fn pick(&self, u: f64) -> (f64, f64) {
        let mut cumulative = 0.0;
        for o in self.outcomes() {
            cumulative += o.prob;
            if u < cumulative {
                return (o.dx, o.dy);
            }
        }
        let last = self.outcomes[self.len - 1];
        (last.dx, last.dy)
    }
}

/// The four-outcome law. With `phi = ceil(kappa) - kappa`:
///
/// | dx            | dy | probability                   |
/// |---------------|----|-------------------------------|
/// | `kappa + phi` | 0  | `(1 - phi)/2 + (phi/2) 1{x < 1}` |
/// | `kappa + phi - 1` | 0 | `(phi/2) 1{x >= 1}`         |
/// | `kappa`       | +1 | 1/4                           |
/// | `kappa`       | -1 | 1/4                           |
///
/// The indicator `1{x < 1}` coincides with `1{x = 0}` on the lattice and keeps
/// the law normalised when vertical moves have left `X` in `(0, 1)`.
pub fn example1_law(params: &ModelParams, state: &DriftWalkState) -> TransitionLaw {
    let k = kappa(params, state.n, state.x, state.y);
    verbatim_law_at(k, state.x)
}

#[inline]
fn verbatim_law_at(k: f64, x: f64) -> TransitionLaw {
    let up = k.ceil();
    let phi = up - k;
    let low_x = x < 1.0;
    TransitionLaw::from_branches(
        k,
        [
            Outcome {
                dx: up,
                dy: 0.0,
                prob: (1.0 - phi) / 2.0 + if low_x { phi / 2.0 } else { 0.0 },
            },
            Outcome {
                dx: up - 1.0,
                dy: 0.0,
                prob: if low_x { 0.0 } else { phi / 2.0 },
            },
            Outcome {
                dx: k,
                dy: 1.0,
                prob: 0.25,
            },
            Outcome {
                dx: k,
                dy: -1.0,
                prob: 0.25,
            },
        ],
    )
}

/// Product law: `dx = ceil(kappa)` w.p. `1 - phi` else `ceil(kappa) - 1`,
/// independently `dy = +-1` w.p. 1/2 each. Requires `x in Z+`, `y in Z`.
pub fn lattice_product_law(params: &ModelParams, state: &DriftWalkState) -> Result<TransitionLaw> {
    if !(state.x >= 0.0 && state.x.fract() == 0.0 && state.y.fract() == 0.0) {
        return Err(WalkError::Domain(format!(
            "lattice law needs an integer state, got ({}, {})",
            state.x, state.y
        )));
    }
    Ok(lattice_law_at(kappa(params, state.n, state.x, state.y)))
}

#[inline]
fn lattice_law_at(k: f64) -> TransitionLaw {
    let up = k.ceil();
    let phi = up - k;
    let hi = (1.0 - phi) / 2.0;
    let lo = phi / 2.0;
    TransitionLaw::from_branches(
        k,
        [
            Outcome {
                dx: up,
                dy: 1.0,
                prob: hi,
            },
            Outcome {
                dx: up,
                dy: -1.0,
                prob: hi,
            },
            Outcome {
                dx: up - 1.0,
                dy: 1.0,
                prob: lo,
            },
            Outcome {
                dx: up - 1.0,
                dy: -1.0,
                prob: lo,
            },
        ],
    )
}

/// Law of the chosen variant at `state`.
pub fn law(variant: DriftVariant, params: &ModelParams, state: &DriftWalkState) -> Result<TransitionLaw> {
    match variant {
        DriftVariant::Verbatim => Ok(example1_law(params, state)),
        DriftVariant::Lattice => lattice_product_law(params, state),
    }
}

/// Sample one increment; always consumes exactly one draw.
#[inline]
pub fn step(law: &TransitionLaw, stream: &mut RngStream) -> (f64, f64) {
    law.pick(stream.uniform_unit())
}

/// What happened on one call to [`DriftWalker::advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftStep {
    pub kappa: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Step-by-step simulator carrying the online accumulators: drift sum `A_n`,
/// innovation sum `Xi_n`, and the confinement statistic `zeta_n` checked
/// against `max(zeta_0, C0')` after every step.
#[derive(Debug, Clone)]
pub struct DriftWalker {
    params: ModelParams,
    variant: DriftVariant,
    path_index: u64,
    state: DriftWalkState,
    x0: f64,
    x_exact: DoubleDouble,
    drift_sum: DoubleDouble,
    innovation_sum: DoubleDouble,
    kappa_now: f64,
    zeta_now: f64,
    max_zeta: f64,
    zeta_bound: f64,
    max_residual: f64,
}

impl DriftWalker {
    pub fn new(params: ModelParams, variant: DriftVariant, x0: f64, y0: f64, path_index: u64) -> Result<Self> {
        params.validate()?;
        let state = DriftWalkState::new(0, x0, y0)?;
        if variant == DriftVariant::Lattice {
            lattice_product_law(&params, &state)?;
        }
        let zeta0 = zeta(&params, 0, x0, y0);
        Ok(Self {
            params,
            variant,
            path_index,
            state,
            x0,
            x_exact: DoubleDouble::from_f64(x0),
            drift_sum: DoubleDouble::ZERO,
            innovation_sum: DoubleDouble::ZERO,
            kappa_now: kappa(&params, 0, x0, y0),
            zeta_now: zeta0,
            max_zeta: zeta0,
            zeta_bound: zeta0.max(confinement_constant(&params)),
            max_residual: 0.0,
        })
    }

    pub fn state(&self) -> DriftWalkState {
        self.state
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `kappa_n(Z_n)` at the current state.
    pub fn kappa(&self) -> f64 {
        self.kappa_now
    }

    pub fn zeta(&self) -> f64 {
        self.zeta_now
    }

    pub fn max_zeta(&self) -> f64 {
        self.max_zeta
    }

    pub fn zeta_bound(&self) -> f64 {
        self.zeta_bound
    }

    /// `A_n = sum_{m<n} kappa_m(Z_m)`.
    pub fn drift_sum(&self) -> f64 {
        self.drift_sum.to_f64()
    }

    /// `Xi_n = sum_{m<n} xi1_{m+1}`.
    pub fn innovation_sum(&self) -> f64 {
        self.innovation_sum.to_f64()
    }

    /// `|X_n - X_0 - A_n - Xi_n|` at the current step.
    pub fn residual(&self) -> f64 {
        (self.x_exact - DoubleDouble::from_f64(self.x0) - self.drift_sum - self.innovation_sum)
            .to_f64()
            .abs()
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    #[inline]
    fn current_law(&self) -> TransitionLaw {
        match self.variant {
            DriftVariant::Verbatim => verbatim_law_at(self.kappa_now, self.state.x),
            DriftVariant::Lattice => lattice_law_at(self.kappa_now),
        }
    }

    /// Advance one step. Fails on overflow or if `zeta` exceeds its bound.
    pub fn advance(&mut self, stream: &mut RngStream) -> Result<DriftStep> {
        let law = self.current_law();
        let k = self.kappa_now;
        let (dx, dy) = step(&law, stream);

        let (xi_hi, xi_lo) = two_sum(dx, -k);
        self.innovation_sum = self.innovation_sum + DoubleDouble { hi: xi_hi, lo: xi_lo };
        self.drift_sum = self.drift_sum.add_f64(k);
        self.x_exact = self.x_exact.add_f64(dx);

        let n = self.state.n + 1;
        let x = self.x_exact.to_f64();
        let y = self.state.y + dy;
        if !(x <= OVERFLOW_LIMIT) {
            return Err(WalkError::Overflow { n, x });
        }
        self.state = DriftWalkState { n, x, y };
        self.kappa_now = kappa(&self.params, n, x, y);
        self.zeta_now = zeta(&self.params, n, x, y);
        if self.zeta_now > self.max_zeta {
            self.max_zeta = self.zeta_now;
            if self.zeta_now > self.zeta_bound {
                return Err(WalkError::ZetaViolation {
                    path_index: self.path_index,
                    n,
                    x,
                    y,
                    zeta: self.zeta_now,
                    bound: self.zeta_bound,
                });
            }
        }
        let r = self.residual();
        if r > self.max_residual {
            self.max_residual = r;
        }
        Ok(DriftStep { kappa: k, dx, dy })
    }
}

/// One checkpoint row of a drift trajectory (`n,x,y,kappa,zeta,A,Xi`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub n: u64,
    pub x: f64,
    pub y: f64,
    pub kappa: f64,
    pub zeta: f64,
    #[serde(rename = "A")]
    pub drift_sum: f64,
    #[serde(rename = "Xi")]
    pub innovation_sum: f64,
}

pub const DRIFT_CSV_HEADER: &str = "n,x,y,kappa,zeta,A,Xi";

impl DriftRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.x, self.y, self.kappa, self.zeta, self.drift_sum, self.innovation_sum
        )
    }
}

#[derive(Debug, Clone)]
pub struct DriftPath {
    pub rows: Vec<DriftRow>,
    pub summary: PathSummary,
}

/// Fit `ln value` on `ln n` over checkpoints; `None` if too few usable points.
pub(crate) fn fit(checkpoints: &[u64], values: &[f64], window: FitWindow) -> Option<RegressionResult> {
    let samples: Vec<(f64, f64)> = checkpoints.iter().zip(values).map(|(&n, &v)| (n as f64, v)).collect();
    loglog_slope(&samples, window).ok()
}

pub(crate) fn fit_halves(checkpoints: &[u64], values: &[f64], window: FitWindow) -> Option<(f64, f64)> {
    let (lower, upper) = window.halves();
    Some((
        fit(checkpoints, values, lower)?.slope,
        fit(checkpoints, values, upper)?.slope,
    ))
}

/// Simulate `steps` steps from `(x0, y0)`, recording checkpoint rows and the
/// path summary. `checkpoints` must be strictly increasing.
#[allow(clippy::too_many_arguments)]
pub fn simulate_drift_path(
    params: &ModelParams,
    variant: DriftVariant,
    x0: f64,
    y0: f64,
    steps: u64,
    stream: &mut RngStream,
    checkpoints: &[u64],
    fit_window: FitWindow,
) -> Result<DriftPath> {
    if steps == 0 {
        return Err(WalkError::Config("steps must be >= 1".into()));
    }
    let mut walker = DriftWalker::new(*params, variant, x0, y0, stream.path_index())?;
    let mut max_abs_y = RunningMax::default();
    let mut max_abs_xi = RunningMax::default();
    let mut gamma_sum = GammaSum::new(params.beta, params.gamma);

    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut xs = Vec::with_capacity(checkpoints.len());
    let mut ys = Vec::with_capacity(checkpoints.len());
    let mut max_ys = Vec::with_capacity(checkpoints.len());
    let mut gammas = Vec::with_capacity(checkpoints.len());
    let mut xis = Vec::with_capacity(checkpoints.len());
    let mut next_cp = checkpoints.iter().copied().filter(|&c| c >= 1 && c <= steps).peekable();

    max_abs_y.push(y0.abs());
    max_abs_xi.push(0.0);
    for _ in 0..steps {
        walker.advance(stream)?;
        let s = walker.state();
        max_abs_y.push(s.y.abs());
        max_abs_xi.push(walker.innovation_sum().abs());
        gamma_sum.push(s.y.abs());
        if next_cp.next_if_eq(&s.n).is_some() {
            rows.push(DriftRow {
                n: s.n,
                x: s.x,
                y: s.y,
                kappa: walker.kappa(),
                zeta: walker.zeta(),
                drift_sum: walker.drift_sum(),
                innovation_sum: walker.innovation_sum(),
            });
            xs.push(s.x);
            ys.push(s.y.abs());
            max_ys.push(max_abs_y.value());
            gammas.push(gamma_sum.value());
            xis.push(1.0 + max_abs_xi.value());
        }
    }

    let cps: Vec<u64> = rows.iter().map(|r| r.n).collect();
    let end = walker.state();
    let summary = PathSummary {
        path_index: stream.path_index(),
        seed: stream.master_seed(),
        model: variant.model_kind(),
        params: Some(*params),
        steps,
        final_state: FinalState::Drift {
            n: end.n,
            x: end.x,
            y: end.y,
        },
        slope_x: fit(&cps, &xs, fit_window),
        slope_x_halves: fit_halves(&cps, &xs, fit_window),
        slope_max_y: fit(&cps, &max_ys, fit_window),
        slope_gamma_sum: fit(&cps, &gammas, fit_window),
        slope_xi: fit(&cps, &xis, fit_window),
        max_zeta: Some(walker.max_zeta()),
        zeta_bound: Some(walker.zeta_bound()),
        decomposition_residual: Some(walker.max_residual()),
        flagged_abs_y_count: 0,
        checkpoint_abs_y: ys,
        checkpoints: cps,
        max_step_norm_error: None,
        cone_violations: 0,
        antipodal_fallbacks: 0,
        final_direction: None,
    };
    Ok(DriftPath { rows, summary })
}
